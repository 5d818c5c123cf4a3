#pragma once

#include "gest/graph.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gest {

/// A relation as seen from the statement that mentions it.
struct RelationMention {
    RelationKind kind = RelationKind::next;
    const Event* other = nullptr;
    bool other_is_earlier = true;  // in time for `next`
};

struct ProtoStatement {
    int event_id = 0;
    std::string text;
    std::vector<std::string> object_menu;
};

struct ProtoBlock {
    int person_id = 0;
    std::string intro;
    std::vector<ProtoStatement> statements;
};

struct ProtoDocument {
    std::optional<std::string> scene_line;
    std::vector<ProtoBlock> blocks;

    std::vector<std::string> lines() const;
    std::string text() const;  // lines joined with '\n', trailing newline
    std::size_t statement_count() const;

    /// Machine-readable sidecar: statement index -> event id, frame span, object menu.
    std::string sidecar_json(const GestGraph& graph) const;
};

/// Lowercase, underscores to spaces, parenthesized hints removed, whitespace collapsed.
std::string normalize_action(std::string_view label);

/// Third person singular of the leading verb ("read" -> "reads", "carry/hold" -> "carries/holds").
std::string conjugate_action(std::string_view label);

/// One clause: actor, action, time span in seconds, object menu, then relation suffixes.
std::string describe_event(const Event& event, std::span<const RelationMention> mentions, double fps);

/// Optional scene line, then one block per actor group with its statements.
ProtoDocument render_proto(const std::vector<ActionGroup>& groups, const GestGraph& graph,
                           const std::optional<std::string>& scene);

/// temporal_sort + group_by_actor + render_proto with the graph's own scene label.
ProtoDocument render_proto(const GestGraph& graph);

}  // namespace gest
