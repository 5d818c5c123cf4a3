#pragma once

#include "gest/event_builder.hpp"
#include "gest/relations.hpp"
#include "gest/types.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gest {

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Graph of events in space and time. Immutable once built.
class GestGraph {
public:
    GestGraph() = default;

    const VideoMeta& meta() const { return meta_; }
    const std::vector<Event>& nodes() const { return nodes_; }
    const std::vector<Relation>& edges() const { return edges_; }

    /// Throws GraphError for an unknown id.
    const Event& node(int event_id) const;
    bool contains(int event_id) const { return index_.contains(event_id); }

    /// Edges touching `event_id`, in edge order.
    std::vector<Relation> incident(int event_id) const;

    friend GestGraph build_graph(std::vector<Event> events, std::vector<Relation> relations, VideoMeta meta);

private:
    VideoMeta meta_;
    std::vector<Event> nodes_;
    std::vector<Relation> edges_;
    std::map<int, std::size_t> index_;
};

/// Checks unique node ids, existing edge endpoints and src != dst. Throws GraphError.
GestGraph build_graph(std::vector<Event> events, std::vector<Relation> relations, VideoMeta meta);

struct ActionGroup {
    int person_id = 0;
    std::vector<int> event_ids;
    int group_start_frame = 0;

    friend bool operator==(const ActionGroup&, const ActionGroup&) = default;
};

/// Event ids by start frame, then end frame, person id, action label (and id as the final key).
std::vector<int> temporal_sort(const GestGraph& graph);

/// Maximal runs of one actor in the sorted sequence, in order.
std::vector<ActionGroup> group_by_actor(const std::vector<int>& sorted_ids, const GestGraph& graph);

/// Deterministic DOT digraph named `gest`.
std::string export_dot(const GestGraph& graph);

/// Structured dump (JSON) and its inverse. The dump carries the generating config hash when given.
std::string dump_graph(const GestGraph& graph, const std::string& config_hash = {});
GestGraph load_graph(const std::string& text);

}  // namespace gest
