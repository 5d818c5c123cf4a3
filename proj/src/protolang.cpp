#include "gest/protolang.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace gest {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string third_person(std::string_view verb)
{
    if (verb.empty()) {
        return {};
    }
    if (verb == "be") {
        return "is";
    }
    if (verb == "have") {
        return "has";
    }
    if (ends_with(verb, "s") || ends_with(verb, "x") || ends_with(verb, "z") || ends_with(verb, "ch") ||
        ends_with(verb, "sh") || ends_with(verb, "o")) {
        return std::string(verb) + "es";
    }
    if (verb.size() >= 2 && verb.back() == 'y' && !is_vowel(verb[verb.size() - 2])) {
        return std::string(verb.substr(0, verb.size() - 1)) + "ies";
    }
    return std::string(verb) + "s";
}

int mention_rank(RelationKind kind)
{
    switch (kind) {
    case RelationKind::same_time: return 0;
    case RelationKind::meanwhile: return 1;
    case RelationKind::next: return 2;
    case RelationKind::space_close: return 3;
    }
    return 4;
}

std::string clause(const RelationMention& m)
{
    const auto& o = *m.other;
    const auto who = fmt::format("person {}", o.person_id);
    switch (m.kind) {
    case RelationKind::same_time: return fmt::format("at the same time as {} {}", who, conjugate_action(o.action_label));
    case RelationKind::meanwhile: return fmt::format("meanwhile {} {}", who, conjugate_action(o.action_label));
    case RelationKind::next:
        return fmt::format("{} {} {}", m.other_is_earlier ? "after" : "before", who, conjugate_action(o.action_label));
    case RelationKind::space_close: return fmt::format("close to {}", who);
    }
    return {};
}

}  // namespace

std::string normalize_action(std::string_view label)
{
    std::string out;
    int depth = 0;
    for (const char c : label) {
        if (c == '(') {
            ++depth;
            continue;
        }
        if (c == ')') {
            depth = std::max(0, depth - 1);
            continue;
        }
        if (depth > 0) {
            continue;
        }
        const char lc = c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (std::isspace(static_cast<unsigned char>(lc))) {
            if (!out.empty() && out.back() != ' ') {
                out.push_back(' ');
            }
            continue;
        }
        out.push_back(lc);
    }
    while (!out.empty() && out.back() == ' ') {
        out.pop_back();
    }
    return out;
}

std::string conjugate_action(std::string_view label)
{
    const auto phrase = normalize_action(label);
    const auto space = phrase.find(' ');
    const std::string_view head = std::string_view(phrase).substr(0, space);
    const std::string rest = space == std::string::npos ? std::string{} : phrase.substr(space);

    std::string verb;
    std::size_t pos = 0;
    while (true) {
        const auto slash = head.find('/', pos);
        verb += third_person(head.substr(pos, slash == std::string_view::npos ? std::string_view::npos : slash - pos));
        if (slash == std::string_view::npos) {
            break;
        }
        verb.push_back('/');
        pos = slash + 1;
    }
    return verb + rest;
}

std::string describe_event(const Event& event, std::span<const RelationMention> mentions, double fps)
{
    std::string out = fmt::format("person {} {} (from {:.1f}s to {:.1f}s)", event.person_id,
                                  conjugate_action(event.action_label), event.start_frame / fps, event.end_frame / fps);
    if (!event.candidate_objects.empty()) {
        out += ", possibly involving: <";
        for (std::size_t i = 0; i < event.candidate_objects.size(); ++i) {
            if (i > 0) {
                out += " | ";
            }
            out += event.candidate_objects[i].label;
        }
        out += ">";
    }
    for (const auto& m : mentions) {
        out += "; ";
        out += clause(m);
    }
    out += ".";
    return out;
}

std::vector<std::string> ProtoDocument::lines() const
{
    std::vector<std::string> out;
    if (scene_line) {
        out.push_back(*scene_line);
    }
    for (const auto& block : blocks) {
        out.push_back(block.intro);
        for (const auto& s : block.statements) {
            out.push_back(s.text);
        }
    }
    return out;
}

std::string ProtoDocument::text() const
{
    std::string out;
    for (const auto& line : lines()) {
        out += line;
        out += '\n';
    }
    return out;
}

std::size_t ProtoDocument::statement_count() const
{
    std::size_t n = 0;
    for (const auto& block : blocks) {
        n += block.statements.size();
    }
    return n;
}

std::string ProtoDocument::sidecar_json(const GestGraph& graph) const
{
    nlohmann::json statements = nlohmann::json::array();
    std::size_t index = 0;
    for (const auto& block : blocks) {
        for (const auto& s : block.statements) {
            const Event& e = graph.node(s.event_id);
            statements.push_back({{"index", index++},
                                  {"event_id", s.event_id},
                                  {"person_id", e.person_id},
                                  {"start_frame", e.start_frame},
                                  {"end_frame", e.end_frame},
                                  {"object_menu", s.object_menu},
                                  {"text", s.text}});
        }
    }
    nlohmann::json doc = {{"video_id", graph.meta().video_id},
                          {"scene_line", scene_line ? nlohmann::json(*scene_line) : nlohmann::json(nullptr)},
                          {"statements", std::move(statements)}};
    return doc.dump(1) + "\n";
}

ProtoDocument render_proto(const std::vector<ActionGroup>& groups, const GestGraph& graph,
                           const std::optional<std::string>& scene)
{
    ProtoDocument doc;
    if (scene && !scene->empty()) {
        doc.scene_line = fmt::format("Scene: {}.", *scene);
    }

    std::map<int, std::size_t> position;
    for (const auto& g : groups) {
        for (const int id : g.event_ids) {
            position.emplace(id, position.size());
        }
    }

    // Each relation is mentioned once, by whichever endpoint is rendered later.
    std::map<int, std::vector<RelationMention>> mentions;
    for (const auto& r : graph.edges()) {
        const auto ps = position.find(r.src_event_id);
        const auto pd = position.find(r.dst_event_id);
        if (ps == position.end() || pd == position.end()) {
            continue;
        }
        const bool dst_later = pd->second > ps->second;
        const int self = dst_later ? r.dst_event_id : r.src_event_id;
        const int other = dst_later ? r.src_event_id : r.dst_event_id;
        mentions[self].push_back({r.kind, &graph.node(other), dst_later});
    }
    for (auto& [_, list] : mentions) {
        std::stable_sort(list.begin(), list.end(), [&](const RelationMention& a, const RelationMention& b) {
            const auto pa = position.at(a.other->event_id);
            const auto pb = position.at(b.other->event_id);
            return std::pair(mention_rank(a.kind), pa) < std::pair(mention_rank(b.kind), pb);
        });
    }

    const double fps = graph.meta().fps > 0.0 ? graph.meta().fps : 1.0;
    for (const auto& g : groups) {
        ProtoBlock block;
        block.person_id = g.person_id;
        block.intro = fmt::format("Person {}:", g.person_id);
        for (const int id : g.event_ids) {
            const Event& e = graph.node(id);
            const auto it = mentions.find(id);
            const std::span<const RelationMention> m =
                it != mentions.end() ? std::span<const RelationMention>(it->second) : std::span<const RelationMention>{};
            ProtoStatement s;
            s.event_id = id;
            s.text = describe_event(e, m, fps);
            for (const auto& c : e.candidate_objects) {
                s.object_menu.push_back(c.label);
            }
            block.statements.push_back(std::move(s));
        }
        doc.blocks.push_back(std::move(block));
    }
    return doc;
}

ProtoDocument render_proto(const GestGraph& graph)
{
    const auto sorted = temporal_sort(graph);
    return render_proto(group_by_actor(sorted, graph), graph, graph.meta().scene_label);
}

}  // namespace gest
