#include "gest/graph.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace gest {

using nlohmann::json;

const Event& GestGraph::node(int event_id) const
{
    const auto it = index_.find(event_id);
    if (it == index_.end()) {
        throw GraphError(fmt::format("no event with id {}", event_id));
    }
    return nodes_[it->second];
}

std::vector<Relation> GestGraph::incident(int event_id) const
{
    std::vector<Relation> out;
    for (const auto& e : edges_) {
        if (e.src_event_id == event_id || e.dst_event_id == event_id) {
            out.push_back(e);
        }
    }
    return out;
}

GestGraph build_graph(std::vector<Event> events, std::vector<Relation> relations, VideoMeta meta)
{
    GestGraph g;
    g.meta_ = std::move(meta);
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        if (!g.index_.emplace(e.event_id, i).second) {
            throw GraphError(fmt::format("duplicate event id {}", e.event_id));
        }
        if (e.start_frame > e.end_frame) {
            throw GraphError(fmt::format("event {} ends before it starts", e.event_id));
        }
    }
    for (const auto& r : relations) {
        if (!g.index_.contains(r.src_event_id) || !g.index_.contains(r.dst_event_id)) {
            throw GraphError(fmt::format("{} edge {} -> {} references a missing event", to_string(r.kind),
                                         r.src_event_id, r.dst_event_id));
        }
        if (r.src_event_id == r.dst_event_id) {
            throw GraphError(fmt::format("{} edge is a self loop on event {}", to_string(r.kind), r.src_event_id));
        }
    }
    g.nodes_ = std::move(events);
    g.edges_ = std::move(relations);
    return g;
}

std::vector<int> temporal_sort(const GestGraph& graph)
{
    std::vector<const Event*> order;
    order.reserve(graph.nodes().size());
    for (const auto& e : graph.nodes()) {
        order.push_back(&e);
    }
    std::sort(order.begin(), order.end(), [](const Event* a, const Event* b) {
        return std::tie(a->start_frame, a->end_frame, a->person_id, a->action_label, a->event_id) <
               std::tie(b->start_frame, b->end_frame, b->person_id, b->action_label, b->event_id);
    });
    std::vector<int> ids;
    ids.reserve(order.size());
    for (const auto* e : order) {
        ids.push_back(e->event_id);
    }
    return ids;
}

std::vector<ActionGroup> group_by_actor(const std::vector<int>& sorted_ids, const GestGraph& graph)
{
    std::vector<ActionGroup> groups;
    for (const int id : sorted_ids) {
        const Event& e = graph.node(id);
        if (groups.empty() || groups.back().person_id != e.person_id) {
            groups.push_back({e.person_id, {}, e.start_frame});
        }
        groups.back().event_ids.push_back(id);
    }
    return groups;
}

namespace {

std::string dot_quote(std::string_view s)
{
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string_view edge_style(RelationKind kind)
{
    switch (kind) {
    case RelationKind::next: return "style=solid";
    case RelationKind::same_time: return "style=bold, color=blue";
    case RelationKind::meanwhile: return "style=dashed, color=darkgreen";
    case RelationKind::space_close: return "style=dotted, color=red, dir=none";
    }
    return "style=solid";
}

}  // namespace

std::string export_dot(const GestGraph& graph)
{
    std::string out = "digraph gest {\n";
    std::vector<const Event*> nodes;
    for (const auto& e : graph.nodes()) {
        nodes.push_back(&e);
    }
    std::sort(nodes.begin(), nodes.end(), [](const Event* a, const Event* b) { return a->event_id < b->event_id; });
    for (const auto* e : nodes) {
        const auto label = fmt::format("person {}:{} [{}-{}]", e->person_id, e->action_label, e->start_frame, e->end_frame);
        out += fmt::format("  e{} [shape=box, label={}];\n", e->event_id, dot_quote(label));
    }
    auto edges = graph.edges();
    std::sort(edges.begin(), edges.end(), [](const Relation& a, const Relation& b) {
        return std::tuple(a.src_event_id, a.dst_event_id, static_cast<int>(a.kind)) <
               std::tuple(b.src_event_id, b.dst_event_id, static_cast<int>(b.kind));
    });
    for (const auto& r : edges) {
        out += fmt::format("  e{} -> e{} [label={}, {}];\n", r.src_event_id, r.dst_event_id,
                           dot_quote(to_string(r.kind)), edge_style(r.kind));
    }
    out += "}\n";
    return out;
}

std::string dump_graph(const GestGraph& graph, const std::string& config_hash)
{
    const auto& m = graph.meta();
    json meta = {{"video_id", m.video_id}, {"fps", m.fps}, {"width", m.width}, {"height", m.height}};
    if (m.scene_label) {
        meta["scene_label"] = *m.scene_label;
    }
    json events = json::array();
    for (const auto& e : graph.nodes()) {
        json boxes = json::array();
        for (const auto& [frame, b] : e.per_frame_bboxes) {
            boxes.push_back(json::array({frame, b.x1, b.y1, b.x2, b.y2}));
        }
        json candidates = json::array();
        for (const auto& c : e.candidate_objects) {
            candidates.push_back({{"label", c.label}, {"presence", c.presence}});
        }
        json object_frames = json::object();
        for (const auto& [label, frames] : e.object_frames) {
            object_frames[label] = frames;
        }
        events.push_back({{"event_id", e.event_id},
                          {"person_id", e.person_id},
                          {"action_label", e.action_label},
                          {"start_frame", e.start_frame},
                          {"end_frame", e.end_frame},
                          {"bboxes", std::move(boxes)},
                          {"candidate_objects", std::move(candidates)},
                          {"object_frames", std::move(object_frames)}});
    }
    json relations = json::array();
    for (const auto& r : graph.edges()) {
        relations.push_back(
            {{"src", r.src_event_id}, {"dst", r.dst_event_id}, {"kind", to_string(r.kind)}, {"evidence", r.evidence}});
    }
    json doc = {{"format", "gest-graph"}, {"version", 1},          {"meta", std::move(meta)},
                {"events", std::move(events)}, {"relations", std::move(relations)}};
    if (!config_hash.empty()) {
        doc["config_hash"] = config_hash;
    }
    return doc.dump(1) + "\n";
}

GestGraph load_graph(const std::string& text)
{
    try {
        const json doc = json::parse(text);
        if (doc.value("format", "") != "gest-graph") {
            throw GraphError("not a gest-graph document");
        }
        if (doc.at("version").get<int>() != 1) {
            throw GraphError(fmt::format("unsupported gest-graph version {}", doc.at("version").dump()));
        }
        const auto& jm = doc.at("meta");
        VideoMeta meta;
        meta.video_id = jm.at("video_id").get<std::string>();
        meta.fps = jm.at("fps").get<double>();
        meta.width = jm.at("width").get<int>();
        meta.height = jm.at("height").get<int>();
        if (const auto it = jm.find("scene_label"); it != jm.end() && !it->is_null()) {
            meta.scene_label = it->get<std::string>();
        }
        std::vector<Event> events;
        for (const auto& je : doc.at("events")) {
            Event e;
            e.event_id = je.at("event_id").get<int>();
            e.person_id = je.at("person_id").get<int>();
            e.action_label = je.at("action_label").get<std::string>();
            e.start_frame = je.at("start_frame").get<int>();
            e.end_frame = je.at("end_frame").get<int>();
            for (const auto& b : je.at("bboxes")) {
                e.per_frame_bboxes[b.at(0).get<int>()] =
                    BBox{b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>(), b.at(4).get<double>()};
            }
            for (const auto& c : je.at("candidate_objects")) {
                e.candidate_objects.push_back({c.at("label").get<std::string>(), c.at("presence").get<double>()});
            }
            if (const auto it = je.find("object_frames"); it != je.end()) {
                for (const auto& [label, frames] : it->items()) {
                    e.object_frames[label] = frames.get<std::vector<int>>();
                }
            }
            events.push_back(std::move(e));
        }
        std::vector<Relation> relations;
        for (const auto& jr : doc.at("relations")) {
            relations.push_back({jr.at("src").get<int>(), jr.at("dst").get<int>(),
                                 relation_kind_from_string(jr.at("kind").get<std::string>()),
                                 jr.at("evidence").get<double>()});
        }
        return build_graph(std::move(events), std::move(relations), std::move(meta));
    } catch (const json::exception& e) {
        throw GraphError(fmt::format("malformed graph dump: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw GraphError(fmt::format("malformed graph dump: {}", e.what()));
    }
}

}  // namespace gest
