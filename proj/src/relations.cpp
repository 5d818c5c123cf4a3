#include "gest/relations.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace gest {

std::string_view to_string(RelationKind kind)
{
    switch (kind) {
    case RelationKind::space_close: return "space_close";
    case RelationKind::next: return "next";
    case RelationKind::same_time: return "same_time";
    case RelationKind::meanwhile: return "meanwhile";
    }
    return "unknown";
}

RelationKind relation_kind_from_string(std::string_view text)
{
    for (const auto kind : {RelationKind::space_close, RelationKind::next, RelationKind::same_time,
                            RelationKind::meanwhile}) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw std::invalid_argument(fmt::format("unknown relation kind '{}'", text));
}

const BBox& box_at(const Event& event, int frame)
{
    const auto& boxes = event.per_frame_bboxes;
    if (boxes.empty()) {
        throw std::invalid_argument(fmt::format("event {} has no boxes", event.event_id));
    }
    const auto after = boxes.lower_bound(frame);
    if (after == boxes.end()) {
        return std::prev(after)->second;
    }
    if (after->first == frame || after == boxes.begin()) {
        return after->second;
    }
    const auto before = std::prev(after);
    return (frame - before->first) <= (after->first - frame) ? before->second : after->second;
}

std::optional<Relation> spatial_relation(const Event& a, const Event& b, const PipelineConfig& cfg)
{
    const int lo = std::max(a.start_frame, b.start_frame);
    const int hi = std::min(a.end_frame, b.end_frame);
    if (lo > hi || a.per_frame_bboxes.empty() || b.per_frame_bboxes.empty()) {
        return std::nullopt;
    }
    int close = 0;
    for (int f = lo; f <= hi; ++f) {
        const BBox& ba = box_at(a, f);
        const BBox& bb = box_at(b, f);
        const double dist = std::hypot(ba.cx() - bb.cx(), ba.cy() - bb.cy());
        const double diag = ba.diagonal() + bb.diagonal();
        const double ratio = diag > 0.0 ? dist / diag : (dist == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        if (ratio < cfg.spatial_ratio_threshold) {
            ++close;
        }
    }
    const double fraction = static_cast<double>(close) / static_cast<double>(hi - lo + 1);
    if (!(fraction > cfg.spatial_min_overlap_fraction)) {
        return std::nullopt;
    }
    return Relation{std::min(a.event_id, b.event_id), std::max(a.event_id, b.event_id), RelationKind::space_close,
                    fraction};
}

std::optional<Relation> temporal_relation(const Event& a, const Event& b, const PipelineConfig& cfg)
{
    if (a.start_frame > b.start_frame) {
        throw std::invalid_argument("temporal_relation: pair must be ordered by start frame");
    }
    const int overlap = std::min(a.end_frame, b.end_frame) - b.start_frame + 1;
    if (std::abs(a.start_frame - b.start_frame) <= cfg.same_time_tolerance &&
        std::abs(a.end_frame - b.end_frame) <= cfg.same_time_tolerance) {
        return Relation{a.event_id, b.event_id, RelationKind::same_time, static_cast<double>(std::max(overlap, 0))};
    }
    if (overlap >= 1) {
        return Relation{a.event_id, b.event_id, RelationKind::meanwhile, static_cast<double>(overlap)};
    }
    const int gap = b.start_frame - a.end_frame;
    if (gap >= 0 && gap <= cfg.next_max_gap) {
        return Relation{a.event_id, b.event_id, RelationKind::next, static_cast<double>(gap)};
    }
    return std::nullopt;
}

namespace {

bool relation_order(const Relation& a, const Relation& b)
{
    return std::tuple(a.src_event_id, a.dst_event_id, static_cast<int>(a.kind)) <
           std::tuple(b.src_event_id, b.dst_event_id, static_cast<int>(b.kind));
}

}  // namespace

std::vector<Relation> build_relations(const std::vector<Event>& events, const PipelineConfig& cfg, Exec exec)
{
    const auto n = static_cast<std::ptrdiff_t>(events.size());
    // Row i holds the edges of pairs (i, j > i); rows are filled independently and concatenated in order.
    std::vector<std::vector<Relation>> rows(events.size());
    const auto relate_row = [&](std::ptrdiff_t i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        const Event& ei = events[static_cast<std::size_t>(i)];
        for (std::ptrdiff_t j = i + 1; j < n; ++j) {
            const Event& ej = events[static_cast<std::size_t>(j)];
            const bool i_first = std::tie(ei.start_frame, ei.event_id) <= std::tie(ej.start_frame, ej.event_id);
            const Event& early = i_first ? ei : ej;
            const Event& late = i_first ? ej : ei;
            if (auto rel = temporal_relation(early, late, cfg)) {
                row.push_back(*rel);
            }
            if (ei.person_id != ej.person_id) {
                if (auto rel = spatial_relation(ei, ej, cfg)) {
                    row.push_back(*rel);
                }
            }
        }
    };

    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            relate_row(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            relate_row(i);
        }
    }

    std::vector<Relation> out;
    for (auto& row : rows) {
        out.insert(out.end(), row.begin(), row.end());
    }
    std::sort(out.begin(), out.end(), relation_order);
    if (cfg.reduce_next_edges) {
        out = reduce_next_edges(std::move(out));
    }
    return out;
}

std::vector<Relation> reduce_next_edges(std::vector<Relation> relations)
{
    std::map<int, std::set<int>> succ;
    for (const auto& r : relations) {
        if (r.kind == RelationKind::next) {
            succ[r.src_event_id].insert(r.dst_event_id);
        }
    }
    // a->c is redundant when c is reachable from some other successor b of a.
    const auto reachable_without_direct = [&](int a, int c) {
        std::set<int> seen;
        std::vector<int> stack;
        for (const int b : succ[a]) {
            if (b != c) {
                stack.push_back(b);
            }
        }
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            if (x == c) {
                return true;
            }
            if (!seen.insert(x).second) {
                continue;
            }
            if (const auto it = succ.find(x); it != succ.end()) {
                stack.insert(stack.end(), it->second.begin(), it->second.end());
            }
        }
        return false;
    };
    std::erase_if(relations, [&](const Relation& r) {
        return r.kind == RelationKind::next && reachable_without_direct(r.src_event_id, r.dst_event_id);
    });
    return relations;
}

}  // namespace gest
