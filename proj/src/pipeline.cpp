#include "gest/pipeline.hpp"

#include "gest/action_filter.hpp"
#include "gest/event_builder.hpp"
#include "gest/relations.hpp"

#include <chrono>

namespace gest {

namespace {

class StageClock {
public:
    explicit StageClock(StageTimings& out) : out_(out), last_(std::chrono::steady_clock::now()) {}

    void mark(std::string stage)
    {
        const auto now = std::chrono::steady_clock::now();
        out_.emplace_back(std::move(stage), std::chrono::duration<double, std::milli>(now - last_).count());
        last_ = now;
    }

private:
    StageTimings& out_;
    std::chrono::steady_clock::time_point last_;
};

}  // namespace

PipelineResult build_gest(const VideoMeta& meta, const std::vector<FrameRecord>& frames, const PipelineConfig& cfg,
                          Exec exec)
{
    PipelineResult result;
    StageClock clock(result.timings);

    auto identities = resolve_identities(frames, cfg, exec);
    result.identities = std::move(identities.mapping);
    clock.mark("identity");

    const auto observations = collect_observations(frames, result.identities);
    const auto filtered = filter_stream(observations, cfg);
    const auto voted = temporal_vote(filtered, cfg, exec);
    result.observations = observations.size();
    result.filtered = filtered.size();
    result.voted = voted.size();
    clock.mark("action_filter");

    const auto associated = associate_stream(voted, frames, meta, cfg);
    auto events = unify_events(aggregate_events(associated, cfg), cfg);
    assign_event_ids(events);
    clock.mark("events");

    auto relations = build_relations(events, cfg, exec);
    clock.mark("relations");

    result.graph = build_graph(std::move(events), std::move(relations), meta);
    clock.mark("graph");
    return result;
}

}  // namespace gest
