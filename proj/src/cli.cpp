#include "gest/cli.hpp"

#include "gest/config.hpp"
#include "gest/graph.hpp"
#include "gest/ingest.hpp"
#include "gest/llm.hpp"
#include "gest/metrics.hpp"
#include "gest/pipeline.hpp"
#include "gest/protolang.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace gest {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(fmt::format("cannot read '{}'", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw InputError(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
}

Settings effective_settings(const std::string& config_path, const std::vector<std::string>& overrides)
{
    Settings settings = config_path.empty() ? Settings{} : load_settings(config_path);
    for (const auto& o : overrides) {
        apply_override(settings, o);
    }
    validate(settings.pipeline);
    validate(settings.llm);
    return settings;
}

json manifest(std::string_view command, const Settings& settings, const std::vector<std::string>& inputs,
              const std::vector<std::string>& outputs, const StageTimings& timings)
{
    json t = json::object();
    for (const auto& [stage, ms] : timings) {
        t[stage] = ms;
    }
    return {{"tool", "gest"},
            {"version", kToolVersion},
            {"command", command},
            {"inputs", inputs},
            {"outputs", outputs},
            {"config_hash", config_hash(settings)},
            {"effective_config", to_canonical_string(settings)},
            {"stage_timings_ms", std::move(t)}};
}

struct BuildOptions {
    std::vector<std::string> inputs;
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    bool strict = false;
    bool force = false;
    bool serial = false;
    int workers = 1;
};

struct BuildOutcome {
    int code = kExitOk;
    std::string log;
};

BuildOutcome build_one(const std::string& input, const fs::path& out_dir, const Settings& settings,
                       const BuildOptions& opts)
{
    BuildOutcome outcome;
    const auto started = std::chrono::steady_clock::now();
    try {
        std::ifstream in(input, std::ios::binary);
        if (!in) {
            throw InputError(fmt::format("cannot read input '{}'", input));
        }
        auto parsed = parse_video_record(in, ParseOptions{opts.strict});
        for (const auto& w : parsed.warnings) {
            outcome.log += fmt::format("{}: warning: {}\n", input, w);
        }
        const auto parse_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

        const auto report = validate(parsed.meta, parsed.frames, settings.pipeline);
        if (!report.empty()) {
            outcome.log += fmt::format("{}: validation: {}", input, report.summary());
        }
        if (report.has_errors() && !opts.force) {
            outcome.log += fmt::format("{}: refusing to build a graph from invalid input (use --force)\n", input);
            outcome.code = kExitValidation;
            return outcome;
        }

        auto result = build_gest(parsed.meta, parsed.frames, settings.pipeline,
                                 opts.serial ? Exec::serial : Exec::parallel);
        result.timings.insert(result.timings.begin(), {"parse", parse_ms});

        const auto graph_path = out_dir / "graph.json";
        const auto dot_path = out_dir / "graph.dot";
        const auto manifest_path = out_dir / "manifest.json";
        write_file(graph_path, dump_graph(result.graph, config_hash(settings)));
        write_file(dot_path, export_dot(result.graph));
        write_file(manifest_path, manifest("build-graph", settings, {input},
                                           {graph_path.string(), dot_path.string()}, result.timings)
                                          .dump(1) +
                                      "\n");
        outcome.log += fmt::format("{}: {} events, {} relations -> {}\n", input, result.graph.nodes().size(),
                                   result.graph.edges().size(), graph_path.string());
    } catch (const ParseError& e) {
        outcome.code = kExitUsage;
        outcome.log += fmt::format("{}: parse error: {}\n", input, e.what());
    } catch (const SchemaError& e) {
        outcome.code = kExitUsage;
        outcome.log += fmt::format("{}: schema error: {}\n", input, e.what());
    } catch (const std::exception& e) {
        outcome.code = kExitUsage;
        outcome.log += fmt::format("{}: error: {}\n", input, e.what());
    }
    return outcome;
}

int cmd_build_graph(const BuildOptions& opts, std::ostream& out, std::ostream& err)
{
    const Settings settings = effective_settings(opts.config, opts.overrides);
    const fs::path root(opts.out);
    const bool many = opts.inputs.size() > 1;

    std::vector<fs::path> dirs;
    std::set<std::string> seen;
    for (const auto& input : opts.inputs) {
        auto stem = fs::path(input).stem().string();
        while (many && !seen.insert(stem).second) {
            stem += "_";
        }
        dirs.push_back(many ? root / stem : root);
    }

    std::vector<BuildOutcome> outcomes(opts.inputs.size());
    const auto n = static_cast<std::ptrdiff_t>(opts.inputs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, opts.workers)) if (opts.workers > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        outcomes[k] = build_one(opts.inputs[k], dirs[k], settings, opts);
    }

    int code = kExitOk;
    for (const auto& o : outcomes) {
        (o.code == kExitOk ? out : err) << o.log;
        code = std::max(code, o.code);
    }
    return code;
}

struct DescribeOptions {
    std::string graph;
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    bool dry_run = false;
};

int cmd_describe(const DescribeOptions& opts, std::ostream& out, std::ostream& err)
{
    const Settings settings = effective_settings(opts.config, opts.overrides);
    const auto graph = load_graph(read_file(opts.graph));
    const fs::path dir(opts.out);

    const auto started = std::chrono::steady_clock::now();
    const auto proto = render_proto(graph);
    const auto proto_path = dir / "proto.txt";
    const auto sidecar_path = dir / "proto.json";
    write_file(proto_path, proto.text());
    write_file(sidecar_path, proto.sidecar_json(graph));
    StageTimings timings{{"proto", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count()}};
    std::vector<std::string> outputs{proto_path.string(), sidecar_path.string()};
    out << fmt::format("wrote {} ({} statements)\n", proto_path.string(), proto.statement_count());

    int code = kExitOk;
    if (!opts.dry_run) {
        if (proto.statement_count() == 0) {
            err << "graph has no events; nothing to describe\n";
            code = kExitLlm;
        } else {
            const auto prompt = build_description_prompt(proto, settings.llm.prompt_token_budget);
            const auto prompt_path = dir / "prompt.json";
            write_file(prompt_path, json::parse(request_body(prompt, settings.llm)).dump(1) + "\n");
            outputs.push_back(prompt_path.string());
            const auto llm_started = std::chrono::steady_clock::now();
            try {
                const auto text = complete(prompt, settings.llm);
                const auto description_path = dir / "description.txt";
                write_file(description_path, text.ends_with('\n') ? text : text + "\n");
                outputs.push_back(description_path.string());
                out << fmt::format("wrote {}\n", description_path.string());
            } catch (const LlmError& e) {
                err << fmt::format("description failed: {}\n", e.what());
                code = kExitLlm;
            }
            timings.emplace_back(
                "llm", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - llm_started).count());
        }
    }
    write_file(dir / "manifest.json", manifest("describe", settings, {opts.graph}, outputs, timings).dump(1) + "\n");
    return code;
}

std::vector<json> read_jsonl(const std::string& path)
{
    std::vector<json> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error&) {
            throw InputError(fmt::format("{}: line {}: malformed JSON", path, line_no));
        }
    }
    return out;
}

struct EvalOptions {
    std::string candidates;
    std::string references;
    std::string out;
    bool serial = false;
};

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err)
{
    std::map<std::string, std::string> candidates;
    for (const auto& j : read_jsonl(opts.candidates)) {
        candidates[j.at("video_id").get<std::string>()] = j.at("text").get<std::string>();
    }
    std::map<std::string, std::vector<std::string>> references;
    std::map<std::string, std::string> grouping;
    for (const auto& j : read_jsonl(opts.references)) {
        const auto id = j.at("video_id").get<std::string>();
        auto refs = j.at("references").get<std::vector<std::string>>();
        if (refs.empty()) {
            throw InputError(fmt::format("{}: video '{}' has no references", opts.references, id));
        }
        references[id] = std::move(refs);
        if (const auto it = j.find("group"); it != j.end() && it->is_string()) {
            grouping[id] = it->get<std::string>();
        }
    }

    std::vector<std::string> missing_candidates;
    std::vector<std::string> missing_references;
    for (const auto& [id, _] : references) {
        if (!candidates.contains(id)) {
            missing_candidates.push_back(id);
        }
    }
    for (const auto& [id, _] : candidates) {
        if (!references.contains(id)) {
            missing_references.push_back(id);
        }
    }
    if (!missing_candidates.empty() || !missing_references.empty()) {
        for (const auto& id : missing_candidates) {
            err << fmt::format("video id '{}' has references but no candidate\n", id);
        }
        for (const auto& id : missing_references) {
            err << fmt::format("video id '{}' has a candidate but no references\n", id);
        }
        return kExitUsage;
    }

    std::vector<EvalPair> pairs;
    for (const auto& [id, text] : candidates) {
        pairs.push_back({id, text, references.at(id)});
    }
    const auto report = evaluate_corpus(pairs, grouping, opts.serial ? Exec::serial : Exec::parallel);
    const fs::path dir(opts.out);
    write_file(dir / "report.json", report.to_json());
    write_file(dir / "report.tsv", report.to_table());
    out << fmt::format("{} videos: BLEU@4 {:.4f}, ROUGE-L F1 {:.4f} -> {}\n", report.overall.count,
                       report.overall.bleu4, report.overall.rouge_l_f1, (dir / "report.json").string());
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Graph of events in space and time: detections to graph, proto-language and descriptions", "gest"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    BuildOptions build;
    auto* build_cmd = app.add_subcommand("build-graph", "Build the event graph from a detection record stream");
    build_cmd->add_option("-i,--input", build.inputs, "Detection record file(s) (NDJSON)")->required();
    build_cmd->add_option("-c,--config", build.config, "Config file (key = value)");
    build_cmd->add_option("-o,--out", build.out, "Output directory")->required();
    build_cmd->add_option("--set", build.overrides, "Override a config key, key=value");
    build_cmd->add_flag("--strict", build.strict, "Reject malformed lines and unknown fields");
    build_cmd->add_flag("--force", build.force, "Build even if validation reports errors");
    build_cmd->add_flag("--serial", build.serial, "Use the serial reference kernels");
    build_cmd->add_option("-j,--workers", build.workers, "Videos processed concurrently")->check(CLI::PositiveNumber);

    DescribeOptions describe;
    auto* describe_cmd = app.add_subcommand("describe", "Render proto-language and ask the LLM for a description");
    describe_cmd->add_option("-g,--graph", describe.graph, "Graph dump from build-graph")->required();
    describe_cmd->add_option("-c,--config", describe.config, "Config file (key = value)");
    describe_cmd->add_option("-o,--out", describe.out, "Output directory")->required();
    describe_cmd->add_option("--set", describe.overrides, "Override a config key, key=value");
    describe_cmd->add_flag("--dry-run", describe.dry_run, "Stop after writing the proto-language");

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score candidate descriptions with BLEU@4 and ROUGE-L");
    eval_cmd->add_option("--candidates", eval.candidates, "JSONL of {video_id, text}")->required();
    eval_cmd->add_option("--references", eval.references, "JSONL of {video_id, references[, group]}")->required();
    eval_cmd->add_option("-o,--out", eval.out, "Output directory")->required();
    eval_cmd->add_flag("--serial", eval.serial, "Use the serial reference kernel");

    std::string dot_graph;
    std::string dot_out;
    auto* dot_cmd = app.add_subcommand("export-dot", "Write a graph dump as Graphviz DOT");
    dot_cmd->add_option("-g,--graph", dot_graph, "Graph dump from build-graph")->required();
    dot_cmd->add_option("-o,--out", dot_out, "DOT file to write (stdout when omitted)");

    std::string validate_input;
    bool validate_strict = false;
    auto* validate_cmd = app.add_subcommand("validate", "Check a detection record stream against the schema");
    validate_cmd->add_option("-i,--input", validate_input, "Detection record file (NDJSON)")->required();
    validate_cmd->add_flag("--strict", validate_strict, "Reject malformed lines and unknown fields");

    std::vector<std::string> argv_storage{"gest"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*build_cmd) {
            return cmd_build_graph(build, out, err);
        }
        if (*describe_cmd) {
            return cmd_describe(describe, out, err);
        }
        if (*eval_cmd) {
            return cmd_eval(eval, out, err);
        }
        if (*dot_cmd) {
            const auto dot = export_dot(load_graph(read_file(dot_graph)));
            if (dot_out.empty()) {
                out << dot;
            } else {
                write_file(dot_out, dot);
            }
            return kExitOk;
        }
        if (*validate_cmd) {
            std::ifstream in(validate_input, std::ios::binary);
            if (!in) {
                throw InputError(fmt::format("cannot read input '{}'", validate_input));
            }
            const auto parsed = parse_video_record(in, ParseOptions{validate_strict});
            for (const auto& w : parsed.warnings) {
                err << "warning: " << w << "\n";
            }
            const auto report = validate(parsed.meta, parsed.frames, PipelineConfig{});
            out << report.summary();
            return report.has_errors() ? kExitValidation : kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace gest
