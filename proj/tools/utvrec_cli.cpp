#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "utv/config.hpp"
#include "utv/errors.hpp"
#include "utv/pipeline.hpp"
#include "utv/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitStageOrder = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CliArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed = 0;
    bool seed_set = false;
    bool deterministic = false;
    utv::UserId target = 0;
    int k = 0;
    bool k_set = false;
};

int run_stage(const std::string& stage, const CliArgs& args) {
    utv::PipelineConfig config = utv::load_config(args.config_path);
    if (args.seed_set) {
        if (args.seed < 0) throw utv::ConfigError("--seed must be non-negative");
        config.seed = static_cast<std::uint64_t>(args.seed);
    }
    utv::validate_config(config);

    utv::PipelineContext ctx{config, args.out_dir, args.deterministic};
    if (stage == "ingest") {
        utv::cmd_ingest(ctx);
    } else if (stage == "rules") {
        utv::cmd_rules(ctx, args.target);
    } else if (stage == "graph") {
        utv::cmd_graph(ctx, args.target);
    } else if (stage == "embed") {
        utv::cmd_embed(ctx, args.target);
    } else if (stage == "recommend") {
        int k = args.k_set ? args.k : config.k;
        if (k < 1) throw utv::ConfigError("k must be at least 1");
        utv::cmd_recommend(ctx, args.target, k);
    } else if (stage == "evaluate") {
        utv::cmd_evaluate(ctx);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"utvrec: ensemble + graph-embedding movie recommender pipeline"};
    app.require_subcommand(1);

    CliArgs args;
    app.add_option("--config", args.config_path, "Path to the JSON config file")
        ->required();
    app.add_option("--seed", args.seed, "Override the config seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    app.add_flag("--deterministic", args.deterministic,
                 "Single-threaded, byte-reproducible outputs");
    app.add_option("--out", args.out_dir, "Output directory (default: out)");

    auto add_stage = [&app](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        return sub;
    };

    add_stage("ingest", "Parse the data files into canonical tables");
    CLI::App* rules =
        add_stage("rules", "Enumerate class rules and pick the ensemble for a target user");
    CLI::App* graph = add_stage("graph", "Build the heterogeneous movie graph for a target user");
    CLI::App* embed = add_stage("embed", "Generate walks and train node embeddings");
    CLI::App* recommend = add_stage("recommend", "Write the top-k recommendation list");
    add_stage("evaluate", "Run the evaluation protocol and write metric reports");

    for (CLI::App* sub : {rules, graph, embed, recommend}) {
        sub->add_option("--target", args.target, "Target user id")->required();
    }
    recommend->add_option("--k", args.k, "List length (default: config k)")
        ->each([&args](const std::string&) { args.k_set = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        return run_stage(stage, args);
    } catch (const utv::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const utv::StageOrderError& e) {
        std::fprintf(stderr, "stage-order error: %s\n", e.what());
        return kExitStageOrder;
    } catch (const utv::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const utv::Error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}
