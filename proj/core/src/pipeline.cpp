#include "utv/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "utv/dataset.hpp"
#include "utv/ensemble.hpp"
#include "utv/errors.hpp"
#include "utv/evaluation.hpp"
#include "utv/hetero_graph.hpp"
#include "utv/io.hpp"
#include "utv/recommender.hpp"
#include "utv/walks.hpp"

namespace utv {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kManifestName = "manifest.json";

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    std::uint64_t elapsed_ms() const {
        auto delta = std::chrono::steady_clock::now() - start_;
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(delta).count());
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void require_artifacts(const fs::path& out_dir, const std::vector<std::string>& files,
                       const std::string& predecessor) {
    for (const std::string& f : files) {
        if (!fs::exists(out_dir / f)) {
            throw StageOrderError("missing artifact '" + f + "': run the " + predecessor +
                                  " stage first");
        }
    }
}

// Loads the manifest and discards it when it belongs to a different config.
RunManifest open_manifest(const PipelineContext& ctx, const std::string& hash) {
    RunManifest manifest = load_manifest(ctx.out_dir);
    if (manifest.config_hash != hash) {
        manifest = RunManifest{};
        manifest.config_hash = hash;
    }
    manifest.seed = ctx.config.seed;
    manifest.deterministic = ctx.deterministic;
    return manifest;
}

bool stage_cached(const RunManifest& manifest, const std::string& key,
                  const fs::path& out_dir) {
    auto it = manifest.stages.find(key);
    if (it == manifest.stages.end()) return false;
    for (const std::string& f : it->second.outputs) {
        if (!fs::exists(out_dir / f)) return false;
    }
    return true;
}

void record_stage(RunManifest& manifest, const std::string& key, const StageTimer& timer,
                  std::vector<std::string> outputs, const fs::path& out_dir) {
    StageRecord record;
    // Deterministic runs must be byte-identical, manifest included.
    record.wall_ms = manifest.deterministic ? 0 : timer.elapsed_ms();
    record.outputs = std::move(outputs);
    manifest.stages[key] = std::move(record);
    save_manifest(manifest, out_dir);
}

struct LoadedTables {
    RatingTable ratings;
    UserProfileTable profiles;
    MovieCatalog movies;
};

LoadedTables load_ingested(const PipelineContext& ctx) {
    require_artifacts(ctx.out_dir, {"ratings.csv", "users.csv", "movies.csv"}, "ingest");
    LoadedTables tables;
    tables.ratings = parse_ratings(ctx.out_dir / "ratings.csv");
    tables.profiles = parse_users(ctx.out_dir / "users.csv");
    tables.movies = parse_movies(ctx.out_dir / "movies.csv");
    return tables;
}

struct DerivedTables {
    InterestProfileTable interests;
    PopularityTable popularity;
};

DerivedTables derive_tables(const LoadedTables& tables, const PipelineConfig& config) {
    DerivedTables derived;
    derived.interests = compute_interest_profiles(tables.ratings);
    derived.popularity =
        popularity_ranking(tables.ratings, tables.movies, config.top_n_popular);
    return derived;
}

GraphOptions graph_options(const PipelineConfig& config) {
    return {config.intra_subgraph_edges, config.max_subgraph_movies};
}

template <typename Fn>
std::string render(Fn&& write_fn) {
    std::ostringstream out;
    write_fn(out);
    return std::move(out).str();
}

}  // namespace

RunManifest load_manifest(const fs::path& out_dir) {
    fs::path path = out_dir / kManifestName;
    RunManifest manifest;
    if (!fs::exists(path)) return manifest;
    json root;
    try {
        root = json::parse(read_text_file(path));
        manifest.artifact_version = root.value("artifact_version", 1);
        manifest.config_hash = root.value("config_hash", std::string{});
        manifest.seed = root.value("seed", std::uint64_t{0});
        manifest.deterministic = root.value("deterministic", false);
        if (auto it = root.find("fingerprints"); it != root.end()) {
            for (const auto& [key, value] : it->items())
                manifest.fingerprints[key] = value.get<std::string>();
        }
        if (auto it = root.find("stages"); it != root.end()) {
            for (const auto& [key, value] : it->items()) {
                StageRecord record;
                record.wall_ms = value.value("wall_ms", std::uint64_t{0});
                if (auto files = value.find("outputs"); files != value.end()) {
                    for (const auto& f : *files)
                        record.outputs.push_back(f.get<std::string>());
                }
                manifest.stages[key] = std::move(record);
            }
        }
    } catch (const json::exception& e) {
        throw DomainError("corrupt manifest " + path.string() + ": " + e.what());
    }
    return manifest;
}

void save_manifest(const RunManifest& manifest, const fs::path& out_dir) {
    json root;
    root["artifact_version"] = manifest.artifact_version;
    root["config_hash"] = manifest.config_hash;
    root["seed"] = manifest.seed;
    root["deterministic"] = manifest.deterministic;
    root["fingerprints"] = json::object();
    for (const auto& [key, value] : manifest.fingerprints)
        root["fingerprints"][key] = value;
    root["stages"] = json::object();
    for (const auto& [key, record] : manifest.stages) {
        root["stages"][key] = {{"wall_ms", record.wall_ms},
                               {"outputs", record.outputs}};
    }
    write_text_file_atomic(out_dir / kManifestName, root.dump(2) + "\n");
}

std::string rules_csv_name(UserId target) {
    return "rules_" + std::to_string(target) + ".csv";
}
std::string tree_dot_name(UserId target) {
    return "tree_" + std::to_string(target) + ".dot";
}
std::string selection_name(UserId target) {
    return "selection_" + std::to_string(target) + ".json";
}
std::string graph_nodes_name(UserId target) {
    return "graph_" + std::to_string(target) + "_nodes.csv";
}
std::string graph_edges_name(UserId target) {
    return "graph_" + std::to_string(target) + "_edges.tsv";
}
std::string corpus_name(UserId target) {
    return "corpus_" + std::to_string(target) + ".txt";
}
std::string model_name(UserId target) {
    return "model_" + std::to_string(target) + ".txt";
}
std::string recommendations_name(UserId target) {
    return "recommendations_" + std::to_string(target) + ".csv";
}

void cmd_ingest(const PipelineContext& ctx) {
    if (ctx.config.data.ratings.empty())
        throw ConfigError("config is missing data.ratings");
    if (ctx.config.data.movies.empty())
        throw ConfigError("config is missing data.movies");

    fs::create_directories(ctx.out_dir);
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);

    std::map<std::string, std::string> fingerprints;
    fingerprints["ratings"] = to_hex(hash_file(ctx.config.data.ratings));
    fingerprints["movies"] = to_hex(hash_file(ctx.config.data.movies));
    if (!ctx.config.data.users.empty())
        fingerprints["users"] = to_hex(hash_file(ctx.config.data.users));

    if (stage_cached(manifest, "ingest", ctx.out_dir) &&
        manifest.fingerprints == fingerprints) {
        std::cerr << "[ingest] cached\n";
        return;
    }

    StageTimer timer;
    RatingTable ratings = parse_ratings(ctx.config.data.ratings);
    if (ctx.config.sparsify_fraction < 1.0) {
        ratings = sparsify(ratings, ctx.config.sparsify_fraction, ctx.config.seed);
    }
    UserProfileTable profiles = ctx.config.data.users.empty()
                                    ? UserProfileTable{}
                                    : parse_users(ctx.config.data.users);
    MovieCatalog movies = parse_movies(ctx.config.data.movies);

    write_text_file_atomic(ctx.out_dir / "ratings.csv",
                           render([&](std::ostream& o) { write_ratings_csv(ratings, o); }));
    write_text_file_atomic(ctx.out_dir / "users.csv",
                           render([&](std::ostream& o) { write_users_csv(profiles, o); }));
    write_text_file_atomic(ctx.out_dir / "movies.csv",
                           render([&](std::ostream& o) { write_movies_csv(movies, o); }));

    manifest.fingerprints = std::move(fingerprints);
    record_stage(manifest, "ingest", timer, {"ratings.csv", "users.csv", "movies.csv"},
                 ctx.out_dir);
}

void cmd_rules(const PipelineContext& ctx, UserId target) {
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);
    std::string key = "rules:" + std::to_string(target);
    if (stage_cached(manifest, key, ctx.out_dir)) {
        std::cerr << "[rules] cached for target " << target << "\n";
        return;
    }

    StageTimer timer;
    LoadedTables tables = load_ingested(ctx);
    DerivedTables derived = derive_tables(tables, ctx.config);
    DatasetView view{&tables.ratings, &tables.profiles, &tables.movies,
                     &derived.interests, &derived.popularity};
    EnsembleOptions options{ctx.config.min_shared, ctx.config.selection_means_rated};
    auto rules = enumerate_fuzzy_rules(target, view, options);
    std::vector<std::string> warnings;
    EnsembleSelection selection = select_ensemble_with_fallback(target, rules, &warnings);
    for (const std::string& w : warnings) std::cerr << "[rules] " << w << "\n";

    write_text_file_atomic(ctx.out_dir / rules_csv_name(target),
                           render([&](std::ostream& o) { export_rules_csv(rules, o); }));
    write_text_file_atomic(
        ctx.out_dir / tree_dot_name(target), render([&](std::ostream& o) {
            export_rule_tree(rules, selection, target, tables.profiles, o);
        }));

    json sel;
    sel["target"] = target;
    sel["rows"] = json::array();
    for (const FuzzyRule& r : selection.top3) sel["rows"].push_back(r.row_index);
    write_text_file_atomic(ctx.out_dir / selection_name(target), sel.dump(2) + "\n");

    record_stage(manifest, key, timer,
                 {rules_csv_name(target), tree_dot_name(target), selection_name(target)},
                 ctx.out_dir);
}

void cmd_graph(const PipelineContext& ctx, UserId target) {
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);
    std::string key = "graph:" + std::to_string(target);
    if (stage_cached(manifest, key, ctx.out_dir)) {
        std::cerr << "[graph] cached for target " << target << "\n";
        return;
    }

    require_artifacts(ctx.out_dir, {rules_csv_name(target), selection_name(target)},
                      "rules");
    StageTimer timer;
    LoadedTables tables = load_ingested(ctx);
    DerivedTables derived = derive_tables(tables, ctx.config);
    DatasetView view{&tables.ratings, &tables.profiles, &tables.movies,
                     &derived.interests, &derived.popularity};

    // The selection artifact pins the chosen rows; members are recomputed
    // deterministically from the ingested tables.
    std::vector<int> rows;
    try {
        json sel = json::parse(read_text_file(ctx.out_dir / selection_name(target)));
        for (const auto& r : sel.at("rows")) rows.push_back(r.get<int>());
    } catch (const json::exception& e) {
        throw DomainError("corrupt selection artifact: " + std::string(e.what()));
    }
    EnsembleOptions options{ctx.config.min_shared, ctx.config.selection_means_rated};
    auto rules = enumerate_fuzzy_rules(target, view, options);
    EnsembleSelection selection;
    selection.target = target;
    for (int row : rows) {
        if (row < 1 || row > static_cast<int>(rules.size()))
            throw DomainError("selection row " + std::to_string(row) + " out of range");
        selection.top3.push_back(rules[static_cast<std::size_t>(row - 1)]);
    }

    HeteroGraph graph =
        build_hetero_graph(target, selection, view, graph_options(ctx.config));
    write_text_file_atomic(ctx.out_dir / graph_nodes_name(target),
                           render([&](std::ostream& o) { write_node_table(graph, o); }));
    write_text_file_atomic(ctx.out_dir / graph_edges_name(target),
                           render([&](std::ostream& o) { write_edge_list(graph, o); }));

    record_stage(manifest, key, timer,
                 {graph_nodes_name(target), graph_edges_name(target)}, ctx.out_dir);
}

void cmd_embed(const PipelineContext& ctx, UserId target) {
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);
    std::string key = "embed:" + std::to_string(target);
    if (stage_cached(manifest, key, ctx.out_dir)) {
        std::cerr << "[embed] cached for target " << target << "\n";
        return;
    }

    require_artifacts(ctx.out_dir, {graph_nodes_name(target), graph_edges_name(target)},
                      "graph");
    StageTimer timer;
    std::ifstream nodes(ctx.out_dir / graph_nodes_name(target));
    std::ifstream edges(ctx.out_dir / graph_edges_name(target));
    HeteroGraph graph = load_graph(nodes, edges);

    WalkCorpus corpus = generate_walks(graph, ctx.config.walk,
                                       derive_seed(ctx.config.seed, 0xca11, target));
    write_text_file_atomic(ctx.out_dir / corpus_name(target),
                           render([&](std::ostream& o) { write_corpus(corpus, o); }));

    TrainConfig train_config = ctx.config.train;
    train_config.seed = derive_seed(ctx.config.seed, 0x73a1, target);
    EmbeddingModel model =
        train(corpus, graph.node_count(), train_config, ctx.config.walk.window);
    write_text_file_atomic(ctx.out_dir / model_name(target),
                           render([&](std::ostream& o) { write_model(model, o); }));

    record_stage(manifest, key, timer, {corpus_name(target), model_name(target)},
                 ctx.out_dir);
}

void cmd_recommend(const PipelineContext& ctx, UserId target, int k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);
    std::string key = "recommend:" + std::to_string(target);
    if (stage_cached(manifest, key, ctx.out_dir)) {
        std::cerr << "[recommend] cached for target " << target << "\n";
        return;
    }

    require_artifacts(ctx.out_dir, {model_name(target)}, "embed");
    require_artifacts(ctx.out_dir, {graph_nodes_name(target), graph_edges_name(target)},
                      "graph");
    StageTimer timer;
    LoadedTables tables = load_ingested(ctx);
    std::ifstream nodes(ctx.out_dir / graph_nodes_name(target));
    std::ifstream edges(ctx.out_dir / graph_edges_name(target));
    HeteroGraph graph = load_graph(nodes, edges);
    std::ifstream model_in(ctx.out_dir / model_name(target));
    EmbeddingModel model = load_model(model_in);

    RecommendationList list = recommend_top_k(target, k, graph, model, tables.ratings,
                                              ctx.config.aggregate);
    write_text_file_atomic(
        ctx.out_dir / recommendations_name(target),
        render([&](std::ostream& o) { write_recommendations_csv(list, o); }));

    record_stage(manifest, key, timer, {recommendations_name(target)}, ctx.out_dir);
}

void cmd_evaluate(const PipelineContext& ctx) {
    std::string hash = config_hash(ctx.config);
    RunManifest manifest = open_manifest(ctx, hash);
    if (stage_cached(manifest, "evaluate", ctx.out_dir)) {
        std::cerr << "[evaluate] cached\n";
        return;
    }

    StageTimer timer;
    LoadedTables tables = load_ingested(ctx);
    EvalOptions options = eval_options_from(ctx.config);
    if (options.user_ranges.empty()) {
        options.user_ranges.push_back(tables.ratings.user_ids().size());
    }
    EvaluationResult result =
        evaluate(tables.ratings, tables.profiles, tables.movies, options);

    std::vector<std::string> outputs;
    for (const std::string& metric : metric_names()) {
        std::string name = "report_" + metric + ".csv";
        write_text_file_atomic(
            ctx.out_dir / name,
            render([&](std::ostream& o) { write_metric_csv(result, metric, o); }));
        outputs.push_back(name);
    }
    write_text_file_atomic(ctx.out_dir / "report.txt",
                           render([&](std::ostream& o) { write_report_text(result, o); }));
    outputs.push_back("report.txt");

    record_stage(manifest, "evaluate", timer, std::move(outputs), ctx.out_dir);
}

}  // namespace utv
