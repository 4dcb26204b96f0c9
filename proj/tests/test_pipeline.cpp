#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>

#include "synthdata.hpp"
#include "testutil.hpp"
#include "utv/dataset.hpp"
#include "utv/errors.hpp"
#include "utv/pipeline.hpp"

using namespace utv;
namespace fs = std::filesystem;

namespace {

// Write a small but non-degenerate dataset and a config pointing at it.
PipelineConfig fixture_config(const fs::path& dir) {
    Rng rng(2024);
    testutil::ToySpec spec;
    spec.users = 15;
    spec.movies = 24;
    spec.min_ratings = 5;
    spec.max_ratings = 10;
    testutil::Tables t = testutil::random_toy(rng, spec);

    std::ostringstream ratings, users, movies;
    write_ratings_csv(t.ratings, ratings);
    write_users_csv(t.profiles, users);
    write_movies_csv(t.movies, movies);
    testutil::write_file(dir / "ratings.csv", ratings.str());
    testutil::write_file(dir / "users.csv", users.str());
    testutil::write_file(dir / "movies.csv", movies.str());

    PipelineConfig config;
    config.data.ratings = (dir / "ratings.csv").string();
    config.data.users = (dir / "users.csv").string();
    config.data.movies = (dir / "movies.csv").string();
    config.seed = 11;
    config.walk = {1.0, 1.0, 6, 2, 2};
    config.train = {8, 2, 1, 0.1, 0.01, 0, TrainMode::NEGATIVE_SAMPLING};
    config.k = 3;
    config.split = {0.7, 2, 0};
    config.user_ranges = {10};
    config.eval_targets = 4;
    return config;
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        files[fs::relative(entry.path(), dir).string()] =
            testutil::read_file(entry.path());
    }
    return files;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(UTV_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return (status >> 8) & 0xff;
}

}  // namespace

TEST_CASE("artifact names") {
    CHECK(rules_csv_name(7) == "rules_7.csv");
    CHECK(tree_dot_name(7) == "tree_7.dot");
    CHECK(selection_name(7) == "selection_7.json");
    CHECK(graph_nodes_name(12) == "graph_12_nodes.csv");
    CHECK(graph_edges_name(12) == "graph_12_edges.tsv");
    CHECK(corpus_name(3) == "corpus_3.txt");
    CHECK(model_name(3) == "model_3.txt");
    CHECK(recommendations_name(3) == "recommendations_3.csv");
}

TEST_CASE("manifest round trip") {
    testutil::TempDir dir;
    RunManifest m;
    m.config_hash = "deadbeef01234567";
    m.seed = 99;
    m.deterministic = true;
    m.fingerprints["ratings"] = "aa11";
    m.stages["ingest"] = {120, {"ratings.csv", "users.csv"}};
    m.stages["rules:7"] = {5, {"rules_7.csv"}};
    save_manifest(m, dir.path());

    RunManifest back = load_manifest(dir.path());
    CHECK(back.config_hash == m.config_hash);
    CHECK(back.seed == 99);
    CHECK(back.deterministic);
    CHECK(back.fingerprints == m.fingerprints);
    REQUIRE(back.stages.size() == 2);
    CHECK(back.stages.at("ingest").wall_ms == 120);
    CHECK(back.stages.at("ingest").outputs ==
          std::vector<std::string>{"ratings.csv", "users.csv"});
    CHECK(back.stages.at("rules:7").outputs == std::vector<std::string>{"rules_7.csv"});

    // saving the loaded copy reproduces the bytes
    testutil::TempDir second;
    save_manifest(back, second.path());
    CHECK(testutil::read_file(dir.path() / "manifest.json") ==
          testutil::read_file(second.path() / "manifest.json"));

    testutil::TempDir empty;
    RunManifest fresh = load_manifest(empty.path());
    CHECK(fresh.config_hash.empty());
    CHECK(fresh.stages.empty());

    testutil::write_file(empty.path() / "manifest.json", "{broken");
    CHECK_THROWS_AS(load_manifest(empty.path()), DomainError);
}

TEST_CASE("stages demand their predecessors") {
    testutil::TempDir dir;
    PipelineConfig config = fixture_config(dir.path());
    PipelineContext ctx{config, dir.path() / "out", false};
    fs::create_directories(ctx.out_dir);

    CHECK_THROWS_AS(cmd_rules(ctx, 1), StageOrderError);
    CHECK_THROWS_AS(cmd_evaluate(ctx), StageOrderError);
    cmd_ingest(ctx);
    CHECK_THROWS_AS(cmd_graph(ctx, 1), StageOrderError);
    cmd_rules(ctx, 1);
    CHECK_THROWS_AS(cmd_embed(ctx, 1), StageOrderError);
    cmd_graph(ctx, 1);
    CHECK_THROWS_AS(cmd_recommend(ctx, 1, 3), StageOrderError);
    cmd_embed(ctx, 1);
    cmd_recommend(ctx, 1, 3);

    for (const char* name : {"ratings.csv", "users.csv", "movies.csv", "rules_1.csv",
                             "tree_1.dot", "selection_1.json", "graph_1_nodes.csv",
                             "graph_1_edges.tsv", "corpus_1.txt", "model_1.txt",
                             "recommendations_1.csv", "manifest.json"}) {
        CHECK(fs::exists(ctx.out_dir / name));
    }

    std::string rec = testutil::read_file(ctx.out_dir / "recommendations_1.csv");
    CHECK(rec.rfind("user_id,rank,movie_id,score,best_component\n", 0) == 0);
    CHECK(rec.find("1,1,") != std::string::npos);
}

TEST_CASE("stage results are cached until the config changes") {
    testutil::TempDir dir;
    PipelineConfig config = fixture_config(dir.path());
    PipelineContext ctx{config, dir.path() / "out", false};
    cmd_ingest(ctx);
    cmd_rules(ctx, 1);

    // A cached stage leaves existing artifacts untouched.
    testutil::write_file(ctx.out_dir / "rules_1.csv", "SENTINEL");
    cmd_rules(ctx, 1);
    CHECK(testutil::read_file(ctx.out_dir / "rules_1.csv") == "SENTINEL");

    // Deleting one output forces the stage to run again.
    fs::remove(ctx.out_dir / "tree_1.dot");
    cmd_rules(ctx, 1);
    CHECK(fs::exists(ctx.out_dir / "tree_1.dot"));
    CHECK(testutil::read_file(ctx.out_dir / "rules_1.csv") != "SENTINEL");

    // A config change invalidates the whole manifest.
    testutil::write_file(ctx.out_dir / "rules_1.csv", "SENTINEL");
    PipelineContext changed = ctx;
    changed.config.min_shared = 2;
    cmd_ingest(changed);
    cmd_rules(changed, 1);
    CHECK(testutil::read_file(ctx.out_dir / "rules_1.csv") != "SENTINEL");
}

TEST_CASE("deterministic reruns are byte identical") {
    testutil::TempDir dir;
    PipelineConfig config = fixture_config(dir.path());

    auto run_all = [&](const fs::path& out) {
        PipelineContext ctx{config, out, true};
        cmd_ingest(ctx);
        cmd_rules(ctx, 1);
        cmd_graph(ctx, 1);
        cmd_embed(ctx, 1);
        cmd_recommend(ctx, 1, 3);
    };
    run_all(dir.path() / "a");
    run_all(dir.path() / "b");
    auto a = snapshot_dir(dir.path() / "a");
    auto b = snapshot_dir(dir.path() / "b");
    CHECK(a == b);
    CHECK(a.size() >= 12);
}

TEST_CASE("evaluate writes per-metric reports") {
    testutil::TempDir dir;
    PipelineConfig config = fixture_config(dir.path());
    PipelineContext ctx{config, dir.path() / "out", false};
    cmd_ingest(ctx);
    cmd_evaluate(ctx);

    for (const std::string& metric : metric_names()) {
        fs::path path = ctx.out_dir / ("report_" + metric + ".csv");
        REQUIRE(fs::exists(path));
        std::string text = testutil::read_file(path);
        CHECK(text.rfind("method,10,AVG\n", 0) == 0);
        CHECK(text.find("UTV,") != std::string::npos);
        CHECK(text.find("POPULARITY,") != std::string::npos);
        CHECK(text.find("USER_CF,") != std::string::npos);
    }
    CHECK(fs::exists(ctx.out_dir / "report.txt"));
}

TEST_CASE("cli exit codes") {
    testutil::TempDir dir;
    PipelineConfig config = fixture_config(dir.path());
    fs::path cfg = dir.path() / "config.json";
    testutil::write_file(cfg, serialize_config(config));
    std::string out = (dir.path() / "out").string();

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("ingest --config " + cfg.string() + " --out " + out) == 0);
    CHECK(fs::exists(dir.path() / "out" / "ratings.csv"));
    CHECK(run_cli("rules --config " + cfg.string() + " --out " + out + " --target 1") == 0);
    CHECK(fs::exists(dir.path() / "out" / "rules_1.csv"));

    // config problems
    CHECK(run_cli("ingest --config " + (dir.path() / "missing.json").string()) == 1);
    CHECK(run_cli("ingest --config " + cfg.string() + " --seed -4 --out " + out) == 1);
    fs::path badcfg = dir.path() / "bad.json";
    testutil::write_file(badcfg, "{\"bogus\": 1}\n");
    CHECK(run_cli("ingest --config " + badcfg.string()) == 1);
    CHECK(run_cli("--config " + cfg.string() + " frobnicate") == 1);

    // stage order
    std::string fresh = (dir.path() / "fresh").string();
    CHECK(run_cli("rules --config " + cfg.string() + " --out " + fresh + " --target 1") == 2);

    // data problems
    PipelineConfig gone = config;
    gone.data.ratings = (dir.path() / "absent.csv").string();
    fs::path gonecfg = dir.path() / "gone.json";
    testutil::write_file(gonecfg, serialize_config(gone));
    CHECK(run_cli("ingest --config " + gonecfg.string() + " --out " +
                  (dir.path() / "gout").string()) == 3);
}

TEST_CASE("golden artifacts for a pinned fixture") {
    fs::path fixture = fs::path(UTV_TEST_SOURCE_DIR) / "fixtures" / "ml50";
    fs::path golden = fs::path(UTV_TEST_SOURCE_DIR) / "golden";
    const bool regen = std::getenv("UTV_REGEN_GOLDEN") != nullptr;

    if (regen) {
        fs::create_directories(fixture);
        fs::create_directories(golden);
        testutil::SynthSpec spec;
        spec.users = 50;
        spec.movies = 60;
        spec.min_ratings = 16;
        spec.max_ratings = 26;
        spec.seed = 771100;
        testutil::write_synthetic_ml(fixture, spec);
    }
    REQUIRE(fs::exists(fixture / "ratings.dat"));

    PipelineConfig config;
    config.data.ratings = (fixture / "ratings.dat").string();
    config.data.users = (fixture / "users.dat").string();
    config.data.movies = (fixture / "movies.dat").string();
    config.seed = 1234;
    config.walk = {1.0, 1.0, 10, 3, 3};
    config.train = {16, 4, 2, 0.05, 0.005, 0, TrainMode::NEGATIVE_SAMPLING};
    config.k = 10;

    testutil::TempDir dir;
    PipelineContext ctx{config, dir.path() / "out", true};
    const UserId target = 7;
    cmd_ingest(ctx);
    cmd_rules(ctx, target);
    cmd_graph(ctx, target);
    cmd_embed(ctx, target);
    cmd_recommend(ctx, target, config.k);

    const char* names[] = {"rules_7.csv", "tree_7.dot", "recommendations_7.csv"};
    for (const char* name : names) {
        fs::path produced = ctx.out_dir / name;
        REQUIRE(fs::exists(produced));
        if (regen) {
            testutil::write_file(golden / name, testutil::read_file(produced));
        }
        REQUIRE(fs::exists(golden / name));
        CHECK(testutil::read_file(produced) == testutil::read_file(golden / name));
    }
}
