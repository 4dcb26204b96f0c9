#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "testutil.hpp"
#include "utv/config.hpp"
#include "utv/errors.hpp"

using namespace utv;

namespace {

PipelineConfig sample_config() {
    PipelineConfig c;
    c.data = {"data/ratings.dat", "data/users.dat", "data/movies.dat"};
    c.seed = 42;
    c.min_shared = 2;
    c.top_n_popular = 7;
    c.selection_means_rated = true;
    c.intra_subgraph_edges = true;
    c.max_subgraph_movies = 150;
    c.sparsify_fraction = 0.5;
    c.walk = {0.5, 2.0, 40, 5, 6};
    c.train = {64, 7, 3, 0.05, 0.001, 0, TrainMode::EXACT_SOFTMAX};
    c.k = 20;
    c.relevance_threshold = 4;
    c.auc_threshold = 3;
    c.aggregate = ScoreAggregate::MEAN;
    c.split = {0.75, 4, 0};
    c.user_ranges = {100, 200, 400};
    c.eval_targets = 50;
    return c;
}

}  // namespace

TEST_CASE("empty object parses to defaults") {
    PipelineConfig c = parse_config("{}");
    CHECK(c == PipelineConfig{});
    CHECK(c.seed == 0);
    CHECK(c.k == 10);
    CHECK(c.train.mode == TrainMode::NEGATIVE_SAMPLING);
    CHECK(c.aggregate == ScoreAggregate::MAX);
}

TEST_CASE("serialize then parse is the identity") {
    PipelineConfig c = sample_config();
    std::string text = serialize_config(c);
    PipelineConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);

    // defaults survive the loop too
    PipelineConfig d;
    CHECK(parse_config(serialize_config(d)) == d);
}

TEST_CASE("unknown keys are rejected everywhere") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"bogus": 1})"),
                         doctest::Contains("bogus"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"data": {"ratingz": "x"}})"),
                         doctest::Contains("data.ratingz"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"walk": {"P": 1.0}})"),
                         doctest::Contains("walk.P"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"train": {"dims": 8}})"),
                         doctest::Contains("train.dims"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(R"({"split": {"seed": 1}})"),
                         doctest::Contains("split.seed"), ConfigError);
}

TEST_CASE("malformed documents and type mismatches") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": "abc"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": 7})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"data": {"ratings": 5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"walk": {"p": "fast"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"walk": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"mode": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"aggregate": true})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"user_ranges": "many"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"user_ranges": [10, 2.5]})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"split": {"repetitions": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seed": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"min_shared": 1.2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"selection_means_rated": 1})"), ConfigError);
}

TEST_CASE("value bounds") {
    CHECK_THROWS_AS(parse_config(R"({"min_shared": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"top_n_popular": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sparsify_fraction": 0.0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"sparsify_fraction": 1.5})"), ConfigError);
    CHECK_NOTHROW(parse_config(R"({"sparsify_fraction": 1.0})"));
    CHECK_THROWS_AS(parse_config(R"({"k": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"relevance_threshold": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"relevance_threshold": 6})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"auc_threshold": 6})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"walk": {"p": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"walk": {"walk_length": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"dim": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"epochs": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"lr_initial": 0.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"split": {"train_fraction": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"split": {"repetitions": 0}})"), ConfigError);
}

TEST_CASE("train mode and aggregate tokens") {
    CHECK(parse_config(R"({"train": {"mode": "EXACT_SOFTMAX"}})").train.mode ==
          TrainMode::EXACT_SOFTMAX);
    CHECK(parse_config(R"({"train": {"mode": "NEGATIVE_SAMPLING"}})").train.mode ==
          TrainMode::NEGATIVE_SAMPLING);
    CHECK_THROWS_AS(parse_config(R"({"train": {"mode": "exact_softmax"}})"), ConfigError);

    CHECK(parse_config(R"({"aggregate": "max"})").aggregate == ScoreAggregate::MAX);
    CHECK(parse_config(R"({"aggregate": "mean"})").aggregate == ScoreAggregate::MEAN);
    CHECK_THROWS_AS(parse_config(R"({"aggregate": "MAX"})"), ConfigError);

    CHECK(aggregate_name(ScoreAggregate::MAX) == std::string("max"));
    CHECK(aggregate_name(ScoreAggregate::MEAN) == std::string("mean"));
    CHECK(parse_aggregate("max") == ScoreAggregate::MAX);
    CHECK_THROWS_AS(parse_aggregate("median"), ConfigError);
}

TEST_CASE("config hash is stable and field sensitive") {
    PipelineConfig a = sample_config();
    PipelineConfig b = sample_config();
    std::string ha = config_hash(a);
    CHECK(ha == config_hash(b));
    CHECK(ha.size() == 16);
    CHECK(ha.find_first_not_of("0123456789abcdef") == std::string::npos);

    b.seed = 43;
    CHECK(config_hash(b) != ha);
    b = sample_config();
    b.walk.window = 7;
    CHECK(config_hash(b) != ha);
    b = sample_config();
    b.data.ratings = "elsewhere.dat";
    CHECK(config_hash(b) != ha);
}

TEST_CASE("load_config reports missing files as config errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"), ConfigError);

    testutil::TempDir dir;
    auto path = dir.path() / "config.json";
    testutil::write_file(path, serialize_config(sample_config()));
    CHECK(load_config(path) == sample_config());
}

TEST_CASE("eval options derive from the pipeline config") {
    PipelineConfig c = sample_config();
    EvalOptions o = eval_options_from(c);
    CHECK(o.split.train_fraction == c.split.train_fraction);
    CHECK(o.split.repetitions == c.split.repetitions);
    CHECK(o.split.seed == c.seed);  // seed flows into the split stream
    CHECK(o.train.seed == c.seed);
    CHECK(o.user_ranges == c.user_ranges);
    CHECK(o.k == c.k);
    CHECK(o.relevance_threshold == c.relevance_threshold);
    CHECK(o.auc_threshold == c.auc_threshold);
    CHECK(o.top_n_popular == c.top_n_popular);
    CHECK(o.eval_targets == c.eval_targets);
    CHECK(o.ensemble.min_shared == c.min_shared);
    CHECK(o.ensemble.selection_means_rated == c.selection_means_rated);
    CHECK(o.graph.intra_subgraph_edges == c.intra_subgraph_edges);
    CHECK(o.graph.max_subgraph_movies == c.max_subgraph_movies);
    CHECK(o.walk == c.walk);
    CHECK(o.train.dim == c.train.dim);
    CHECK(o.train.mode == c.train.mode);
    CHECK(o.aggregate == c.aggregate);
}
