#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "utv/embedding.hpp"
#include "utv/evaluation.hpp"
#include "utv/recommender.hpp"
#include "utv/walks.hpp"

namespace utv {

struct DataPaths {
    std::string ratings;
    std::string users;   // optional, empty = no demographics
    std::string movies;

    friend bool operator==(const DataPaths&, const DataPaths&) = default;
};

struct PipelineConfig {
    DataPaths data;
    std::uint64_t seed = 0;
    std::size_t min_shared = 1;
    std::size_t top_n_popular = 5;
    bool selection_means_rated = false;
    bool intra_subgraph_edges = false;
    std::size_t max_subgraph_movies = 0;
    double sparsify_fraction = 1.0;
    WalkConfig walk;
    TrainConfig train;
    int k = 10;
    int relevance_threshold = 5;
    int auc_threshold = 4;
    ScoreAggregate aggregate = ScoreAggregate::MAX;
    SplitSpec split;
    std::vector<std::size_t> user_ranges;
    std::size_t eval_targets = 0;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Strict JSON: unknown keys anywhere are a ConfigError, as are out-of-range
// values.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const PipelineConfig& config);
void validate_config(const PipelineConfig& config);

// FNV-1a over the canonical serialization, hex encoded.
std::string config_hash(const PipelineConfig& config);

const char* aggregate_name(ScoreAggregate aggregate);
ScoreAggregate parse_aggregate(std::string_view name);

EvalOptions eval_options_from(const PipelineConfig& config);

}  // namespace utv
