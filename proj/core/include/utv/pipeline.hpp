#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "utv/config.hpp"
#include "utv/types.hpp"

namespace utv {

struct StageRecord {
    std::uint64_t wall_ms = 0;
    std::vector<std::string> outputs;
};

struct RunManifest {
    int artifact_version = 1;
    std::string config_hash;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::map<std::string, std::string> fingerprints;  // input path -> hex hash
    std::map<std::string, StageRecord> stages;        // "ingest", "rules:7", ...
};

// Missing manifest loads as a default-constructed one.
RunManifest load_manifest(const std::filesystem::path& out_dir);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

struct PipelineContext {
    PipelineConfig config;
    std::filesystem::path out_dir;
    bool deterministic = false;
};

// Stage artifact names inside the output directory.
std::string rules_csv_name(UserId target);
std::string tree_dot_name(UserId target);
std::string selection_name(UserId target);
std::string graph_nodes_name(UserId target);
std::string graph_edges_name(UserId target);
std::string corpus_name(UserId target);
std::string model_name(UserId target);
std::string recommendations_name(UserId target);

// Each stage checks its predecessor's artifacts (StageOrderError when
// missing), skips work when this exact config already produced its outputs,
// writes outputs atomically, and records itself in the manifest.
void cmd_ingest(const PipelineContext& ctx);
void cmd_rules(const PipelineContext& ctx, UserId target);
void cmd_graph(const PipelineContext& ctx, UserId target);
void cmd_embed(const PipelineContext& ctx, UserId target);
void cmd_recommend(const PipelineContext& ctx, UserId target, int k);
void cmd_evaluate(const PipelineContext& ctx);

}  // namespace utv
