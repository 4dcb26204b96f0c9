#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "utv/hetero_graph.hpp"
#include "utv/types.hpp"

namespace utv {

struct WalkConfig {
    double p = 1.0;  // return parameter
    double q = 1.0;  // in-out parameter
    int walk_length = 80;
    int walks_per_node = 10;
    int window = 10;

    friend bool operator==(const WalkConfig&, const WalkConfig&) = default;
};

// Validates bounds, throws ConfigError.
void validate(const WalkConfig& config);

struct WalkCorpus {
    std::vector<std::vector<NodeId>> walks;
};

// Second-order transition probabilities out of cur, one entry per neighbor
// in ascending order. First step (no prev) is uniform; afterwards the
// unnormalized weight for neighbor x is 1/p when x == prev, 1 when x is
// adjacent to prev, 1/q otherwise. Throws DomainError when cur is isolated.
std::vector<std::pair<NodeId, double>> transition_distribution(
    const HeteroGraph& graph, double p, double q, std::optional<NodeId> prev,
    NodeId cur);

// walks_per_node walks from every node in ascending node order, each on an
// independent stream derived from (seed, node, walk_index). Walks truncate
// at isolated nodes.
WalkCorpus generate_walks(const HeteroGraph& graph, const WalkConfig& config,
                          std::uint64_t seed);

// Skip-gram pairs: for each walk position i, (walk[i], walk[j]) for every
// j != i within the window.
std::vector<std::pair<NodeId, NodeId>> neighborhood_pairs(const WalkCorpus& corpus,
                                                          int window);

// One walk per line, space-separated node ids.
void write_corpus(const WalkCorpus& corpus, std::ostream& out);
WalkCorpus load_corpus(std::istream& in);

}  // namespace utv
