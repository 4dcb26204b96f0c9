#include "utv/walks.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "utv/errors.hpp"
#include "utv/rng.hpp"

namespace utv {
namespace {

// Reusable scratch for one walk: neighbor weights plus a stamp array that
// marks prev's neighborhood, giving O(deg(prev) + deg(cur)) steps.
struct WalkScratch {
    std::vector<double> weights;
    std::vector<std::uint32_t> stamps;
    std::uint32_t token = 0;

    explicit WalkScratch(std::size_t nodes) : stamps(nodes, 0) {}

    void mark(const std::vector<NodeId>& neighborhood) {
        ++token;
        for (NodeId x : neighborhood) stamps[x] = token;
    }
    bool marked(NodeId x) const { return stamps[x] == token; }
};

NodeId sample_step(const HeteroGraph& graph, const WalkConfig& config,
                   std::optional<NodeId> prev, NodeId cur, WalkScratch& scratch,
                   Rng& rng) {
    const auto& neighbors = graph.neighbors(cur);
    scratch.weights.resize(neighbors.size());
    double total = 0.0;
    if (!prev) {
        std::fill(scratch.weights.begin(), scratch.weights.end(), 1.0);
        total = static_cast<double>(neighbors.size());
    } else {
        scratch.mark(graph.neighbors(*prev));
        for (std::size_t i = 0; i < neighbors.size(); ++i) {
            NodeId x = neighbors[i];
            double w = x == *prev ? 1.0 / config.p
                       : scratch.marked(x) ? 1.0
                                           : 1.0 / config.q;
            scratch.weights[i] = w;
            total += w;
        }
    }
    double r = rng.next_unit() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        acc += scratch.weights[i];
        if (r < acc) return neighbors[i];
    }
    return neighbors.back();
}

}  // namespace

void validate(const WalkConfig& config) {
    if (!(config.p > 0.0)) throw ConfigError("walk p must be > 0");
    if (!(config.q > 0.0)) throw ConfigError("walk q must be > 0");
    if (config.walk_length < 2) throw ConfigError("walk_length must be >= 2");
    if (config.walks_per_node < 1) throw ConfigError("walks_per_node must be >= 1");
    if (config.window < 1) throw ConfigError("window must be >= 1");
}

std::vector<std::pair<NodeId, double>> transition_distribution(
    const HeteroGraph& graph, double p, double q, std::optional<NodeId> prev,
    NodeId cur) {
    const auto& neighbors = graph.neighbors(cur);
    if (neighbors.empty()) {
        throw DomainError("node " + std::to_string(cur) + " has no neighbors");
    }
    std::vector<std::pair<NodeId, double>> out;
    out.reserve(neighbors.size());
    double total = 0.0;
    for (NodeId x : neighbors) {
        double w = 1.0;
        if (prev) {
            w = x == *prev ? 1.0 / p : graph.has_edge(x, *prev) ? 1.0 : 1.0 / q;
        }
        out.emplace_back(x, w);
        total += w;
    }
    for (auto& [x, w] : out) w /= total;
    return out;
}

WalkCorpus generate_walks(const HeteroGraph& graph, const WalkConfig& config,
                          std::uint64_t seed) {
    validate(config);
    if (graph.node_count() == 0) throw DomainError("cannot walk an empty graph");

    WalkCorpus corpus;
    corpus.walks.reserve(graph.node_count() * static_cast<std::size_t>(config.walks_per_node));
    WalkScratch scratch(graph.node_count());

    for (NodeId start = 0; start < graph.node_count(); ++start) {
        for (int w = 0; w < config.walks_per_node; ++w) {
            Rng rng(derive_seed(seed, start, static_cast<std::uint64_t>(w)));
            std::vector<NodeId> walk;
            walk.reserve(static_cast<std::size_t>(config.walk_length));
            walk.push_back(start);
            std::optional<NodeId> prev;
            NodeId cur = start;
            while (walk.size() < static_cast<std::size_t>(config.walk_length)) {
                if (graph.degree(cur) == 0) break;
                NodeId next = sample_step(graph, config, prev, cur, scratch, rng);
                walk.push_back(next);
                prev = cur;
                cur = next;
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

std::vector<std::pair<NodeId, NodeId>> neighborhood_pairs(const WalkCorpus& corpus,
                                                          int window) {
    if (window < 1) throw ConfigError("window must be >= 1");
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (const auto& walk : corpus.walks) {
        auto n = static_cast<std::ptrdiff_t>(walk.size());
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - window);
            std::ptrdiff_t hi = std::min(n - 1, i + window);
            for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                if (j != i) pairs.emplace_back(walk[i], walk[j]);
            }
        }
    }
    return pairs;
}

void write_corpus(const WalkCorpus& corpus, std::ostream& out) {
    for (const auto& walk : corpus.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i) out << ' ';
            out << walk[i];
        }
        out << '\n';
    }
}

WalkCorpus load_corpus(std::istream& in) {
    WalkCorpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<NodeId> walk;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        while (ptr < end) {
            if (*ptr == ' ') { ++ptr; continue; }
            NodeId id = 0;
            auto [next, ec] = std::from_chars(ptr, end, id);
            if (ec != std::errc{}) throw ParseError("malformed corpus line: " + line);
            walk.push_back(id);
            ptr = next;
        }
        if (!walk.empty()) corpus.walks.push_back(std::move(walk));
    }
    return corpus;
}

}  // namespace utv
