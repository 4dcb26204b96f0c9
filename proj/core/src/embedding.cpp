#include "utv/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "utv/errors.hpp"

namespace utv {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// Scores f(v) . f(u) for all v, with their max for stable exponentials.
struct SourceScores {
    std::vector<double> dots;
    double max_dot = 0.0;
    double z = 0.0;  // sum of exp(dot - max_dot)
};

SourceScores score_against_all(const EmbeddingModel& model, NodeId u) {
    SourceScores s;
    s.dots.resize(model.node_count());
    auto fu = model.input(u);
    for (NodeId v = 0; v < model.node_count(); ++v) {
        s.dots[v] = dot(model.input(v), fu);
        if (!std::isfinite(s.dots[v])) {
            throw NumericError("non-finite embedding score for node " + std::to_string(u));
        }
    }
    s.max_dot = *std::max_element(s.dots.begin(), s.dots.end());
    for (double d : s.dots) s.z += std::exp(d - s.max_dot);
    return s;
}

// Pair list grouped by source node.
struct GroupedPairs {
    std::vector<NodeId> sources;                   // distinct, ascending
    std::vector<std::vector<NodeId>> contexts;     // parallel to sources
};

GroupedPairs group_by_source(const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::vector<std::pair<NodeId, NodeId>> sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    GroupedPairs g;
    for (const auto& [u, n] : sorted) {
        if (g.sources.empty() || g.sources.back() != u) {
            g.sources.push_back(u);
            g.contexts.emplace_back();
        }
        g.contexts.back().push_back(n);
    }
    return g;
}

}  // namespace

const char* train_mode_name(TrainMode mode) {
    return mode == TrainMode::EXACT_SOFTMAX ? "EXACT_SOFTMAX" : "NEGATIVE_SAMPLING";
}

TrainMode parse_train_mode(std::string_view name) {
    if (name == "EXACT_SOFTMAX") return TrainMode::EXACT_SOFTMAX;
    if (name == "NEGATIVE_SAMPLING") return TrainMode::NEGATIVE_SAMPLING;
    throw ParseError("unknown train mode '" + std::string(name) + "'");
}

void validate(const TrainConfig& config) {
    if (config.dim < 2) throw ConfigError("embedding dim must be >= 2");
    if (config.negatives < 1) throw ConfigError("negatives must be >= 1");
    if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(config.lr_initial > 0.0)) throw ConfigError("lr_initial must be > 0");
    if (!(config.lr_final > 0.0)) throw ConfigError("lr_final must be > 0");
    if (config.lr_final > config.lr_initial)
        throw ConfigError("lr_final must not exceed lr_initial");
}

EmbeddingModel::EmbeddingModel(std::size_t node_count, std::size_t dim,
                               bool separate_context)
    : dim_(dim), input_(node_count * dim, 0.0) {
    if (separate_context) context_.assign(node_count * dim, 0.0);
}

bool EmbeddingModel::all_finite() const {
    auto finite = [](const std::vector<double>& m) {
        return std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); });
    };
    return finite(input_) && finite(context_);
}

EmbeddingModel init_model(std::size_t node_count, std::size_t dim, std::uint64_t seed,
                          bool separate_context) {
    EmbeddingModel model(node_count, dim, separate_context);
    Rng rng(derive_seed(seed, 0xe27b));
    double scale = 1.0 / static_cast<double>(dim);
    for (NodeId id = 0; id < node_count; ++id) {
        for (double& v : model.input(id)) v = (rng.next_unit() - 0.5) * scale;
    }
    if (separate_context) {
        for (NodeId id = 0; id < node_count; ++id) {
            for (double& v : model.context(id)) v = (rng.next_unit() - 0.5) * scale;
        }
    }
    return model;
}

NoiseDistribution::NoiseDistribution(const WalkCorpus& corpus, std::size_t node_count) {
    std::vector<std::size_t> counts(node_count, 0);
    for (const auto& walk : corpus.walks) {
        for (NodeId id : walk) {
            if (id >= node_count) throw DomainError("corpus node id out of range");
            ++counts[id];
        }
    }
    cumulative_.resize(node_count);
    double acc = 0.0;
    for (std::size_t i = 0; i < node_count; ++i) {
        acc += std::pow(static_cast<double>(counts[i]), 0.75);
        cumulative_[i] = acc;
    }
    if (acc <= 0.0) throw DomainError("noise distribution over an empty corpus");
}

NodeId NoiseDistribution::sample(Rng& rng) const {
    double r = rng.next_unit() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    std::size_t idx = it == cumulative_.end() ? cumulative_.size() - 1
                                              : static_cast<std::size_t>(it - cumulative_.begin());
    while (idx > 0 && cumulative_[idx] == cumulative_[idx - 1]) --idx;
    return static_cast<NodeId>(idx);
}

double NoiseDistribution::probability(NodeId id) const {
    double lo = id == 0 ? 0.0 : cumulative_[id - 1];
    return (cumulative_[id] - lo) / cumulative_.back();
}

double softmax_probability(const EmbeddingModel& model, NodeId n, NodeId u) {
    SourceScores s = score_against_all(model, u);
    return std::exp(s.dots[n] - s.max_dot) / s.z;
}

double objective(const EmbeddingModel& model,
                 const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    GroupedPairs g = group_by_source(pairs);
    double total = 0.0;
    for (std::size_t i = 0; i < g.sources.size(); ++i) {
        SourceScores s = score_against_all(model, g.sources[i]);
        double log_z = s.max_dot + std::log(s.z);
        for (NodeId n : g.contexts[i]) total += s.dots[n] - log_z;
    }
    return total;
}

std::vector<double> objective_gradient(const EmbeddingModel& model,
                                       const std::vector<std::pair<NodeId, NodeId>>& pairs) {
    std::size_t d = model.dim();
    std::vector<double> grad(model.node_count() * d, 0.0);
    auto grad_row = [&](NodeId id) { return grad.data() + id * d; };

    GroupedPairs g = group_by_source(pairs);
    std::vector<double> expected(d);
    for (std::size_t i = 0; i < g.sources.size(); ++i) {
        NodeId u = g.sources[i];
        const auto& contexts = g.contexts[i];
        auto fu = model.input(u);
        SourceScores s = score_against_all(model, u);
        auto c_u = static_cast<double>(contexts.size());

        // E[f(v)] under p(. | u), for the source-side softmax term.
        std::fill(expected.begin(), expected.end(), 0.0);
        for (NodeId v = 0; v < model.node_count(); ++v) {
            double p = std::exp(s.dots[v] - s.max_dot) / s.z;
            auto fv = model.input(v);
            for (std::size_t k = 0; k < d; ++k) expected[k] += p * fv[k];
            double* gv = grad_row(v);
            for (std::size_t k = 0; k < d; ++k) gv[k] -= c_u * p * fu[k];
        }
        double* gu = grad_row(u);
        for (std::size_t k = 0; k < d; ++k) gu[k] -= c_u * expected[k];
        for (NodeId n : contexts) {
            auto fn = model.input(n);
            double* gn = grad_row(n);
            for (std::size_t k = 0; k < d; ++k) {
                gn[k] += fu[k];
                gu[k] += fn[k];
            }
        }
    }
    return grad;
}

namespace {

EmbeddingModel train_exact(const std::vector<std::pair<NodeId, NodeId>>& pairs,
                           std::size_t node_count, const TrainConfig& config) {
    EmbeddingModel model = init_model(node_count, static_cast<std::size_t>(config.dim),
                                      config.seed, false);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double t = config.epochs > 1
                       ? static_cast<double>(epoch) / static_cast<double>(config.epochs - 1)
                       : 0.0;
        double lr = config.lr_initial + (config.lr_final - config.lr_initial) * t;
        std::vector<double> grad = objective_gradient(model, pairs);
        for (NodeId id = 0; id < node_count; ++id) {
            auto row = model.input(id);
            const double* g = grad.data() + id * model.dim();
            for (std::size_t k = 0; k < model.dim(); ++k) row[k] += lr * g[k];
        }
        if (!model.all_finite()) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        }
    }
    return model;
}

EmbeddingModel train_negative_sampling(const WalkCorpus& corpus,
                                       const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                       std::size_t node_count, const TrainConfig& config) {
    EmbeddingModel model = init_model(node_count, static_cast<std::size_t>(config.dim),
                                      config.seed, true);
    NoiseDistribution noise(corpus, node_count);
    Rng rng(derive_seed(config.seed, 0x5e9));

    std::size_t d = model.dim();
    std::size_t total_updates = static_cast<std::size_t>(config.epochs) * pairs.size();
    double lr_span = config.lr_final - config.lr_initial;
    std::vector<double> grad_in(d);
    std::size_t t = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        for (std::size_t pi = 0; pi < pairs.size(); ++pi, ++t) {
            double frac = total_updates > 1
                              ? static_cast<double>(t) / static_cast<double>(total_updates - 1)
                              : 0.0;
            double lr = config.lr_initial + lr_span * frac;
            auto [u, n] = pairs[pi];
            auto in = model.input(u);
            std::fill(grad_in.begin(), grad_in.end(), 0.0);

            auto apply = [&](NodeId ctx_node, double label) {
                auto ctx = model.context(ctx_node);
                double s = dot(in, ctx);
                if (!std::isfinite(s)) {
                    throw NumericError("training diverged at epoch " +
                                       std::to_string(epoch) + " pair " +
                                       std::to_string(pi));
                }
                double g = lr * (label - stable_sigmoid(s));
                for (std::size_t k = 0; k < d; ++k) {
                    grad_in[k] += g * ctx[k];
                    ctx[k] += g * in[k];
                }
            };

            apply(n, 1.0);
            for (int k = 0; k < config.negatives; ++k) {
                NodeId v = noise.sample(rng);
                if (v == n) continue;
                apply(v, 0.0);
            }
            for (std::size_t k = 0; k < d; ++k) in[k] += grad_in[k];
        }
    }
    return model;
}

}  // namespace

EmbeddingModel train(const WalkCorpus& corpus, std::size_t node_count,
                     const TrainConfig& config, int window) {
    validate(config);
    if (corpus.walks.empty()) throw DomainError("training corpus is empty");
    auto pairs = neighborhood_pairs(corpus, window);
    if (config.epochs == 0 || pairs.empty()) {
        return init_model(node_count, static_cast<std::size_t>(config.dim), config.seed,
                          config.mode == TrainMode::NEGATIVE_SAMPLING);
    }
    return config.mode == TrainMode::EXACT_SOFTMAX
               ? train_exact(pairs, node_count, config)
               : train_negative_sampling(corpus, pairs, node_count, config);
}

void write_model(const EmbeddingModel& model, std::ostream& out) {
    out << model.node_count() << ' ' << model.dim() << '\n';
    char buf[64];
    for (NodeId id = 0; id < model.node_count(); ++id) {
        out << id;
        for (double v : model.input(id)) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ' ' << buf;
        }
        out << '\n';
    }
}

EmbeddingModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty model file");
    std::size_t n = 0, d = 0;
    {
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        auto r1 = std::from_chars(ptr, end, n);
        if (r1.ec != std::errc{} || r1.ptr == end || *r1.ptr != ' ')
            throw ParseError("malformed model header: " + line);
        auto r2 = std::from_chars(r1.ptr + 1, end, d);
        if (r2.ec != std::errc{}) throw ParseError("malformed model header: " + line);
    }
    if (d < 1) throw ParseError("model dimension must be positive");

    EmbeddingModel model(n, d, false);
    std::vector<char> seen(n, 0);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        NodeId id = 0;
        auto r = std::from_chars(ptr, end, id);
        if (r.ec != std::errc{} || id >= n) throw ParseError("bad model row: " + line);
        ptr = r.ptr;
        auto row = model.input(id);
        for (std::size_t k = 0; k < d; ++k) {
            while (ptr < end && *ptr == ' ') ++ptr;
            double v = 0.0;
            auto rv = std::from_chars(ptr, end, v);
            if (rv.ec != std::errc{}) throw ParseError("bad model row: " + line);
            row[k] = v;
            ptr = rv.ptr;
        }
        seen[id] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i]) throw ParseError("model file missing row for node " + std::to_string(i));
    }
    return model;
}

}  // namespace utv
