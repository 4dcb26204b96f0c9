#include "utv/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <unordered_map>

#include "utv/errors.hpp"

namespace utv {
namespace {

constexpr NodeType component_node_type(UtvComponent c) {
    switch (c) {
        case UtvComponent::SF_SFS: return NodeType::SF;
        case UtvComponent::SMPF_SFS: return NodeType::SMPF;
        default: return NodeType::SMPSF;
    }
}

}  // namespace

const char* utv_component_label(UtvComponent c) {
    switch (c) {
        case UtvComponent::SF_SFS: return "SF&SFS";
        case UtvComponent::SMPF_SFS: return "SMPF&SFS";
        default: return "SMPSF&SFS";
    }
}

bool Utv::any_present() const {
    return std::any_of(components.begin(), components.end(),
                       [](const auto& c) { return c.has_value(); });
}

double cosine(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (!(na > 0.0) || !(nb > 0.0)) {
        throw NumericError("cosine similarity of a zero vector is undefined");
    }
    double value = dot / (std::sqrt(na) * std::sqrt(nb));
    if (!std::isfinite(value)) throw NumericError("non-finite cosine similarity");
    return value;
}

Utv build_utv(UserId target, const HeteroGraph& graph, const EmbeddingModel& model) {
    Utv utv;
    utv.user_id = target;
    std::size_t d = model.dim();

    for (UtvComponent c : kAllUtvComponents) {
        NodeType want = component_node_type(c);
        std::vector<double> sum(d, 0.0);
        std::size_t count = 0;
        for (const KGNode& n : graph.nodes()) {
            if (n.subgraph != SubgraphId::TARGET || n.node_type != want) continue;
            bool linked_to_sfs = false;
            for (NodeId peer : graph.neighbors(n.node_id)) {
                if (graph.node(peer).node_type == NodeType::SFS) {
                    linked_to_sfs = true;
                    break;
                }
            }
            if (!linked_to_sfs) continue;
            auto row = model.input(n.node_id);
            for (std::size_t k = 0; k < d; ++k) sum[k] += row[k];
            ++count;
        }
        if (count > 0) {
            for (double& v : sum) v /= static_cast<double>(count);
            utv.components[static_cast<int>(c)] = std::move(sum);
        }
    }

    if (!utv.any_present()) {
        throw DomainError("user " + std::to_string(target) +
                          " has no linked nodes to form a triple vector");
    }
    return utv;
}

std::vector<Candidate> candidate_set(UserId target, const HeteroGraph& graph,
                                     const RatingTable& ratings) {
    std::vector<MovieId> rated = ratings.rated_movies(target);
    std::unordered_map<MovieId, NodeId> best;
    for (const KGNode& n : graph.nodes()) {
        if (n.subgraph == SubgraphId::TARGET) continue;
        if (std::binary_search(rated.begin(), rated.end(), n.movie_id)) continue;
        auto [it, inserted] = best.try_emplace(n.movie_id, n.node_id);
        if (inserted) continue;
        std::size_t cur = graph.degree(it->second);
        std::size_t alt = graph.degree(n.node_id);
        if (alt > cur || (alt == cur && n.node_id < it->second)) it->second = n.node_id;
    }
    std::vector<Candidate> out;
    out.reserve(best.size());
    for (const auto& [movie, node] : best) out.push_back({movie, node});
    std::sort(out.begin(), out.end(),
              [](const Candidate& a, const Candidate& b) { return a.movie_id < b.movie_id; });
    return out;
}

ComponentScore score_candidate(const Utv& utv, std::span<const double> embedding,
                               ScoreAggregate aggregate) {
    ComponentScore result;
    bool first = true;
    double sum = 0.0;
    std::size_t present = 0;
    for (UtvComponent c : kAllUtvComponents) {
        const auto& vec = utv.component(c);
        if (!vec) continue;
        double s = cosine(*vec, embedding);
        sum += s;
        ++present;
        if (first || s > result.score) {
            result.score = s;
            result.best = c;
            first = false;
        }
    }
    if (present == 0) throw DomainError("triple vector has no components");
    if (aggregate == ScoreAggregate::MEAN)
        result.score = sum / static_cast<double>(present);
    return result;
}

RecommendationList recommend_top_k(UserId target, int k, const HeteroGraph& graph,
                                   const EmbeddingModel& model, const RatingTable& ratings,
                                   ScoreAggregate aggregate) {
    if (k < 1) throw ConfigError("k must be >= 1");
    Utv utv = build_utv(target, graph, model);

    RecommendationList list;
    list.user_id = target;
    list.k = k;
    for (const Candidate& c : candidate_set(target, graph, ratings)) {
        ComponentScore s = score_candidate(utv, model.input(c.representative), aggregate);
        list.items.push_back({c.movie_id, s.score, utv_component_label(s.best)});
    }
    std::sort(list.items.begin(), list.items.end(),
              [](const RecommendationItem& a, const RecommendationItem& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.movie_id < b.movie_id;
              });
    if (list.items.size() > static_cast<std::size_t>(k))
        list.items.resize(static_cast<std::size_t>(k));
    return list;
}

void write_recommendations_csv(const RecommendationList& list, std::ostream& out) {
    out << "user_id,rank,movie_id,score,best_component\n";
    char buf[32];
    for (std::size_t i = 0; i < list.items.size(); ++i) {
        const RecommendationItem& item = list.items[i];
        std::snprintf(buf, sizeof(buf), "%.6f", item.score);
        out << list.user_id << ',' << i + 1 << ',' << item.movie_id << ',' << buf << ','
            << item.best_component << '\n';
    }
}

}  // namespace utv
