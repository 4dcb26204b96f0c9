#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "utv/dataset.hpp"
#include "utv/embedding.hpp"
#include "utv/hetero_graph.hpp"
#include "utv/types.hpp"

namespace utv {

enum class UtvComponent : std::uint8_t { SF_SFS = 0, SMPF_SFS = 1, SMPSF_SFS = 2 };

inline constexpr std::array<UtvComponent, 3> kAllUtvComponents = {
    UtvComponent::SF_SFS, UtvComponent::SMPF_SFS, UtvComponent::SMPSF_SFS};

const char* utv_component_label(UtvComponent c);  // "SF&SFS" etc.

// The target user's three class-conditioned vectors; a component is absent
// when no qualifying node exists.
struct Utv {
    UserId user_id = 0;
    std::array<std::optional<std::vector<double>>, 3> components;

    const std::optional<std::vector<double>>& component(UtvComponent c) const {
        return components[static_cast<int>(c)];
    }
    bool any_present() const;
};

struct RecommendationItem {
    MovieId movie_id = 0;
    double score = 0.0;
    std::string best_component;
};

struct RecommendationList {
    UserId user_id = 0;
    int k = 0;
    std::vector<RecommendationItem> items;  // score descending
};

enum class ScoreAggregate : std::uint8_t { MAX, MEAN };

struct Candidate {
    MovieId movie_id = 0;
    NodeId representative = 0;
};

// Throws NumericError when either vector is zero or entries are non-finite.
double cosine(std::span<const double> a, std::span<const double> b);

// Component X = mean embedding of target-sub-graph type-X nodes that have at
// least one SFS neighbor. Throws DomainError when all three are absent.
Utv build_utv(UserId target, const HeteroGraph& graph, const EmbeddingModel& model);

// Movies appearing in sub-graphs S1..S3 that the target has not rated,
// each with its highest-degree node (ties to the lowest node id), ascending
// by movie_id.
std::vector<Candidate> candidate_set(UserId target, const HeteroGraph& graph,
                                     const RatingTable& ratings);

struct ComponentScore {
    double score = 0.0;
    UtvComponent best = UtvComponent::SF_SFS;
};

// Max (or mean) cosine over the present components; best is the argmax with
// ties resolved in component order.
ComponentScore score_candidate(const Utv& utv, std::span<const double> embedding,
                               ScoreAggregate aggregate = ScoreAggregate::MAX);

RecommendationList recommend_top_k(UserId target, int k, const HeteroGraph& graph,
                                   const EmbeddingModel& model, const RatingTable& ratings,
                                   ScoreAggregate aggregate = ScoreAggregate::MAX);

// CSV: user_id,rank,movie_id,score,best_component (rank 1-based).
void write_recommendations_csv(const RecommendationList& list, std::ostream& out);

}  // namespace utv
