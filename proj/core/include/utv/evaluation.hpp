#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "utv/dataset.hpp"
#include "utv/embedding.hpp"
#include "utv/ensemble.hpp"
#include "utv/hetero_graph.hpp"
#include "utv/recommender.hpp"
#include "utv/types.hpp"
#include "utv/walks.hpp"

namespace utv {

struct SplitSpec {
    double train_fraction = 0.8;
    int repetitions = 10;
    std::uint64_t seed = 0;

    friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

void validate(const SplitSpec& spec);

// Per-user stratified split: each user's ratings are shuffled on a stream
// derived from (seed, repetition, user) and the first floor(n * fraction)
// (at least 1) go to train. Users with fewer than 2 ratings stay wholly in
// train.
std::pair<RatingTable, RatingTable> split(const RatingTable& ratings,
                                          const SplitSpec& spec, int repetition_index);

struct ConfusionCounts {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Sets are ascending movie id vectors. Throws DomainError when the
// recommended set leaves the universe.
ConfusionCounts confusion(const std::vector<MovieId>& recommended,
                          const std::vector<MovieId>& relevant,
                          const std::vector<MovieId>& universe);

// Zero-denominator cases yield 0 and set *undefined when provided.
double precision(const ConfusionCounts& c, bool* undefined = nullptr);
double recall(const ConfusionCounts& c, bool* undefined = nullptr);
double accuracy(const ConfusionCounts& c, bool* undefined = nullptr);
double f1(const ConfusionCounts& c, bool* undefined = nullptr);

struct RatingPredictor {
    double a = 0.0;  // slope
    double b = 0.0;  // intercept

    double predict(double similarity) const;  // clamped to [1, 5]
};

// Least-squares fit of rating = a * similarity + b; constant similarity
// degenerates to a = 0, b = mean rating. Throws DomainError on empty input.
RatingPredictor calibrate_predictor(const std::vector<std::pair<double, double>>& pairs);

// Root mean squared error over (predicted, actual) pairs, predictions
// clamped to [1, 5] first. Throws DomainError on empty input.
double rmse(const std::vector<std::pair<double, double>>& pairs);

// Rank-sum AUC with average ranks for ties; items are (score, is_positive).
// Throws DomainError unless both classes are represented.
double auc(const std::vector<std::pair<double, bool>>& items);

// Top-k unrated movies by train selection count (ties: higher mean rating,
// then lower movie id).
RecommendationList baseline_popularity(const RatingTable& train, UserId target, int k);

// Top-k by similarity-weighted neighbor votes over the nearest
// `neighbor_count` users by co-rating cosine; falls back to popularity when
// the target has no co-rating neighbor.
RecommendationList baseline_user_cf(const RatingTable& train, UserId target, int k,
                                    int neighbor_count = 20);

struct MetricsRow {
    std::size_t user_count = 0;
    double precision = 0.0;
    double recall = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double rmse = 0.0;
    double auc = 0.0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;  // one per user range
    MetricsRow avg;                // per-column mean of rows
};

struct MethodReport {
    std::string method;
    MetricsReport report;
};

struct EvalOptions {
    SplitSpec split;
    std::vector<std::size_t> user_ranges;  // nested prefixes of lowest user ids
    int k = 10;
    int relevance_threshold = 5;  // precision/recall positives
    int auc_threshold = 4;        // AUC positives
    std::size_t top_n_popular = 5;
    std::size_t eval_targets = 0;  // 0 = every eligible user, else a seeded sample
    EnsembleOptions ensemble;
    GraphOptions graph;
    WalkConfig walk;
    TrainConfig train;
    ScoreAggregate aggregate = ScoreAggregate::MAX;
};

struct EvaluationResult {
    std::vector<MethodReport> methods;  // UTV, POPULARITY, USER_CF
    std::size_t evaluated_users = 0;
    std::size_t skipped_users = 0;
};

// Full protocol: for each user range, take the lowest-N users, split per
// repetition, run the pipeline per sampled target on the train side, score
// the held-out items, and average metrics over repetitions. Rows follow
// user_ranges order; the AVG row closes each report.
EvaluationResult evaluate(const RatingTable& ratings, const UserProfileTable& profiles,
                          const MovieCatalog& movies, const EvalOptions& options);

// One CSV per metric: header "method,<range...>,AVG", one row per method,
// values with 4 decimals.
void write_metric_csv(const EvaluationResult& result, const std::string& metric,
                      std::ostream& out);
// All six metrics as an aligned text table.
void write_report_text(const EvaluationResult& result, std::ostream& out);

const std::vector<std::string>& metric_names();

}  // namespace utv
