#include "utv/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "utv/errors.hpp"
#include "utv/rng.hpp"

namespace utv {
namespace {

double clamp_rating(double v) {
    return std::min(static_cast<double>(kMaxRating),
                    std::max(static_cast<double>(kMinRating), v));
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

void validate(const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must lie in (0, 1)");
    if (spec.repetitions < 1) throw ConfigError("repetitions must be >= 1");
}

std::pair<RatingTable, RatingTable> split(const RatingTable& ratings,
                                          const SplitSpec& spec, int repetition_index) {
    validate(spec);
    std::vector<RatingRecord> train, test;
    for (UserId user : ratings.user_ids()) {
        const auto* idx = ratings.find_user(user);
        std::vector<std::uint32_t> order(idx->begin(), idx->end());
        if (order.size() < 2) {
            for (std::uint32_t i : order) train.push_back(ratings.records()[i]);
            continue;
        }
        Rng rng(derive_seed(spec.seed, 0x517a1700u + static_cast<std::uint64_t>(repetition_index),
                            user));
        rng.shuffle(order);
        auto train_n = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(
                   static_cast<double>(order.size()) * spec.train_fraction)));
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < train_n ? train : test).push_back(ratings.records()[order[i]]);
        }
    }
    return {RatingTable::from_records(std::move(train)),
            RatingTable::from_records(std::move(test))};
}

ConfusionCounts confusion(const std::vector<MovieId>& recommended,
                          const std::vector<MovieId>& relevant,
                          const std::vector<MovieId>& universe) {
    for (MovieId m : recommended) {
        if (!std::binary_search(universe.begin(), universe.end(), m)) {
            throw DomainError("recommended movie " + std::to_string(m) +
                              " lies outside the evaluation universe");
        }
    }
    for (MovieId m : relevant) {
        if (!std::binary_search(universe.begin(), universe.end(), m)) {
            throw DomainError("relevant movie " + std::to_string(m) +
                              " lies outside the evaluation universe");
        }
    }
    std::vector<MovieId> overlap;
    std::set_intersection(recommended.begin(), recommended.end(), relevant.begin(),
                          relevant.end(), std::back_inserter(overlap));
    ConfusionCounts c;
    c.tp = overlap.size();
    c.fp = recommended.size() - c.tp;
    c.fn = relevant.size() - c.tp;
    c.tn = universe.size() - c.tp - c.fp - c.fn;
    return c;
}

namespace {

double ratio(std::size_t num, std::size_t den, bool* undefined) {
    if (den == 0) {
        if (undefined) *undefined = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double precision(const ConfusionCounts& c, bool* undefined) {
    return ratio(c.tp, c.tp + c.fp, undefined);
}

double recall(const ConfusionCounts& c, bool* undefined) {
    return ratio(c.tp, c.tp + c.fn, undefined);
}

double accuracy(const ConfusionCounts& c, bool* undefined) {
    return ratio(c.tp + c.tn, c.tp + c.fp + c.tn + c.fn, undefined);
}

double f1(const ConfusionCounts& c, bool* undefined) {
    double p = precision(c, nullptr);
    double r = recall(c, nullptr);
    if (p + r == 0.0) {
        if (undefined) *undefined = true;
        return 0.0;
    }
    return 2.0 * p * r / (p + r);
}

double RatingPredictor::predict(double similarity) const {
    return clamp_rating(a * similarity + b);
}

RatingPredictor calibrate_predictor(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw DomainError("cannot calibrate on an empty pair set");
    double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    RatingPredictor p;
    if (sxx <= 1e-12 * n * (1.0 + mx * mx)) {
        p.a = 0.0;
        p.b = my;
    } else {
        p.a = sxy / sxx;
        p.b = my - p.a * mx;
    }
    return p;
}

double rmse(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw DomainError("rmse over an empty pair set");
    double sum = 0.0;
    for (const auto& [predicted, actual] : pairs) {
        double err = clamp_rating(predicted) - actual;
        sum += err * err;
    }
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

double auc(const std::vector<std::pair<double, bool>>& items) {
    std::size_t positives = 0;
    for (const auto& [score, pos] : items) positives += pos ? 1 : 0;
    std::size_t negatives = items.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DomainError("AUC undefined without both positive and negative items");
    }

    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return items[a].first < items[b].first;
    });

    double positive_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && items[order[j]].first == items[order[i]].first) ++j;
        // 1-based ranks i+1 .. j averaged across the tie run
        double avg_rank = static_cast<double>(i + 1 + j) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (items[order[t]].second) positive_rank_sum += avg_rank;
        }
        i = j;
    }
    double m = static_cast<double>(positives);
    double n = static_cast<double>(negatives);
    return (positive_rank_sum - m * (m + 1.0) / 2.0) / (m * n);
}

namespace {

struct MovieStat {
    std::size_t count = 0;
    double rating_sum = 0.0;
};

std::unordered_map<MovieId, MovieStat> movie_stats(const RatingTable& train) {
    std::unordered_map<MovieId, MovieStat> stats;
    for (const RatingRecord& r : train.records()) {
        MovieStat& s = stats[r.movie_id];
        ++s.count;
        s.rating_sum += static_cast<double>(r.rating);
    }
    return stats;
}

std::vector<MovieId> popularity_order(const std::unordered_map<MovieId, MovieStat>& stats) {
    std::vector<MovieId> movies;
    movies.reserve(stats.size());
    for (const auto& [m, s] : stats) movies.push_back(m);
    std::sort(movies.begin(), movies.end(), [&](MovieId a, MovieId b) {
        const MovieStat& sa = stats.at(a);
        const MovieStat& sb = stats.at(b);
        if (sa.count != sb.count) return sa.count > sb.count;
        double ma = sa.rating_sum / static_cast<double>(sa.count);
        double mb = sb.rating_sum / static_cast<double>(sb.count);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    return movies;
}

struct CfNeighborhood {
    // (similarity, neighbor), strongest first
    std::vector<std::pair<double, UserId>> neighbors;
};

CfNeighborhood cf_neighborhood(const RatingTable& train, UserId target, int neighbor_count) {
    std::unordered_map<UserId, double> dots;
    const auto* tidx = train.find_user(target);
    if (!tidx) return {};
    for (std::uint32_t i : *tidx) {
        const RatingRecord& tr = train.records()[i];
        if (const auto* midx = train.find_movie(tr.movie_id)) {
            for (std::uint32_t j : *midx) {
                const RatingRecord& other = train.records()[j];
                if (other.user_id == target) continue;
                dots[other.user_id] +=
                    static_cast<double>(tr.rating) * static_cast<double>(other.rating);
            }
        }
    }
    if (dots.empty()) return {};

    auto norm = [&](UserId u) {
        double s = 0.0;
        for (std::uint32_t i : *train.find_user(u)) {
            double r = static_cast<double>(train.records()[i].rating);
            s += r * r;
        }
        return std::sqrt(s);
    };
    double target_norm = norm(target);

    CfNeighborhood hood;
    hood.neighbors.reserve(dots.size());
    for (const auto& [user, dot] : dots) {
        hood.neighbors.emplace_back(dot / (target_norm * norm(user)), user);
    }
    std::sort(hood.neighbors.begin(), hood.neighbors.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
              });
    if (hood.neighbors.size() > static_cast<std::size_t>(neighbor_count))
        hood.neighbors.resize(static_cast<std::size_t>(neighbor_count));
    return hood;
}

// Similarity-weighted vote per movie unrated by the target.
std::unordered_map<MovieId, double> cf_votes(const RatingTable& train, UserId target,
                                             const CfNeighborhood& hood) {
    std::vector<MovieId> rated = train.rated_movies(target);
    std::unordered_map<MovieId, double> votes;
    for (const auto& [sim, user] : hood.neighbors) {
        for (std::uint32_t i : *train.find_user(user)) {
            const RatingRecord& r = train.records()[i];
            if (std::binary_search(rated.begin(), rated.end(), r.movie_id)) continue;
            votes[r.movie_id] += sim * static_cast<double>(r.rating);
        }
    }
    return votes;
}

// Weighted-average rating prediction for one movie; nullopt when no neighbor
// rated it.
std::optional<double> cf_predict(const RatingTable& train, const CfNeighborhood& hood,
                                 MovieId movie) {
    double weight = 0.0, total = 0.0;
    for (const auto& [sim, user] : hood.neighbors) {
        if (auto r = train.rating_of(user, movie)) {
            weight += std::abs(sim);
            total += sim * static_cast<double>(*r);
        }
    }
    if (weight <= 0.0) return std::nullopt;
    return total / weight;
}

}  // namespace

RecommendationList baseline_popularity(const RatingTable& train, UserId target, int k) {
    if (k < 1) throw ConfigError("k must be >= 1");
    auto stats = movie_stats(train);
    auto order = popularity_order(stats);
    std::vector<MovieId> rated = train.rated_movies(target);

    RecommendationList list;
    list.user_id = target;
    list.k = k;
    for (MovieId m : order) {
        if (std::binary_search(rated.begin(), rated.end(), m)) continue;
        list.items.push_back({m, static_cast<double>(stats.at(m).count), "POP"});
        if (list.items.size() == static_cast<std::size_t>(k)) break;
    }
    return list;
}

RecommendationList baseline_user_cf(const RatingTable& train, UserId target, int k,
                                    int neighbor_count) {
    if (k < 1) throw ConfigError("k must be >= 1");
    if (neighbor_count < 1) throw ConfigError("neighbor_count must be >= 1");
    CfNeighborhood hood = cf_neighborhood(train, target, neighbor_count);
    if (hood.neighbors.empty()) return baseline_popularity(train, target, k);

    auto votes = cf_votes(train, target, hood);
    std::vector<std::pair<MovieId, double>> ranked(votes.begin(), votes.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    RecommendationList list;
    list.user_id = target;
    list.k = k;
    for (const auto& [movie, score] : ranked) {
        list.items.push_back({movie, score, "CF"});
        if (list.items.size() == static_cast<std::size_t>(k)) break;
    }
    return list;
}

namespace {

constexpr double kUnscoredSentinel = -2.0;  // below any cosine
constexpr int kMethodCount = 3;
constexpr const char* kMethodNames[kMethodCount] = {"UTV", "POPULARITY", "USER_CF"};

struct PendingPrediction {
    double similarity = 0.0;
    bool has_similarity = false;
    double actual = 0.0;
    double fallback = 0.0;  // predictor of last resort, already a rating
};

struct RepAccumulator {
    std::vector<double> precisions, recalls, accuracies, f1s, aucs;
    std::vector<std::pair<double, double>> calibration;  // (similarity, rating)
    std::vector<PendingPrediction> pending;
    std::vector<std::pair<double, double>> direct_predictions;  // (predicted, actual)

    void add_confusion(const ConfusionCounts& c) {
        precisions.push_back(precision(c));
        recalls.push_back(recall(c));
        accuracies.push_back(accuracy(c));
        f1s.push_back(f1(c));
    }
};

struct TestItem {
    MovieId movie_id = 0;
    Rating rating = 0;
};

std::vector<MovieId> item_ids(const std::vector<RecommendationItem>& items) {
    std::vector<MovieId> ids;
    ids.reserve(items.size());
    for (const auto& it : items) ids.push_back(it.movie_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

double user_train_mean(const RatingTable& train, UserId user) {
    const auto* idx = train.find_user(user);
    if (!idx || idx->empty()) return 3.0;
    double sum = 0.0;
    for (std::uint32_t i : *idx) sum += static_cast<double>(train.records()[i].rating);
    return sum / static_cast<double>(idx->size());
}

void add_auc_items(RepAccumulator& acc, const std::vector<std::pair<double, bool>>& items) {
    bool has_pos = false, has_neg = false;
    for (const auto& [s, p] : items) (p ? has_pos : has_neg) = true;
    if (has_pos && has_neg) acc.aucs.push_back(auc(items));
}

MetricsRow finish_rep(RepAccumulator& acc, std::size_t range_size, double global_mean) {
    MetricsRow row;
    row.user_count = range_size;
    row.precision = mean_of(acc.precisions);
    row.recall = mean_of(acc.recalls);
    row.accuracy = mean_of(acc.accuracies);
    row.f1 = mean_of(acc.f1s);
    row.auc = mean_of(acc.aucs);

    std::vector<std::pair<double, double>> pairs = acc.direct_predictions;
    if (!acc.pending.empty()) {
        RatingPredictor predictor;
        if (acc.calibration.empty()) {
            predictor.a = 0.0;
            predictor.b = global_mean;
        } else {
            predictor = calibrate_predictor(acc.calibration);
        }
        for (const PendingPrediction& p : acc.pending) {
            double pred = p.has_similarity ? predictor.predict(p.similarity)
                                           : clamp_rating(p.fallback);
            pairs.emplace_back(pred, p.actual);
        }
    }
    row.rmse = pairs.empty() ? 0.0 : rmse(pairs);
    return row;
}

}  // namespace

EvaluationResult evaluate(const RatingTable& ratings, const UserProfileTable& profiles,
                          const MovieCatalog& movies, const EvalOptions& options) {
    validate(options.split);
    validate(options.walk);
    validate(options.train);
    if (options.k < 1) throw ConfigError("k must be >= 1");
    if (options.user_ranges.empty()) throw ConfigError("user_ranges must not be empty");

    const std::vector<UserId>& all_users = ratings.user_ids();
    for (std::size_t range : options.user_ranges) {
        if (range == 0 || range > all_users.size()) {
            throw DomainError("user range " + std::to_string(range) +
                              " exceeds the dataset's " +
                              std::to_string(all_users.size()) + " users");
        }
    }

    EvaluationResult result;
    std::array<std::vector<MetricsRow>, kMethodCount> range_rows;

    for (std::size_t ri = 0; ri < options.user_ranges.size(); ++ri) {
        std::size_t range = options.user_ranges[ri];
        std::vector<RatingRecord> subset_records;
        for (const RatingRecord& r : ratings.records()) {
            auto it = std::lower_bound(all_users.begin(), all_users.end(), r.user_id);
            if (static_cast<std::size_t>(it - all_users.begin()) < range)
                subset_records.push_back(r);
        }
        RatingTable subset = RatingTable::from_records(std::move(subset_records));

        std::array<std::vector<MetricsRow>, kMethodCount> rep_rows;
        for (int rep = 0; rep < options.split.repetitions; ++rep) {
            auto [train_table, test_table] = split(subset, options.split, rep);
            InterestProfileTable interests = compute_interest_profiles(train_table);
            PopularityTable popularity =
                popularity_ranking(train_table, movies, options.top_n_popular);
            DatasetView view{&train_table, &profiles, &movies, &interests, &popularity};

            double global_mean = 0.0;
            for (const RatingRecord& r : train_table.records())
                global_mean += static_cast<double>(r.rating);
            global_mean /= static_cast<double>(train_table.records().size());

            std::uint64_t ctx = static_cast<std::uint64_t>(ri) * 1000003u +
                                static_cast<std::uint64_t>(rep);

            // Eligible targets: train interests with a liked movie plus held-out
            // ratings to score against.
            std::vector<UserId> targets;
            for (UserId user : test_table.user_ids()) {
                const InterestProfile* p = interests.find(user);
                if (p && !p->liked.empty()) targets.push_back(user);
            }
            if (options.eval_targets != 0 && targets.size() > options.eval_targets) {
                Rng rng(derive_seed(options.split.seed, 0xe7a2, ctx));
                rng.shuffle(targets);
                targets.resize(options.eval_targets);
                std::sort(targets.begin(), targets.end());
            }

            std::array<RepAccumulator, kMethodCount> acc;
            auto pop_stats = movie_stats(train_table);

            for (UserId target : targets) {
                std::vector<MovieId> train_rated = train_table.rated_movies(target);
                std::vector<MovieId> universe;
                for (MovieId m : subset.movie_ids()) {
                    if (!std::binary_search(train_rated.begin(), train_rated.end(), m))
                        universe.push_back(m);
                }
                std::vector<TestItem> test_items;
                for (std::uint32_t i : *test_table.find_user(target)) {
                    const RatingRecord& r = test_table.records()[i];
                    test_items.push_back({r.movie_id, r.rating});
                }
                std::vector<MovieId> relevant;
                for (const TestItem& t : test_items) {
                    if (t.rating >= options.relevance_threshold) relevant.push_back(t.movie_id);
                }
                std::sort(relevant.begin(), relevant.end());
                double fallback = user_train_mean(train_table, target);

                // UTV pipeline on the train side.
                try {
                    auto rules = enumerate_fuzzy_rules(target, view, options.ensemble);
                    auto selection = select_ensemble_with_fallback(target, rules);
                    HeteroGraph graph =
                        build_hetero_graph(target, selection, view, options.graph);
                    WalkCorpus corpus = generate_walks(
                        graph, options.walk, derive_seed(options.split.seed, 0xa1c0 + ctx, target));
                    TrainConfig train_config = options.train;
                    train_config.seed = derive_seed(options.split.seed, 0xb2d0 + ctx, target);
                    EmbeddingModel model =
                        train(corpus, graph.node_count(), train_config, options.walk.window);
                    Utv utv = build_utv(target, graph, model);

                    RecommendationList rec;
                    rec.user_id = target;
                    rec.k = options.k;
                    std::unordered_map<MovieId, NodeId> reps;
                    for (const Candidate& c : candidate_set(target, graph, train_table))
                        reps.emplace(c.movie_id, c.representative);
                    for (const auto& [movie, node] : reps) {
                        ComponentScore s =
                            score_candidate(utv, model.input(node), options.aggregate);
                        rec.items.push_back({movie, s.score, utv_component_label(s.best)});
                    }
                    std::sort(rec.items.begin(), rec.items.end(),
                              [](const RecommendationItem& a, const RecommendationItem& b) {
                                  if (a.score != b.score) return a.score > b.score;
                                  return a.movie_id < b.movie_id;
                              });
                    if (rec.items.size() > static_cast<std::size_t>(options.k))
                        rec.items.resize(static_cast<std::size_t>(options.k));

                    auto score_of = [&](MovieId m) -> std::optional<double> {
                        auto it = reps.find(m);
                        if (it == reps.end()) return std::nullopt;
                        return score_candidate(utv, model.input(it->second), options.aggregate)
                            .score;
                    };

                    acc[0].add_confusion(confusion(item_ids(rec.items), relevant, universe));

                    std::vector<std::pair<double, bool>> auc_items;
                    for (const TestItem& t : test_items) {
                        auto s = score_of(t.movie_id);
                        auc_items.emplace_back(s.value_or(kUnscoredSentinel),
                                               t.rating >= options.auc_threshold);
                    }
                    add_auc_items(acc[0], auc_items);

                    // Calibration pairs come from train items that have a node
                    // anywhere in the graph.
                    std::unordered_map<MovieId, NodeId> all_reps;
                    for (const KGNode& n : graph.nodes()) {
                        auto [it, inserted] = all_reps.try_emplace(n.movie_id, n.node_id);
                        if (inserted) continue;
                        std::size_t cur = graph.degree(it->second);
                        std::size_t alt = graph.degree(n.node_id);
                        if (alt > cur || (alt == cur && n.node_id < it->second))
                            it->second = n.node_id;
                    }
                    for (std::uint32_t i : *train_table.find_user(target)) {
                        const RatingRecord& r = train_table.records()[i];
                        auto it = all_reps.find(r.movie_id);
                        if (it == all_reps.end()) continue;
                        double s =
                            score_candidate(utv, model.input(it->second), options.aggregate)
                                .score;
                        acc[0].calibration.emplace_back(s, static_cast<double>(r.rating));
                    }
                    for (const TestItem& t : test_items) {
                        PendingPrediction p;
                        p.actual = static_cast<double>(t.rating);
                        p.fallback = fallback;
                        if (auto s = score_of(t.movie_id)) {
                            p.similarity = *s;
                            p.has_similarity = true;
                        }
                        acc[0].pending.push_back(p);
                    }
                    ++result.evaluated_users;
                } catch (const Error&) {
                    ++result.skipped_users;
                    continue;
                }

                // Popularity baseline.
                {
                    RecommendationList rec =
                        baseline_popularity(train_table, target, options.k);
                    acc[1].add_confusion(confusion(item_ids(rec.items), relevant, universe));
                    auto count_of = [&](MovieId m) {
                        auto it = pop_stats.find(m);
                        return it == pop_stats.end() ? 0.0
                                                     : static_cast<double>(it->second.count);
                    };
                    std::vector<std::pair<double, bool>> auc_items;
                    for (const TestItem& t : test_items) {
                        auc_items.emplace_back(count_of(t.movie_id),
                                               t.rating >= options.auc_threshold);
                    }
                    add_auc_items(acc[1], auc_items);
                    for (std::uint32_t i : *train_table.find_user(target)) {
                        const RatingRecord& r = train_table.records()[i];
                        acc[1].calibration.emplace_back(count_of(r.movie_id),
                                                        static_cast<double>(r.rating));
                    }
                    for (const TestItem& t : test_items) {
                        PendingPrediction p;
                        p.similarity = count_of(t.movie_id);
                        p.has_similarity = true;
                        p.actual = static_cast<double>(t.rating);
                        p.fallback = fallback;
                        acc[1].pending.push_back(p);
                    }
                }

                // User-based CF baseline.
                {
                    CfNeighborhood hood =
                        cf_neighborhood(train_table, target, 20);
                    RecommendationList rec =
                        hood.neighbors.empty()
                            ? baseline_popularity(train_table, target, options.k)
                            : baseline_user_cf(train_table, target, options.k, 20);
                    acc[2].add_confusion(confusion(item_ids(rec.items), relevant, universe));
                    auto votes = cf_votes(train_table, target, hood);
                    std::vector<std::pair<double, bool>> auc_items;
                    for (const TestItem& t : test_items) {
                        auto it = votes.find(t.movie_id);
                        auc_items.emplace_back(it == votes.end() ? 0.0 : it->second,
                                               t.rating >= options.auc_threshold);
                    }
                    add_auc_items(acc[2], auc_items);
                    for (const TestItem& t : test_items) {
                        auto pred = cf_predict(train_table, hood, t.movie_id);
                        acc[2].direct_predictions.emplace_back(
                            pred ? clamp_rating(*pred) : clamp_rating(fallback),
                            static_cast<double>(t.rating));
                    }
                }
            }

            for (int m = 0; m < kMethodCount; ++m)
                rep_rows[m].push_back(finish_rep(acc[m], range, global_mean));
        }

        for (int m = 0; m < kMethodCount; ++m) {
            MetricsRow row;
            row.user_count = range;
            for (const MetricsRow& r : rep_rows[m]) {
                row.precision += r.precision;
                row.recall += r.recall;
                row.accuracy += r.accuracy;
                row.f1 += r.f1;
                row.rmse += r.rmse;
                row.auc += r.auc;
            }
            auto reps = static_cast<double>(options.split.repetitions);
            row.precision /= reps;
            row.recall /= reps;
            row.accuracy /= reps;
            row.f1 /= reps;
            row.rmse /= reps;
            row.auc /= reps;
            range_rows[m].push_back(row);
        }
    }

    for (int m = 0; m < kMethodCount; ++m) {
        MethodReport method;
        method.method = kMethodNames[m];
        method.report.rows = range_rows[m];
        MetricsRow& avg = method.report.avg;
        for (const MetricsRow& r : method.report.rows) {
            avg.user_count += r.user_count;
            avg.precision += r.precision;
            avg.recall += r.recall;
            avg.accuracy += r.accuracy;
            avg.f1 += r.f1;
            avg.rmse += r.rmse;
            avg.auc += r.auc;
        }
        auto n = static_cast<double>(method.report.rows.size());
        avg.user_count = static_cast<std::size_t>(
            static_cast<double>(avg.user_count) / n + 0.5);
        avg.precision /= n;
        avg.recall /= n;
        avg.accuracy /= n;
        avg.f1 /= n;
        avg.rmse /= n;
        avg.auc /= n;
        result.methods.push_back(std::move(method));
    }
    return result;
}

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"precision", "recall", "accuracy",
                                                   "f1",        "rmse",   "auc"};
    return names;
}

namespace {

double metric_value(const MetricsRow& row, const std::string& metric) {
    if (metric == "precision") return row.precision;
    if (metric == "recall") return row.recall;
    if (metric == "accuracy") return row.accuracy;
    if (metric == "f1") return row.f1;
    if (metric == "rmse") return row.rmse;
    if (metric == "auc") return row.auc;
    throw DomainError("unknown metric '" + metric + "'");
}

std::string format4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

void write_metric_csv(const EvaluationResult& result, const std::string& metric,
                      std::ostream& out) {
    out << "method";
    if (!result.methods.empty()) {
        for (const MetricsRow& row : result.methods.front().report.rows)
            out << ',' << row.user_count;
    }
    out << ",AVG\n";
    for (const MethodReport& method : result.methods) {
        out << method.method;
        for (const MetricsRow& row : method.report.rows)
            out << ',' << format4(metric_value(row, metric));
        out << ',' << format4(metric_value(method.report.avg, metric)) << '\n';
    }
}

void write_report_text(const EvaluationResult& result, std::ostream& out) {
    for (const MethodReport& method : result.methods) {
        out << "== " << method.method << " ==\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-10s", "users");
        out << buf;
        for (const std::string& metric : metric_names()) {
            std::snprintf(buf, sizeof(buf), " %9s", metric.c_str());
            out << buf;
        }
        out << '\n';
        auto emit_row = [&](const std::string& label, const MetricsRow& row) {
            std::snprintf(buf, sizeof(buf), "%-10s", label.c_str());
            out << buf;
            for (const std::string& metric : metric_names()) {
                std::snprintf(buf, sizeof(buf), " %9s",
                              format4(metric_value(row, metric)).c_str());
                out << buf;
            }
            out << '\n';
        };
        for (const MetricsRow& row : method.report.rows)
            emit_row(std::to_string(row.user_count), row);
        emit_row("AVG", method.report.avg);
        out << '\n';
    }
}

}  // namespace utv
