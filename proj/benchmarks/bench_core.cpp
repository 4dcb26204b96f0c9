// Microbenchmarks for the pipeline hot paths: rule enumeration, graph
// linking, walk sampling, and both embedding objectives. Fixtures are
// synthetic and fixed-seed so numbers are comparable across runs.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "utv/dataset.hpp"
#include "utv/embedding.hpp"
#include "utv/ensemble.hpp"
#include "utv/hetero_graph.hpp"
#include "utv/rng.hpp"
#include "utv/walks.hpp"

using namespace utv;

namespace {

const char* kGenres[] = {"Action", "Comedy", "Drama", "Horror", "Romance", "Sci-Fi"};

MovieCatalog make_movies(std::size_t count, Rng& rng) {
    std::vector<MovieRecord> movies;
    for (MovieId m = 1; m <= count; ++m) {
        std::set<std::string> genres;
        std::size_t n = 1 + rng.next_below(3);
        while (genres.size() < n) genres.insert(kGenres[rng.next_below(6)]);
        movies.push_back({m, "Movie " + std::to_string(m),
                          {genres.begin(), genres.end()}});
    }
    return MovieCatalog(std::move(movies));
}

struct BenchData {
    RatingTable ratings;
    UserProfileTable profiles;
    MovieCatalog movies;
    InterestProfileTable interests;
    PopularityTable popularity;

    DatasetView view() const {
        return {&ratings, &profiles, &movies, &interests, &popularity};
    }
};

BenchData make_data(std::size_t users, std::size_t movie_count, std::size_t per_user) {
    Rng rng(9701);
    BenchData d;
    d.movies = make_movies(movie_count, rng);

    std::vector<UserProfile> profiles;
    for (UserId u = 1; u <= users; ++u) {
        UserProfile p;
        p.user_id = u;
        p.gender = rng.next_below(2) == 0 ? Gender::M : Gender::F;
        p.raw_age_code = 18 + static_cast<int>(rng.next_below(40));
        p.age_bin = age_bin_for(p.raw_age_code);
        profiles.push_back(p);
    }
    d.profiles = UserProfileTable(std::move(profiles));

    std::vector<RatingRecord> records;
    std::vector<MovieId> pool;
    for (MovieId m = 1; m <= movie_count; ++m) pool.push_back(m);
    for (UserId u = 1; u <= users; ++u) {
        rng.shuffle(pool);
        for (std::size_t i = 0; i < per_user && i < pool.size(); ++i) {
            records.push_back({u, pool[i], 1 + static_cast<Rating>(rng.next_below(5)),
                               static_cast<std::int64_t>(1000 + i)});
        }
    }
    d.ratings = RatingTable::from_records(std::move(records));
    d.interests = compute_interest_profiles(d.ratings);
    d.popularity = popularity_ranking(d.ratings, d.movies, 5);
    return d;
}

const BenchData& data() {
    static const BenchData d = make_data(300, 200, 40);
    return d;
}

std::vector<KGNode> make_nodes(std::size_t count, const MovieCatalog& movies, Rng& rng) {
    // (movie, type, subgraph) triples must be unique for HeteroGraph
    std::vector<KGNode> nodes;
    std::set<std::tuple<MovieId, int, int>> seen;
    while (nodes.size() < count) {
        KGNode n;
        n.node_id = static_cast<NodeId>(nodes.size());
        n.movie_id = movies.movies()[rng.next_below(movies.movies().size())].movie_id;
        n.node_type = static_cast<NodeType>(rng.next_below(4));
        n.subgraph = static_cast<SubgraphId>(rng.next_below(4));
        if (!seen.insert({n.movie_id, static_cast<int>(n.node_type),
                          static_cast<int>(n.subgraph)})
                 .second) {
            continue;
        }
        nodes.push_back(n);
    }
    return nodes;
}

const HeteroGraph& graph() {
    static const HeteroGraph g = [] {
        Rng rng(717);
        auto nodes = make_nodes(240, data().movies, rng);
        auto edges = apply_link_rules(nodes, data().movies, {});
        return HeteroGraph(nodes, edges);
    }();
    return g;
}

const WalkCorpus& corpus() {
    static const WalkCorpus c = generate_walks(graph(), {1.0, 0.5, 40, 4, 5}, 5150);
    return c;
}

}  // namespace

static void BM_EnumerateRules(benchmark::State& state) {
    DatasetView view = data().view();
    UserId target = data().ratings.user_ids()[150];
    for (auto _ : state) {
        auto rules = enumerate_fuzzy_rules(target, view);
        benchmark::DoNotOptimize(rules);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 30);
}
BENCHMARK(BM_EnumerateRules)->Unit(benchmark::kMillisecond);

static void BM_ApplyLinkRules(benchmark::State& state) {
    Rng rng(717);
    auto nodes = make_nodes(static_cast<std::size_t>(state.range(0)), data().movies, rng);
    for (auto _ : state) {
        auto edges = apply_link_rules(nodes, data().movies, {});
        benchmark::DoNotOptimize(edges);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            state.range(0) * (state.range(0) - 1) / 2);
}
BENCHMARK(BM_ApplyLinkRules)->Arg(120)->Arg(240)->Unit(benchmark::kMillisecond);

static void BM_TransitionDistribution(benchmark::State& state) {
    const HeteroGraph& g = graph();
    NodeId cur = 0;
    for (NodeId id = 0; id < g.node_count(); ++id) {
        if (g.degree(id) > g.degree(cur)) cur = id;
    }
    NodeId prev = g.neighbors(cur).front();
    for (auto _ : state) {
        auto dist = transition_distribution(g, 4.0, 0.25, prev, cur);
        benchmark::DoNotOptimize(dist);
    }
}
BENCHMARK(BM_TransitionDistribution);

static void BM_GenerateWalks(benchmark::State& state) {
    WalkConfig config{1.0, 0.5, 40, 4, 5};
    std::int64_t steps_per_corpus =
        static_cast<std::int64_t>(graph().node_count()) * config.walks_per_node *
        (config.walk_length - 1);
    for (auto _ : state) {
        WalkCorpus c = generate_walks(graph(), config, 5150);
        benchmark::DoNotOptimize(c);
    }
    state.SetItemsProcessed(state.iterations() * steps_per_corpus);
}
BENCHMARK(BM_GenerateWalks)->Unit(benchmark::kMillisecond);

static void BM_NeighborhoodPairs(benchmark::State& state) {
    for (auto _ : state) {
        auto pairs = neighborhood_pairs(corpus(), 5);
        benchmark::DoNotOptimize(pairs);
    }
}
BENCHMARK(BM_NeighborhoodPairs)->Unit(benchmark::kMillisecond);

static void BM_TrainNegativeSampling(benchmark::State& state) {
    TrainConfig config{32, 5, 1, 0.05, 0.005, 99, TrainMode::NEGATIVE_SAMPLING};
    std::int64_t pairs =
        static_cast<std::int64_t>(neighborhood_pairs(corpus(), 5).size());
    for (auto _ : state) {
        EmbeddingModel model = train(corpus(), graph().node_count(), config, 5);
        benchmark::DoNotOptimize(model);
    }
    state.SetItemsProcessed(state.iterations() * pairs);
}
BENCHMARK(BM_TrainNegativeSampling)->Unit(benchmark::kMillisecond);

static void BM_ExactSoftmaxGradient(benchmark::State& state) {
    // exact softmax is quadratic in node count, so bench a small slice
    Rng rng(313);
    auto nodes = make_nodes(60, data().movies, rng);
    auto edges = apply_link_rules(nodes, data().movies, {});
    HeteroGraph g(nodes, edges);
    WalkCorpus c = generate_walks(g, {1.0, 1.0, 20, 2, 4}, 11);
    auto pairs = neighborhood_pairs(c, 4);
    EmbeddingModel model = init_model(g.node_count(), 16, 7, false);
    for (auto _ : state) {
        auto grad = objective_gradient(model, pairs);
        benchmark::DoNotOptimize(grad);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_ExactSoftmaxGradient)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
