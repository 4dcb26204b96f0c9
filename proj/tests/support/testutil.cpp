#include "testutil.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

namespace testutil {

namespace fs = std::filesystem;

TempDir::TempDir() {
    fs::path base = fs::temp_directory_path();
    std::random_device rd;
    for (int attempt = 0; attempt < 64; ++attempt) {
        fs::path candidate = base / ("utvtest-" + std::to_string(rd()));
        std::error_code ec;
        if (fs::create_directory(candidate, ec)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("could not create a temp directory");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read failed: " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

utv::RatingTable make_ratings(const std::vector<std::array<long long, 4>>& rows) {
    std::vector<utv::RatingRecord> records;
    records.reserve(rows.size());
    for (const auto& r : rows) {
        records.push_back({static_cast<utv::UserId>(r[0]),
                           static_cast<utv::MovieId>(r[1]), static_cast<int>(r[2]),
                           r[3]});
    }
    return utv::RatingTable::from_records(std::move(records));
}

utv::UserProfileTable make_profiles(
    const std::vector<std::tuple<utv::UserId, char, int>>& rows) {
    std::vector<utv::UserProfile> profiles;
    profiles.reserve(rows.size());
    for (const auto& [u, g, age] : rows) {
        profiles.push_back({u, g == 'M' ? utv::Gender::M : utv::Gender::F,
                            utv::age_bin_for(age), age});
    }
    return utv::UserProfileTable(std::move(profiles));
}

utv::MovieCatalog make_movies(
    const std::vector<std::pair<utv::MovieId, std::vector<std::string>>>& rows) {
    std::vector<utv::MovieRecord> movies;
    movies.reserve(rows.size());
    for (const auto& [m, genres] : rows) {
        movies.push_back({m, "Movie " + std::to_string(m), genres});
    }
    return utv::MovieCatalog(std::move(movies));
}

utv::DatasetView Tables::view() const {
    return {&ratings, &profiles, &movies, &interests, &popularity};
}

Tables derive(utv::RatingTable ratings, utv::UserProfileTable profiles,
              utv::MovieCatalog movies, std::size_t top_n) {
    Tables t;
    t.ratings = std::move(ratings);
    t.profiles = std::move(profiles);
    t.movies = std::move(movies);
    t.interests = utv::compute_interest_profiles(t.ratings);
    t.popularity = utv::popularity_ranking(t.ratings, t.movies, top_n);
    return t;
}

Tables random_toy(utv::Rng& rng, const ToySpec& spec) {
    std::vector<std::pair<utv::MovieId, std::vector<std::string>>> movie_rows;
    for (int m = 1; m <= spec.movies; ++m) {
        int count = 1 + static_cast<int>(rng.next_below(3));
        std::set<std::string> genres;
        while (static_cast<int>(genres.size()) < count) {
            genres.insert("G" + std::to_string(rng.next_below(
                                    static_cast<std::uint64_t>(spec.genres))));
        }
        movie_rows.emplace_back(static_cast<utv::MovieId>(m),
                                std::vector<std::string>(genres.begin(), genres.end()));
    }

    std::vector<std::tuple<utv::UserId, char, int>> profile_rows;
    std::vector<std::array<long long, 4>> rating_rows;
    long long stamp = 978300000;
    for (int u = 1; u <= spec.users; ++u) {
        if (spec.with_profiles) {
            char g = rng.next_below(2) ? 'F' : 'M';
            int age = 5 + static_cast<int>(rng.next_below(56));
            profile_rows.emplace_back(static_cast<utv::UserId>(u), g, age);
        }
        int span = spec.max_ratings - spec.min_ratings + 1;
        int n = spec.min_ratings + static_cast<int>(rng.next_below(
                                       static_cast<std::uint64_t>(span)));
        n = std::min(n, spec.movies);
        std::set<utv::MovieId> seen;
        while (static_cast<int>(seen.size()) < n) {
            auto m = static_cast<utv::MovieId>(
                1 + rng.next_below(static_cast<std::uint64_t>(spec.movies)));
            if (!seen.insert(m).second) continue;
            rating_rows.push_back({u, m, 1 + static_cast<long long>(rng.next_below(5)),
                                   stamp++});
        }
    }

    return derive(make_ratings(rating_rows), make_profiles(profile_rows),
                  make_movies(movie_rows));
}

double oracle_precision(utv::UserId target, const std::vector<utv::UserId>& members,
                        const utv::RatingTable& ratings) {
    std::set<utv::MovieId> target_items, pool;
    for (const utv::RatingRecord& r : ratings.records()) {
        if (r.user_id == target) target_items.insert(r.movie_id);
        for (utv::UserId m : members) {
            if (r.user_id == m) pool.insert(r.movie_id);
        }
    }
    std::set<utv::MovieId> both, all;
    std::set_intersection(target_items.begin(), target_items.end(), pool.begin(),
                          pool.end(), std::inserter(both, both.begin()));
    std::set_union(target_items.begin(), target_items.end(), pool.begin(), pool.end(),
                   std::inserter(all, all.begin()));
    if (all.empty()) return 0.0;
    return static_cast<double>(both.size()) / static_cast<double>(all.size());
}

std::set<utv::MovieId> oracle_liked(utv::UserId user, const utv::RatingTable& ratings) {
    long long sum = 0, count = 0;
    for (const utv::RatingRecord& r : ratings.records()) {
        if (r.user_id == user) {
            sum += r.rating;
            ++count;
        }
    }
    std::set<utv::MovieId> liked;
    if (count == 0) return liked;
    long long threshold = sum / count;
    for (const utv::RatingRecord& r : ratings.records()) {
        if (r.user_id == user && r.rating >= threshold) liked.insert(r.movie_id);
    }
    return liked;
}

namespace {

bool genres_overlap(const utv::MovieCatalog& movies, utv::MovieId a, utv::MovieId b) {
    const utv::MovieRecord* ra = movies.find(a);
    const utv::MovieRecord* rb = movies.find(b);
    if (!ra || !rb) return false;
    for (const std::string& ga : ra->genres) {
        for (const std::string& gb : rb->genres) {
            if (ga == gb) return true;
        }
    }
    return false;
}

}  // namespace

std::set<std::pair<utv::NodeId, utv::NodeId>> oracle_edges(
    const std::vector<utv::KGNode>& nodes, const utv::MovieCatalog& movies,
    bool intra_subgraph) {
    using NT = utv::NodeType;
    std::set<std::pair<utv::NodeId, utv::NodeId>> edges;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            const utv::KGNode& a = nodes[i];
            const utv::KGNode& b = nodes[j];
            if (!intra_subgraph && a.subgraph == b.subgraph) continue;
            bool linked = false;
            if (a.node_type == NT::SF && b.node_type == NT::SF) {
                linked = a.movie_id == b.movie_id ||
                         genres_overlap(movies, a.movie_id, b.movie_id);
            } else {
                NT x = a.node_type, y = b.node_type;
                if (y == NT::SFS) std::swap(x, y);
                if (x == NT::SFS && (y == NT::SF || y == NT::SMPF || y == NT::SMPSF)) {
                    linked = genres_overlap(movies, a.movie_id, b.movie_id);
                }
            }
            if (linked && !(a.node_id == b.node_id)) {
                auto lo = std::min(a.node_id, b.node_id);
                auto hi = std::max(a.node_id, b.node_id);
                if (lo != hi) edges.insert({lo, hi});
            }
        }
    }
    return edges;
}

}  // namespace testutil
