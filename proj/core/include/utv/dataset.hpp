#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "utv/types.hpp"

namespace utv {

// One {user, movie, rating, timestamp} tuple.
struct RatingRecord {
    UserId user_id = 0;
    MovieId movie_id = 0;
    Rating rating = 0;
    std::int64_t timestamp = 0;

    friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

// Immutable indexed collection of rating records. (user, movie) pairs are
// unique; both indexes are built once and the table is safe to share
// read-only across threads.
class RatingTable {
public:
    RatingTable() = default;

    // Validates rating range and (user, movie) uniqueness.
    static RatingTable from_records(std::vector<RatingRecord> records);

    const std::vector<RatingRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // Record indices for one user/movie, or nullptr if absent.
    const std::vector<std::uint32_t>* find_user(UserId u) const;
    const std::vector<std::uint32_t>* find_movie(MovieId m) const;
    bool has_user(UserId u) const { return find_user(u) != nullptr; }

    // Ascending id lists.
    const std::vector<UserId>& user_ids() const { return user_ids_; }
    const std::vector<MovieId>& movie_ids() const { return movie_ids_; }

    // Movies rated by u, ascending. Empty for unknown users.
    std::vector<MovieId> rated_movies(UserId u) const;

    // Rating of (u, m) if present.
    std::optional<Rating> rating_of(UserId u, MovieId m) const;

private:
    std::vector<RatingRecord> records_;
    std::unordered_map<UserId, std::vector<std::uint32_t>> by_user_;
    std::unordered_map<MovieId, std::vector<std::uint32_t>> by_movie_;
    std::vector<UserId> user_ids_;
    std::vector<MovieId> movie_ids_;
};

enum class Gender { M, F };

// Age groups of the profile predicate: A <= 25 < B <= 40 < C.
enum class AgeBin { A, B, C };

AgeBin age_bin_for(int age_code);
char age_bin_letter(AgeBin bin);

struct UserProfile {
    UserId user_id = 0;
    Gender gender = Gender::M;
    AgeBin age_bin = AgeBin::A;
    int raw_age_code = 0;
};

class UserProfileTable {
public:
    UserProfileTable() = default;
    explicit UserProfileTable(std::vector<UserProfile> profiles);

    const UserProfile* find(UserId u) const;
    const std::vector<UserProfile>& all() const { return profiles_; }
    bool empty() const { return profiles_.empty(); }

private:
    std::vector<UserProfile> profiles_;  // ascending user_id
    std::unordered_map<UserId, std::uint32_t> index_;
};

struct MovieRecord {
    MovieId movie_id = 0;
    std::string title;
    std::vector<std::string> genres;  // sorted, unique, non-empty
};

// Movie table plus an interned genre vocabulary. Genre ids are dense and
// assigned in first-seen order; per-movie genre id lists are sorted.
class MovieCatalog {
public:
    MovieCatalog() = default;
    explicit MovieCatalog(std::vector<MovieRecord> movies);

    const MovieRecord* find(MovieId m) const;
    const std::vector<MovieRecord>& movies() const { return movies_; }
    bool empty() const { return movies_.empty(); }

    std::size_t genre_count() const { return genre_names_.size(); }
    const std::string& genre_name(std::uint32_t gid) const { return genre_names_[gid]; }
    std::optional<std::uint32_t> genre_id(const std::string& name) const;

    // Sorted genre ids of a movie; empty for unknown movies.
    const std::vector<std::uint32_t>& genre_ids(MovieId m) const;

    // True when the two movies share at least one genre.
    bool genres_intersect(MovieId a, MovieId b) const;

private:
    std::vector<MovieRecord> movies_;  // ascending movie_id
    std::unordered_map<MovieId, std::uint32_t> index_;
    std::vector<std::string> genre_names_;
    std::unordered_map<std::string, std::uint32_t> genre_index_;
    std::vector<std::vector<std::uint32_t>> movie_genre_ids_;
    std::vector<std::uint32_t> empty_genres_;
};

// Per-user interest split: threshold = floor(mean rating); ratings at or
// above it are "liked".
struct InterestProfile {
    UserId user_id = 0;
    Rating threshold = 0;
    std::vector<MovieId> liked;      // ascending
    std::vector<MovieId> not_liked;  // ascending

    bool likes(MovieId m) const;
};

class InterestProfileTable {
public:
    InterestProfileTable() = default;
    explicit InterestProfileTable(std::vector<InterestProfile> profiles);

    const InterestProfile* find(UserId u) const;
    const std::vector<InterestProfile>& all() const { return profiles_; }

private:
    std::vector<InterestProfile> profiles_;  // ascending user_id
    std::unordered_map<UserId, std::uint32_t> index_;
};

struct MovieRankEntry {
    MovieId movie_id = 0;
    std::uint32_t selection_count = 0;
    double mean_rating = 0.0;
};

struct GenreRankEntry {
    std::string genre;
    std::uint32_t selection_count = 0;
};

// Popularity rankings. movie_rank is ordered by (count desc, mean desc,
// id asc); genre_rank by (count desc, name asc). top_movies / top_genres
// are prefixes of length <= top_n.
struct PopularityTable {
    std::vector<MovieRankEntry> movie_rank;
    std::vector<MovieId> top_movies;
    std::vector<GenreRankEntry> genre_rank;
    std::vector<std::string> top_genres;

    bool is_top_movie(MovieId m) const;
    bool is_top_genre_id(std::uint32_t gid) const;

    // Filled by popularity_ranking: genre ids of top_genres, sorted.
    std::vector<std::uint32_t> top_genre_ids;
};

// --- parsing --------------------------------------------------------------

// MovieLens ratings: "::"-separated .dat lines or a CSV with header row.
// Rejects malformed lines (with line number), out-of-range ratings and
// duplicate (user, movie) pairs.
RatingTable parse_ratings(const std::filesystem::path& path);

// MovieLens users: "UserID::Gender::Age::Occupation::Zip" or a CSV with
// header (user_id,gender,age[,...]). Age codes are binned with age_bin_for.
UserProfileTable parse_users(const std::filesystem::path& path);

// MovieLens movies: "MovieID::Title::Genre1|Genre2|..." or a CSV with header
// (movie_id,title,genres). Titles get a Latin-1 fallback when the raw bytes
// are not valid UTF-8. Every movie needs a non-empty genre list.
MovieCatalog parse_movies(const std::filesystem::path& path);

// --- derived tables -------------------------------------------------------

InterestProfile compute_interest_profile(UserId user, const RatingTable& ratings);
InterestProfileTable compute_interest_profiles(const RatingTable& ratings);

PopularityTable popularity_ranking(const RatingTable& ratings,
                                   const MovieCatalog& movies,
                                   std::size_t top_n = 5);

// Keeps each record independently with probability keep_fraction under the
// seeded generator. Users whose records are all dropped disappear from the
// result.
RatingTable sparsify(const RatingTable& ratings, double keep_fraction,
                     std::uint64_t seed);

// --- serialization --------------------------------------------------------

// Canonical CSV: header "user_id,movie_id,rating,timestamp" then one row per
// record in table order.
void write_ratings_csv(const RatingTable& ratings, std::ostream& out);
void write_users_csv(const UserProfileTable& users, std::ostream& out);
void write_movies_csv(const MovieCatalog& movies, std::ostream& out);

// Latin-1 bytes transcoded to UTF-8 when the input is not valid UTF-8.
std::string to_utf8_with_latin1_fallback(const std::string& raw);

}  // namespace utv
