#include "utv/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "utv/errors.hpp"
#include "utv/rng.hpp"

namespace utv {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::size_t end = nl;
        if (end > pos && text[end - 1] == '\r') --end;
        lines.emplace_back(text.substr(pos, end - pos));
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_on(const std::string& line, const std::string& sep) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            fields.emplace_back(line.substr(pos));
            break;
        }
        fields.emplace_back(line.substr(pos, next - pos));
        pos = next + sep.size();
    }
    return fields;
}

// RFC 4180 style: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return c >= '0' && c <= '9'; });
}

template <typename T>
T parse_number(const std::string& field, const std::filesystem::path& path,
               std::size_t line_no, const char* what) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": malformed " + what + " '" + field + "'");
    }
    return value;
}

struct ParsedFile {
    std::vector<std::string> lines;
    bool csv = false;
    std::size_t first_data_line = 0;  // 0-based index into lines
};

// "::" lines are headerless .dat; comma lines are CSV whose first row is a
// header when its first field is not numeric.
ParsedFile load_table_file(const std::filesystem::path& path) {
    ParsedFile out;
    out.lines = split_lines(read_file(path));
    std::size_t probe = 0;
    while (probe < out.lines.size() && out.lines[probe].empty()) ++probe;
    if (probe == out.lines.size()) return out;  // empty file
    const std::string& first = out.lines[probe];
    if (first.find("::") != std::string::npos) {
        out.csv = false;
        out.first_data_line = probe;
    } else {
        out.csv = true;
        std::string head = split_csv(first).front();
        out.first_data_line = all_digits(head) ? probe : probe + 1;
    }
    return out;
}

std::vector<std::string> split_fields(const ParsedFile& file, const std::string& line) {
    return file.csv ? split_csv(line) : split_on(line, "::");
}

bool valid_utf8(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0) extra = 3;
        else return false;
        if (i + extra >= s.size() && extra > 0) return false;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
        }
        i += extra + 1;
    }
    return true;
}

}  // namespace

std::string to_utf8_with_latin1_fallback(const std::string& raw) {
    if (valid_utf8(raw)) return raw;
    std::string out;
    out.reserve(raw.size() + 8);
    for (unsigned char c : raw) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

// --- RatingTable ----------------------------------------------------------

RatingTable RatingTable::from_records(std::vector<RatingRecord> records) {
    RatingTable table;
    table.records_ = std::move(records);
    table.by_user_.reserve(table.records_.size() / 8 + 1);
    for (std::uint32_t i = 0; i < table.records_.size(); ++i) {
        const RatingRecord& r = table.records_[i];
        if (r.rating < kMinRating || r.rating > kMaxRating) {
            throw DomainError("rating " + std::to_string(r.rating) +
                              " out of range for user " + std::to_string(r.user_id) +
                              ", movie " + std::to_string(r.movie_id));
        }
        table.by_user_[r.user_id].push_back(i);
        table.by_movie_[r.movie_id].push_back(i);
    }
    for (const auto& [user, idx] : table.by_user_) {
        std::vector<MovieId> seen;
        seen.reserve(idx.size());
        for (std::uint32_t i : idx) seen.push_back(table.records_[i].movie_id);
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
            throw DomainError("duplicate (user, movie) rating for user " +
                              std::to_string(user));
        }
        table.user_ids_.push_back(user);
    }
    for (const auto& [movie, idx] : table.by_movie_) table.movie_ids_.push_back(movie);
    std::sort(table.user_ids_.begin(), table.user_ids_.end());
    std::sort(table.movie_ids_.begin(), table.movie_ids_.end());
    return table;
}

const std::vector<std::uint32_t>* RatingTable::find_user(UserId u) const {
    auto it = by_user_.find(u);
    return it == by_user_.end() ? nullptr : &it->second;
}

const std::vector<std::uint32_t>* RatingTable::find_movie(MovieId m) const {
    auto it = by_movie_.find(m);
    return it == by_movie_.end() ? nullptr : &it->second;
}

std::vector<MovieId> RatingTable::rated_movies(UserId u) const {
    std::vector<MovieId> out;
    if (const auto* idx = find_user(u)) {
        out.reserve(idx->size());
        for (std::uint32_t i : *idx) out.push_back(records_[i].movie_id);
        std::sort(out.begin(), out.end());
    }
    return out;
}

std::optional<Rating> RatingTable::rating_of(UserId u, MovieId m) const {
    if (const auto* idx = find_user(u)) {
        for (std::uint32_t i : *idx) {
            if (records_[i].movie_id == m) return records_[i].rating;
        }
    }
    return std::nullopt;
}

// --- profiles -------------------------------------------------------------

AgeBin age_bin_for(int age_code) {
    if (age_code <= 25) return AgeBin::A;
    if (age_code <= 40) return AgeBin::B;
    return AgeBin::C;
}

char age_bin_letter(AgeBin bin) {
    switch (bin) {
        case AgeBin::A: return 'A';
        case AgeBin::B: return 'B';
        default: return 'C';
    }
}

UserProfileTable::UserProfileTable(std::vector<UserProfile> profiles)
    : profiles_(std::move(profiles)) {
    std::sort(profiles_.begin(), profiles_.end(),
              [](const UserProfile& a, const UserProfile& b) { return a.user_id < b.user_id; });
    for (std::uint32_t i = 0; i < profiles_.size(); ++i) {
        if (!index_.emplace(profiles_[i].user_id, i).second) {
            throw DomainError("duplicate user profile for user " +
                              std::to_string(profiles_[i].user_id));
        }
    }
}

const UserProfile* UserProfileTable::find(UserId u) const {
    auto it = index_.find(u);
    return it == index_.end() ? nullptr : &profiles_[it->second];
}

// --- movies ---------------------------------------------------------------

MovieCatalog::MovieCatalog(std::vector<MovieRecord> movies) : movies_(std::move(movies)) {
    std::sort(movies_.begin(), movies_.end(),
              [](const MovieRecord& a, const MovieRecord& b) { return a.movie_id < b.movie_id; });
    movie_genre_ids_.resize(movies_.size());
    for (std::uint32_t i = 0; i < movies_.size(); ++i) {
        MovieRecord& m = movies_[i];
        if (!index_.emplace(m.movie_id, i).second) {
            throw DomainError("duplicate movie id " + std::to_string(m.movie_id));
        }
        std::sort(m.genres.begin(), m.genres.end());
        m.genres.erase(std::unique(m.genres.begin(), m.genres.end()), m.genres.end());
        if (m.genres.empty()) {
            throw DomainError("movie " + std::to_string(m.movie_id) + " has no genres");
        }
        for (const std::string& g : m.genres) {
            auto [it, inserted] = genre_index_.emplace(g, genre_names_.size());
            if (inserted) genre_names_.push_back(g);
            movie_genre_ids_[i].push_back(it->second);
        }
        std::sort(movie_genre_ids_[i].begin(), movie_genre_ids_[i].end());
    }
}

const MovieRecord* MovieCatalog::find(MovieId m) const {
    auto it = index_.find(m);
    return it == index_.end() ? nullptr : &movies_[it->second];
}

std::optional<std::uint32_t> MovieCatalog::genre_id(const std::string& name) const {
    auto it = genre_index_.find(name);
    if (it == genre_index_.end()) return std::nullopt;
    return it->second;
}

const std::vector<std::uint32_t>& MovieCatalog::genre_ids(MovieId m) const {
    auto it = index_.find(m);
    return it == index_.end() ? empty_genres_ : movie_genre_ids_[it->second];
}

bool MovieCatalog::genres_intersect(MovieId a, MovieId b) const {
    const auto& ga = genre_ids(a);
    const auto& gb = genre_ids(b);
    std::size_t i = 0, j = 0;
    while (i < ga.size() && j < gb.size()) {
        if (ga[i] == gb[j]) return true;
        if (ga[i] < gb[j]) ++i;
        else ++j;
    }
    return false;
}

// --- interest profiles ----------------------------------------------------

bool InterestProfile::likes(MovieId m) const {
    return std::binary_search(liked.begin(), liked.end(), m);
}

InterestProfileTable::InterestProfileTable(std::vector<InterestProfile> profiles)
    : profiles_(std::move(profiles)) {
    std::sort(profiles_.begin(), profiles_.end(),
              [](const InterestProfile& a, const InterestProfile& b) {
                  return a.user_id < b.user_id;
              });
    for (std::uint32_t i = 0; i < profiles_.size(); ++i) {
        index_.emplace(profiles_[i].user_id, i);
    }
}

const InterestProfile* InterestProfileTable::find(UserId u) const {
    auto it = index_.find(u);
    return it == index_.end() ? nullptr : &profiles_[it->second];
}

InterestProfile compute_interest_profile(UserId user, const RatingTable& ratings) {
    const auto* idx = ratings.find_user(user);
    if (!idx || idx->empty()) {
        throw NotFoundError("no ratings for user " + std::to_string(user));
    }
    long long sum = 0;
    for (std::uint32_t i : *idx) sum += ratings.records()[i].rating;
    // Integer scores: floor of the mean.
    Rating threshold = static_cast<Rating>(sum / static_cast<long long>(idx->size()));

    InterestProfile profile;
    profile.user_id = user;
    profile.threshold = threshold;
    for (std::uint32_t i : *idx) {
        const RatingRecord& r = ratings.records()[i];
        (r.rating >= threshold ? profile.liked : profile.not_liked).push_back(r.movie_id);
    }
    std::sort(profile.liked.begin(), profile.liked.end());
    std::sort(profile.not_liked.begin(), profile.not_liked.end());
    return profile;
}

InterestProfileTable compute_interest_profiles(const RatingTable& ratings) {
    std::vector<InterestProfile> profiles;
    profiles.reserve(ratings.user_ids().size());
    for (UserId u : ratings.user_ids()) {
        profiles.push_back(compute_interest_profile(u, ratings));
    }
    return InterestProfileTable(std::move(profiles));
}

// --- popularity -----------------------------------------------------------

bool PopularityTable::is_top_movie(MovieId m) const {
    return std::find(top_movies.begin(), top_movies.end(), m) != top_movies.end();
}

bool PopularityTable::is_top_genre_id(std::uint32_t gid) const {
    return std::binary_search(top_genre_ids.begin(), top_genre_ids.end(), gid);
}

PopularityTable popularity_ranking(const RatingTable& ratings,
                                   const MovieCatalog& movies, std::size_t top_n) {
    if (ratings.empty()) throw DomainError("popularity_ranking over an empty table");

    PopularityTable table;
    table.movie_rank.reserve(ratings.movie_ids().size());
    std::vector<std::uint32_t> genre_counts(movies.genre_count(), 0);
    for (MovieId m : ratings.movie_ids()) {
        const auto& idx = *ratings.find_movie(m);
        long long sum = 0;
        for (std::uint32_t i : idx) sum += ratings.records()[i].rating;
        table.movie_rank.push_back(
            {m, static_cast<std::uint32_t>(idx.size()),
             static_cast<double>(sum) / static_cast<double>(idx.size())});
        const auto& gids = movies.genre_ids(m);
        if (gids.empty()) {
            throw NotFoundError("rated movie " + std::to_string(m) +
                                " missing from the movie table");
        }
        for (std::uint32_t g : gids) {
            genre_counts[g] += static_cast<std::uint32_t>(idx.size());
        }
    }
    std::sort(table.movie_rank.begin(), table.movie_rank.end(),
              [](const MovieRankEntry& a, const MovieRankEntry& b) {
                  if (a.selection_count != b.selection_count)
                      return a.selection_count > b.selection_count;
                  if (a.mean_rating != b.mean_rating) return a.mean_rating > b.mean_rating;
                  return a.movie_id < b.movie_id;
              });
    for (std::size_t i = 0; i < table.movie_rank.size() && i < top_n; ++i) {
        table.top_movies.push_back(table.movie_rank[i].movie_id);
    }

    for (std::uint32_t g = 0; g < genre_counts.size(); ++g) {
        if (genre_counts[g] > 0) table.genre_rank.push_back({movies.genre_name(g), genre_counts[g]});
    }
    std::sort(table.genre_rank.begin(), table.genre_rank.end(),
              [](const GenreRankEntry& a, const GenreRankEntry& b) {
                  if (a.selection_count != b.selection_count)
                      return a.selection_count > b.selection_count;
                  return a.genre < b.genre;
              });
    for (std::size_t i = 0; i < table.genre_rank.size() && i < top_n; ++i) {
        table.top_genres.push_back(table.genre_rank[i].genre);
        table.top_genre_ids.push_back(*movies.genre_id(table.genre_rank[i].genre));
    }
    std::sort(table.top_genre_ids.begin(), table.top_genre_ids.end());
    return table;
}

// --- sparsify -------------------------------------------------------------

RatingTable sparsify(const RatingTable& ratings, double keep_fraction,
                     std::uint64_t seed) {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
        throw DomainError("keep_fraction must be in (0, 1]");
    }
    if (keep_fraction == 1.0) return RatingTable::from_records(ratings.records());
    Rng rng(derive_seed(seed, 0x5fa51));
    std::vector<RatingRecord> kept;
    kept.reserve(static_cast<std::size_t>(static_cast<double>(ratings.size()) * keep_fraction));
    for (const RatingRecord& r : ratings.records()) {
        if (rng.next_unit() < keep_fraction) kept.push_back(r);
    }
    return RatingTable::from_records(std::move(kept));
}

// --- parsing --------------------------------------------------------------

RatingTable parse_ratings(const std::filesystem::path& path) {
    ParsedFile file = load_table_file(path);
    std::vector<RatingRecord> records;
    records.reserve(file.lines.size());
    for (std::size_t li = file.first_data_line; li < file.lines.size(); ++li) {
        const std::string& line = file.lines[li];
        if (line.empty()) continue;
        auto fields = split_fields(file, line);
        if (fields.size() != 4) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": expected 4 fields, got " + std::to_string(fields.size()));
        }
        RatingRecord r;
        r.user_id = parse_number<UserId>(fields[0], path, li + 1, "user id");
        r.movie_id = parse_number<MovieId>(fields[1], path, li + 1, "movie id");
        r.rating = parse_number<Rating>(fields[2], path, li + 1, "rating");
        r.timestamp = parse_number<std::int64_t>(fields[3], path, li + 1, "timestamp");
        if (r.user_id == 0 || r.movie_id == 0) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": ids must be positive");
        }
        records.push_back(r);
    }
    return RatingTable::from_records(std::move(records));
}

UserProfileTable parse_users(const std::filesystem::path& path) {
    ParsedFile file = load_table_file(path);
    std::vector<UserProfile> profiles;
    for (std::size_t li = file.first_data_line; li < file.lines.size(); ++li) {
        const std::string& line = file.lines[li];
        if (line.empty()) continue;
        auto fields = split_fields(file, line);
        if (fields.size() < 3) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": expected at least 3 fields");
        }
        UserProfile p;
        p.user_id = parse_number<UserId>(fields[0], path, li + 1, "user id");
        if (fields[1] == "M" || fields[1] == "m") p.gender = Gender::M;
        else if (fields[1] == "F" || fields[1] == "f") p.gender = Gender::F;
        else {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": unknown gender token '" + fields[1] + "'");
        }
        p.raw_age_code = parse_number<int>(fields[2], path, li + 1, "age");
        p.age_bin = age_bin_for(p.raw_age_code);
        profiles.push_back(p);
    }
    return UserProfileTable(std::move(profiles));
}

MovieCatalog parse_movies(const std::filesystem::path& path) {
    ParsedFile file = load_table_file(path);
    std::vector<MovieRecord> movies;
    for (std::size_t li = file.first_data_line; li < file.lines.size(); ++li) {
        const std::string& line = file.lines[li];
        if (line.empty()) continue;
        auto fields = split_fields(file, line);
        if (fields.size() != 3) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": expected 3 fields, got " + std::to_string(fields.size()));
        }
        MovieRecord m;
        m.movie_id = parse_number<MovieId>(fields[0], path, li + 1, "movie id");
        m.title = to_utf8_with_latin1_fallback(fields[1]);
        for (std::string& g : split_on(fields[2], "|")) {
            if (!g.empty()) m.genres.push_back(std::move(g));
        }
        if (m.genres.empty()) {
            throw ParseError(path.string() + ":" + std::to_string(li + 1) +
                             ": empty genre field");
        }
        movies.push_back(std::move(m));
    }
    return MovieCatalog(std::move(movies));
}

// --- serialization --------------------------------------------------------

void write_ratings_csv(const RatingTable& ratings, std::ostream& out) {
    out << "user_id,movie_id,rating,timestamp\n";
    for (const RatingRecord& r : ratings.records()) {
        out << r.user_id << ',' << r.movie_id << ',' << r.rating << ','
            << r.timestamp << '\n';
    }
}

void write_users_csv(const UserProfileTable& users, std::ostream& out) {
    out << "user_id,gender,age\n";
    for (const UserProfile& p : users.all()) {
        out << p.user_id << ',' << (p.gender == Gender::M ? 'M' : 'F') << ','
            << p.raw_age_code << '\n';
    }
}

void write_movies_csv(const MovieCatalog& movies, std::ostream& out) {
    out << "movie_id,title,genres\n";
    for (const MovieRecord& m : movies.movies()) {
        std::string title = m.title;
        bool needs_quote = title.find_first_of(",\"") != std::string::npos;
        if (needs_quote) {
            std::string quoted = "\"";
            for (char c : title) {
                if (c == '"') quoted += "\"\"";
                else quoted.push_back(c);
            }
            quoted.push_back('"');
            title = quoted;
        }
        out << m.movie_id << ',' << title << ',';
        for (std::size_t i = 0; i < m.genres.size(); ++i) {
            if (i) out << '|';
            out << m.genres[i];
        }
        out << '\n';
    }
}

}  // namespace utv
