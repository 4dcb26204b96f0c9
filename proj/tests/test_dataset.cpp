#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "testutil.hpp"
#include "utv/dataset.hpp"
#include "utv/errors.hpp"
#include "utv/rng.hpp"

using namespace utv;

TEST_CASE("parse_ratings reads :: lines") {
    testutil::TempDir dir;
    auto path = dir.path() / "r.dat";
    testutil::write_file(path,
                         "1::1193::5::978300760\n"
                         "1::661::3::978302109\n"
                         "2::1193::4::978301000\n");
    RatingTable t = parse_ratings(path);
    REQUIRE(t.size() == 3);
    CHECK(t.records()[0] == RatingRecord{1, 1193, 5, 978300760});
    CHECK(t.user_ids() == std::vector<UserId>{1, 2});
    CHECK(t.movie_ids() == std::vector<MovieId>{661, 1193});
    CHECK(t.rating_of(2, 1193) == 4);
    CHECK(t.rating_of(2, 661) == std::nullopt);
    CHECK(t.find_movie(1193)->size() == 2);
}

TEST_CASE("parse_ratings reads CSV with header") {
    testutil::TempDir dir;
    auto path = dir.path() / "r.csv";
    testutil::write_file(path,
                         "user_id,movie_id,rating,timestamp\n"
                         "7,10,4,100\n"
                         "7,11,1,101\n");
    RatingTable t = parse_ratings(path);
    REQUIRE(t.size() == 2);
    CHECK(t.rated_movies(7) == std::vector<MovieId>{10, 11});
}

TEST_CASE("parse_ratings rejects bad input") {
    testutil::TempDir dir;
    auto path = dir.path() / "r.dat";

    SUBCASE("rating out of range") {
        testutil::write_file(path, "1::1193::9::0\n");
        CHECK_THROWS_AS(parse_ratings(path), DomainError);
    }
    SUBCASE("malformed line names the line number") {
        testutil::write_file(path, "1::2::3::4\nhello\n");
        CHECK_THROWS_WITH_AS(parse_ratings(path),
                             doctest::Contains(":2:"), ParseError);
    }
    SUBCASE("field count") {
        testutil::write_file(path, "1::2::3\n");
        CHECK_THROWS_AS(parse_ratings(path), ParseError);
    }
    SUBCASE("duplicate pair") {
        testutil::write_file(path, "1::2::3::4\n1::2::5::9\n");
        CHECK_THROWS_AS(parse_ratings(path), DomainError);
    }
    SUBCASE("zero id") {
        testutil::write_file(path, "0::2::3::4\n");
        CHECK_THROWS_AS(parse_ratings(path), ParseError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(parse_ratings(dir.path() / "nope.dat"), NotFoundError);
    }
}

TEST_CASE("parse_users maps age codes to bins") {
    testutil::TempDir dir;
    auto path = dir.path() / "u.dat";
    testutil::write_file(path,
                         "1::F::1::10::48067\n"
                         "10::F::35::1::95370\n"
                         "6040::M::25::6::11106\n"
                         "7::M::41::2::00000\n"
                         "8::M::40::2::00000\n");
    UserProfileTable t = parse_users(path);
    CHECK(t.find(1)->age_bin == AgeBin::A);
    CHECK(t.find(1)->gender == Gender::F);
    CHECK(t.find(10)->age_bin == AgeBin::B);
    CHECK(t.find(6040)->age_bin == AgeBin::A);  // boundary: 25 is still A
    CHECK(t.find(8)->age_bin == AgeBin::B);     // boundary: 40 is still B
    CHECK(t.find(7)->age_bin == AgeBin::C);
    CHECK(t.find(99) == nullptr);
}

TEST_CASE("parse_users rejects unknown gender") {
    testutil::TempDir dir;
    auto path = dir.path() / "u.dat";
    testutil::write_file(path, "1::X::25::0::00000\n");
    CHECK_THROWS_WITH_AS(parse_users(path), doctest::Contains("gender"), ParseError);
}

TEST_CASE("parse_movies splits genres and falls back to Latin-1") {
    testutil::TempDir dir;
    auto path = dir.path() / "m.dat";
    std::string latin1_title = "Cin\xE9ma (1994)";  // 0xE9 is not valid UTF-8
    testutil::write_file(path, "1::Toy Story (1995)::Animation|Children's|Comedy\n"
                               "2::" + latin1_title + "::Drama\n");
    MovieCatalog c = parse_movies(path);
    REQUIRE(c.movies().size() == 2);
    CHECK(c.find(1)->genres ==
          std::vector<std::string>{"Animation", "Children's", "Comedy"});
    CHECK(c.find(2)->title == "Cin\xC3\xA9ma (1994)");
    CHECK(c.genre_count() == 4);
    CHECK(c.genres_intersect(1, 1));
    CHECK_FALSE(c.genres_intersect(1, 2));
}

TEST_CASE("parse_movies rejects an empty genre list") {
    testutil::TempDir dir;
    auto path = dir.path() / "m.dat";
    testutil::write_file(path, "1::Empty (2000)::\n");
    CHECK_THROWS_AS(parse_movies(path), ParseError);
}

TEST_CASE("movies CSV round-trips quoted titles") {
    testutil::TempDir dir;
    MovieCatalog c = utv::MovieCatalog(
        {{1, "Movie, The (1999)", {"Drama"}}, {2, "Say \"hi\" (2001)", {"Comedy"}}});
    std::ostringstream out;
    write_movies_csv(c, out);
    auto path = dir.path() / "m.csv";
    testutil::write_file(path, out.str());
    MovieCatalog back = parse_movies(path);
    CHECK(back.find(1)->title == "Movie, The (1999)");
    CHECK(back.find(2)->title == "Say \"hi\" (2001)");
    CHECK(back.find(2)->genres == std::vector<std::string>{"Comedy"});
}

TEST_CASE("interest threshold is the floor of the mean") {
    // Ratings 5, 4, 2: mean 3.67, threshold 3, liked = {5-rated, 4-rated}.
    RatingTable t = testutil::make_ratings({{1, 10, 5, 0}, {1, 11, 4, 1}, {1, 12, 2, 2}});
    InterestProfile p = compute_interest_profile(1, t);
    CHECK(p.threshold == 3);
    CHECK(p.liked == std::vector<MovieId>{10, 11});
    CHECK(p.not_liked == std::vector<MovieId>{12});
    CHECK(p.likes(10));
    CHECK_FALSE(p.likes(12));
}

TEST_CASE("interest profile edge cases") {
    SUBCASE("uniform ratings like everything") {
        RatingTable t = testutil::make_ratings({{1, 10, 2, 0}, {1, 11, 2, 1}});
        InterestProfile p = compute_interest_profile(1, t);
        CHECK(p.threshold == 2);
        CHECK(p.liked.size() == 2);
        CHECK(p.not_liked.empty());
    }
    SUBCASE("single rating") {
        RatingTable t = testutil::make_ratings({{1, 10, 1, 0}});
        InterestProfile p = compute_interest_profile(1, t);
        CHECK(p.threshold == 1);
        CHECK(p.liked == std::vector<MovieId>{10});
    }
    SUBCASE("unknown user") {
        RatingTable t = testutil::make_ratings({{1, 10, 1, 0}});
        CHECK_THROWS_AS(compute_interest_profile(2, t), NotFoundError);
    }
}

TEST_CASE("interest partition property") {
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        testutil::Tables t = testutil::random_toy(rng);
        for (const InterestProfile& p : t.interests.all()) {
            // liked and not_liked partition the rated set.
            std::vector<MovieId> all;
            std::merge(p.liked.begin(), p.liked.end(), p.not_liked.begin(),
                       p.not_liked.end(), std::back_inserter(all));
            CHECK(all == t.ratings.rated_movies(p.user_id));
            for (MovieId m : p.liked) CHECK(*t.ratings.rating_of(p.user_id, m) >= p.threshold);
            for (MovieId m : p.not_liked) CHECK(*t.ratings.rating_of(p.user_id, m) < p.threshold);
            CHECK(testutil::oracle_liked(p.user_id, t.ratings) ==
                  std::set<MovieId>(p.liked.begin(), p.liked.end()));
        }
    }
}

TEST_CASE("popularity ranking order and prefixes") {
    // Movie 20: 3 ratings. Movies 10 and 30: 2 ratings each, mean decides;
    // movies 40, 50: 1 rating each with equal mean, id decides.
    RatingTable t = testutil::make_ratings({
        {1, 20, 5, 0}, {2, 20, 4, 1}, {3, 20, 3, 2},
        {1, 10, 5, 3}, {2, 10, 5, 4},
        {1, 30, 3, 5}, {2, 30, 2, 6},
        {1, 40, 4, 7}, {2, 50, 4, 8},
    });
    MovieCatalog movies = testutil::make_movies({{10, {"Drama"}},
                                                 {20, {"Action", "Drama"}},
                                                 {30, {"Comedy"}},
                                                 {40, {"Action"}},
                                                 {50, {"Comedy"}}});
    PopularityTable p = popularity_ranking(t, movies, 3);

    std::vector<MovieId> order;
    for (const auto& e : p.movie_rank) order.push_back(e.movie_id);
    CHECK(order == std::vector<MovieId>{20, 10, 30, 40, 50});
    CHECK(p.top_movies == std::vector<MovieId>{20, 10, 30});
    CHECK(p.is_top_movie(20));
    CHECK_FALSE(p.is_top_movie(40));

    // Genre counts: Drama 3+2=5, Action 3+1=4, Comedy 2+1=3.
    REQUIRE(p.genre_rank.size() == 3);
    CHECK(p.genre_rank[0].genre == "Drama");
    CHECK(p.genre_rank[0].selection_count == 5);
    CHECK(p.genre_rank[1].genre == "Action");
    CHECK(p.genre_rank[2].genre == "Comedy");
}

TEST_CASE("popularity genre ties break by name") {
    RatingTable t = testutil::make_ratings({{1, 1, 3, 0}, {1, 2, 3, 1}});
    MovieCatalog movies = testutil::make_movies({{1, {"Zebra"}}, {2, {"Alpha"}}});
    PopularityTable p = popularity_ranking(t, movies, 1);
    CHECK(p.genre_rank[0].genre == "Alpha");
    CHECK(p.top_genres == std::vector<std::string>{"Alpha"});
}

TEST_CASE("popularity needs the rated movies in the catalog") {
    RatingTable t = testutil::make_ratings({{1, 99, 3, 0}});
    MovieCatalog movies = testutil::make_movies({{1, {"Drama"}}});
    CHECK_THROWS_AS(popularity_ranking(t, movies, 5), NotFoundError);
}

TEST_CASE("sparsify keeps a seeded subset") {
    Rng rng(99);
    testutil::Tables t = testutil::random_toy(rng, {.users = 40, .movies = 60,
                                                    .genres = 6, .min_ratings = 10,
                                                    .max_ratings = 20,
                                                    .with_profiles = false});
    RatingTable a = sparsify(t.ratings, 0.5, 123);
    RatingTable b = sparsify(t.ratings, 0.5, 123);
    RatingTable c = sparsify(t.ratings, 0.5, 124);

    // Deterministic per seed, and a strict subset of the records.
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.records()[i] == b.records()[i]);
    CHECK(a.size() < t.ratings.size());
    CHECK(a.size() > t.ratings.size() / 4);
    for (const RatingRecord& r : a.records()) {
        CHECK(t.ratings.rating_of(r.user_id, r.movie_id) == r.rating);
    }
    // Different seed, different subset (overwhelmingly likely).
    bool same = a.size() == c.size();
    if (same) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!(a.records()[i] == c.records()[i])) { same = false; break; }
        }
    }
    CHECK_FALSE(same);
    CHECK(sparsify(t.ratings, 1.0, 5).size() == t.ratings.size());
    CHECK_THROWS_AS(sparsify(t.ratings, 0.0, 5), DomainError);
}

TEST_CASE("ratings CSV round-trip") {
    testutil::TempDir dir;
    Rng rng(7);
    testutil::Tables t = testutil::random_toy(rng);
    std::ostringstream out;
    write_ratings_csv(t.ratings, out);
    auto path = dir.path() / "r.csv";
    testutil::write_file(path, out.str());
    RatingTable back = parse_ratings(path);
    REQUIRE(back.size() == t.ratings.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back.records()[i] == t.ratings.records()[i]);
    }
}
