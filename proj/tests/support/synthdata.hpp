#pragma once

// Deterministic MovieLens-format corpus with planted taste communities:
// six (gender, age-group) cohorts, each attached to three of the eighteen
// genres. Stands in for the real dataset in end-to-end tests; point
// UTV_ML1M_DIR at a MovieLens-1M directory to use the real files instead.

#include <cstdint>
#include <filesystem>

namespace testutil {

struct SynthSpec {
    int users = 1200;
    int movies = 600;
    int min_ratings = 25;
    int max_ratings = 55;
    double community_bias = 0.75;  // chance a rating stays in the home cohort
    std::uint64_t seed = 20240601;
};

// Writes ratings.dat / users.dat / movies.dat into dir.
void write_synthetic_ml(const std::filesystem::path& dir, const SynthSpec& spec = {});

}  // namespace testutil
