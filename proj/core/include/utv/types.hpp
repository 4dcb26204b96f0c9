#pragma once

#include <cstdint>

namespace utv {

using UserId = std::uint32_t;
using MovieId = std::uint32_t;
using NodeId = std::uint32_t;

// MovieLens star ratings, integers 1..5.
using Rating = int;

inline constexpr Rating kMinRating = 1;
inline constexpr Rating kMaxRating = 5;

}  // namespace utv
