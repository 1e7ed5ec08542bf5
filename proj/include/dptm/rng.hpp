#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

#include "dptm/grid.hpp"

namespace dptm {

using Rng = std::mt19937_64;

// All randomness in a run descends from one seed through named sub-streams
// ("data", "source-train", "iteration", ...), optionally indexed. Streams with
// different names or indices are statistically independent.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream, std::uint64_t index = 0);
Rng make_rng(std::uint64_t base, std::string_view stream, std::uint64_t index = 0);

double standard_normal(Rng& rng);

/// Grid of independent N(0, 1) draws.
Grid gaussian_grid(std::size_t side, Rng& rng);

}  // namespace dptm
