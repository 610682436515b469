#pragma once

// Minimal randomized property runner: each case gets its own seeded engine and
// a failing case reports the seed that reproduces it.

#include <doctest.h>

#include <cstdint>
#include <random>
#include <string>

namespace prop {

inline constexpr int kCases = 250;

// `check(rng)` returns an empty string on success, otherwise a description.
template <typename Check>
void for_all(const char* name, Check check, int cases = kCases, std::uint64_t base_seed = 0) {
  int failures = 0;
  for (int k = 0; k < cases; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    std::mt19937_64 rng(seed);
    const std::string msg = check(rng);
    if (!msg.empty() && failures++ < 3) FAIL_CHECK(std::string(name) << " failed for seed " << seed << ": " << msg);
  }
  CHECK_MESSAGE(failures == 0, std::string(name) << ": " << failures << " of " << cases << " cases failed");
}

template <typename Int>
Int uniform(std::mt19937_64& rng, Int lo, Int hi) {
  return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

}  // namespace prop
