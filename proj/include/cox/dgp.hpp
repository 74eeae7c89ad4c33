#pragma once

#include <array>
#include <cstdint>

#include "cox/population.hpp"
#include "cox/survival_data.hpp"

namespace cox {

// One reproducible stream: (master_seed, stream_id) fully determines every
// draw, independent of call interleaving across other streams.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

// One block of the Philox 4x32 keyed permutation, 10 rounds. Exposed so the
// generator can be checked against the published test vectors.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based generator: the key carries the master seed, the high counter
// words carry the stream id, the low words count blocks. Streams therefore
// never overlap and any draw is O(1) to reproduce.
class CounterRng {
 public:
  explicit CounterRng(const SeedSpec& seed);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double next_uniform();      // (0, 1], 53-bit resolution
  double next_exponential();  // mean 1, always finite

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t draw_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
};

// Draws n right-censored observations from the model by inverting the
// cumulative hazard at unit-exponential variates. The per-subject draw
// order (covariates, event variate, then censoring variate if enabled) is
// part of the reproducibility contract.
Dataset simulate(const ModelSpec& spec, Index n, const SeedSpec& seed);

}  // namespace cox
