#include "cox/dgp.hpp"

#include <cmath>
#include <stdexcept>

namespace cox {

namespace {

inline std::uint32_t mul_hi_lo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  *hi = static_cast<std::uint32_t>(p >> 32);
  return static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u;
  constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0 = 0, hi1 = 0;
    const std::uint32_t lo0 = mul_hi_lo(kMul0, counter[0], &hi0);
    const std::uint32_t lo1 = mul_hi_lo(kMul1, counter[2], &hi1);
    counter = {hi1 ^ counter[1] ^ key[0], lo1, hi0 ^ counter[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

CounterRng::CounterRng(const SeedSpec& seed)
    : key_{static_cast<std::uint32_t>(seed.master_seed),
           static_cast<std::uint32_t>(seed.master_seed >> 32)},
      stream_(seed.stream_id) {}

std::uint32_t CounterRng::next_u32() {
  if (pos_ == 4) {
    block_ = philox4x32({static_cast<std::uint32_t>(draw_),
                         static_cast<std::uint32_t>(draw_ >> 32),
                         static_cast<std::uint32_t>(stream_),
                         static_cast<std::uint32_t>(stream_ >> 32)},
                        key_);
    ++draw_;
    pos_ = 0;
  }
  return block_[static_cast<std::size_t>(pos_++)];
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double CounterRng::next_uniform() {
  // Top 53 bits, shifted into (0, 1] so the log below never sees zero.
  const std::uint64_t bits = next_u64() >> 11;
  return static_cast<double>(bits + 1) * 0x1p-53;
}

double CounterRng::next_exponential() { return -std::log(next_uniform()); }

namespace {

Vector draw_covariates(const ModelSpec& spec, CounterRng& rng) {
  if (const auto* fd = std::get_if<FiniteDiscreteCovariates>(&spec.covariates)) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    Index pick = fd->probs.size() - 1;
    for (Index j = 0; j < fd->probs.size(); ++j) {
      cum += fd->probs(j);
      if (u <= cum) {
        pick = j;
        break;
      }
    }
    return fd->atoms.row(pick).transpose();
  }
  const auto& box = std::get<UniformBoxCovariates>(spec.covariates);
  Vector z(box.lower.size());
  for (Index k = 0; k < z.size(); ++k)
    z(k) = box.lower(k) + (box.upper(k) - box.lower(k)) * rng.next_uniform();
  return z;
}

}  // namespace

Dataset simulate(const ModelSpec& spec, Index n, const SeedSpec& seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  const Index d = spec.dim();
  CounterRng rng(seed);

  Vector times(n);
  IntVector status(n);
  Matrix covariates(n, d);
  for (Index i = 0; i < n; ++i) {
    const Vector z = draw_covariates(spec, rng);
    covariates.row(i) = z.transpose();
    const double event_time = inverse_cumulative_hazard(
        rng.next_exponential() * std::exp(-spec.beta0.dot(z)), spec.baseline);
    double censor_time = spec.censoring.study_end;
    if (spec.censoring.rate > 0.0)
      censor_time = std::min(censor_time, rng.next_exponential() / spec.censoring.rate);
    times(i) = std::min(event_time, censor_time);
    status(i) = event_time <= censor_time ? 1 : 0;
  }
  return Dataset(std::move(times), std::move(status), std::move(covariates));
}

}  // namespace cox
