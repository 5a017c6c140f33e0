#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "hpq/model.hpp"

namespace hpq {

/// Seeded generator whose output is identical on every platform.
/// (std::uniform_*_distribution is implementation-defined, so it is not used.)
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [lo, hi) with 53 random bits.
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::ldexp(static_cast<double>(engine_() >> 11), -53);
  }
  /// Uniform integer in [lo, hi]; the modulo bias is irrelevant for fixtures.
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

struct Fixture {
  std::vector<FloatTensor> weights;  // one (Co, Ci, kh, kw) tensor per layer
  std::vector<FloatTensor> samples;  // (C, H, W) each
  std::vector<std::int32_t> labels;  // argmax class of the float reference per sample
};

/// Ci = Co = 4, 5x5 kernels. Kernel (0, 0) is a centred impulse of 0.9; every other kernel
/// (oc, ic) is dense with peak magnitude 0.9 * 2^-(2 + (3 oc + 5 ic) mod 7), so per-kernel
/// ranges span a factor of 2^8.
Fixture compare_fixture(std::uint64_t seed);

/// Same shape with every kernel peaking at 0.9, so all schemes calibrate identically.
Fixture uniform_fixture(std::uint64_t seed);

/// compare_fixture shape with all-zero weights.
Fixture zero_fixture(std::uint64_t seed);

/// One or two layers of random small shape.
Fixture random_fixture(std::uint64_t seed);

/// Argmax over per-channel sums of a (C, H, W) feature map; ties pick the lowest channel.
std::int32_t classify(const FloatTensor& feature_map);

/// Writes weights<i>.hpft, samples.hpft and labels.hpqt into `dir`.
void write_fixture(const Fixture& f, const std::filesystem::path& dir);

}  // namespace hpq
