#include "hpq/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "hpq/engine.hpp"
#include "hpq/error.hpp"
#include "hpq/tensor_io.hpp"

namespace hpq {

namespace {

constexpr std::size_t kChannels = 4;
constexpr std::size_t kKernel = 5;
constexpr std::size_t kSpatial = 12;
constexpr std::size_t kSamples = 8;

// Fills one kernel with values in (-peak, peak) and places +/-peak at a random tap.
void fill_kernel(FixtureRng& rng, double* kernel, std::size_t taps, double peak) {
  for (std::size_t i = 0; i < taps; ++i) kernel[i] = rng.uniform(-peak, peak);
  const auto at = static_cast<std::size_t>(rng.integer(0, static_cast<int>(taps) - 1));
  kernel[at] = rng.coin() ? peak : -peak;
}

std::vector<FloatTensor> random_samples(FixtureRng& rng, std::size_t n,
                                        std::vector<std::size_t> dims) {
  std::vector<FloatTensor> out;
  for (std::size_t s = 0; s < n; ++s) {
    FloatTensor t = zeros(dims);
    for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
    out.push_back(std::move(t));
  }
  return out;
}

void label_with_float_reference(Fixture& f) {
  f.labels.clear();
  for (const FloatTensor& s : f.samples) {
    FloatTensor x = s;
    for (const FloatTensor& w : f.weights) x = conv2d_float(x, w, {});
    f.labels.push_back(classify(x));
  }
}

template <class PeakFn>
Fixture layered_fixture(std::uint64_t seed, PeakFn peak_of) {
  FixtureRng rng(seed);
  Fixture f;
  FloatTensor w = zeros({kChannels, kChannels, kKernel, kKernel});
  for (std::size_t oc = 0; oc < kChannels; ++oc) {
    for (std::size_t ic = 0; ic < kChannels; ++ic) {
      double* kernel = &w.data[(oc * kChannels + ic) * kKernel * kKernel];
      fill_kernel(rng, kernel, kKernel * kKernel, peak_of(oc, ic));
    }
  }
  f.weights.push_back(std::move(w));
  f.samples = random_samples(rng, kSamples, {kChannels, kSpatial, kSpatial});
  label_with_float_reference(f);
  return f;
}

}  // namespace

Fixture compare_fixture(std::uint64_t seed) {
  Fixture f = layered_fixture(seed, [](std::size_t oc, std::size_t ic) {
    return oc == 0 && ic == 0 ? 0.9 : 0.9 * std::ldexp(1.0, -2 - static_cast<int>((3 * oc + 5 * ic) % 7));
  });
  double* impulse = f.weights.front().data.data();
  std::fill(impulse, impulse + kKernel * kKernel, 0.0);
  impulse[kKernel * kKernel / 2] = 0.9;
  label_with_float_reference(f);
  return f;
}

Fixture uniform_fixture(std::uint64_t seed) {
  return layered_fixture(seed, [](std::size_t, std::size_t) { return 0.9; });
}

Fixture zero_fixture(std::uint64_t seed) {
  Fixture f = compare_fixture(seed);
  for (double& v : f.weights.front().data) v = 0.0;
  label_with_float_reference(f);
  return f;
}

Fixture random_fixture(std::uint64_t seed) {
  FixtureRng rng(seed);
  Fixture f;
  const int layers = rng.integer(1, 2);
  auto channels = static_cast<std::size_t>(rng.integer(1, 4));
  const auto spatial = static_cast<std::size_t>(rng.integer(7, 10));
  const std::size_t input_channels = channels;
  for (int l = 0; l < layers; ++l) {
    const auto out = static_cast<std::size_t>(rng.integer(1, 4));
    const auto k = static_cast<std::size_t>(2 * rng.integer(0, 1) + 1);
    FloatTensor w = zeros({out, channels, k, k});
    for (std::size_t i = 0; i < out * channels; ++i) {
      fill_kernel(rng, &w.data[i * k * k], k * k, std::ldexp(1.0, -rng.integer(0, 5)));
    }
    f.weights.push_back(std::move(w));
    channels = out;
  }
  f.samples = random_samples(rng, 3, {input_channels, spatial, spatial});
  label_with_float_reference(f);
  return f;
}

std::int32_t classify(const FloatTensor& fm) {
  if (fm.dims.size() != 3) throw UsageError("classify: feature map must be (C, H, W)");
  const std::size_t plane = fm.dims[1] * fm.dims[2];
  std::int32_t best = 0;
  double best_sum = 0.0;
  for (std::size_t c = 0; c < fm.dims[0]; ++c) {
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) sum += fm.data[c * plane + i];
    if (c == 0 || sum > best_sum) {
      best = static_cast<std::int32_t>(c);
      best_sum = sum;
    }
  }
  return best;
}

void write_fixture(const Fixture& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t l = 0; l < f.weights.size(); ++l) {
    write_tensor_file(dir / ("weights" + std::to_string(l) + ".hpft"), f.weights[l]);
  }
  write_tensor_file(dir / "samples.hpft", stack_batch(f.samples));
  write_tensor_file(dir / "labels.hpqt", CodeTensor{{f.labels.size()}, f.labels});
}

}  // namespace hpq
