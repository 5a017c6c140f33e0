#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hpq/fixedpoint.hpp"

namespace hpq {

/// Partition granularity of coefficient formats.
///   TwoD   - one format per (input channel, output channel) spatial kernel
///   ThreeD - one format per output channel (its whole Ci x kh x kw kernel)
///   FourD  - one format for the whole layer
enum class QuantScheme { TwoD, ThreeD, FourD };
enum class Padding { Valid, SameZero };
enum class Activation { None, ReLU };

std::string_view to_string(QuantScheme s) noexcept;
std::string_view to_string(Padding p) noexcept;
std::string_view to_string(Activation a) noexcept;

/// Dense row-major tensor.
template <class T>
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<T> data;

  std::size_t size() const noexcept { return data.size(); }
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using FloatTensor = Tensor<double>;
using CodeTensor = Tensor<std::int32_t>;

std::size_t element_count(const std::vector<std::size_t>& dims) noexcept;

/// Builds a tensor, checking the data length and that every value is finite.
FloatTensor make_float_tensor(std::vector<std::size_t> dims, std::vector<double> data);
FloatTensor zeros(std::vector<std::size_t> dims);

/// Integer codes plus the formats interpreting them.
///
/// Rank-3 data tensors (C, H, W) carry one format per channel. Rank-4 weight
/// tensors (Co, Ci, kh, kw) carry one format per spatial kernel, index oc * Ci + ic.
struct QTensor {
  std::vector<std::size_t> dims;
  std::vector<std::int32_t> codes;
  std::vector<QFormat> formats;

  QFormat format_at(std::size_t flat_index) const;
  QCode at(std::size_t flat_index) const { return {codes[flat_index], format_at(flat_index)}; }
  friend bool operator==(const QTensor&, const QTensor&) = default;
};

/// Checks dims/format counts and that every code lies in its format's range.
void check_qtensor(const QTensor& t);

FloatTensor dequantize(const QTensor& t);
QTensor quantize_data(const FloatTensor& x, const std::vector<QFormat>& channel_formats,
                      RoundingMode mode = RoundingMode::NearestEven);

/// Key of one coefficient partition. kAll marks a dimension the partition spans entirely.
struct PartitionKey {
  static constexpr int kAll = -1;
  int ic = kAll;
  int oc = kAll;

  friend constexpr bool operator==(const PartitionKey&, const PartitionKey&) = default;
  friend constexpr auto operator<=>(const PartitionKey&, const PartitionKey&) = default;
};

/// The key under which `scheme` stores the format for kernel (ic, oc).
PartitionKey partition_key(QuantScheme scheme, int ic, int oc) noexcept;

struct FormatTable {
  QuantScheme scheme = QuantScheme::FourD;
  std::map<PartitionKey, QFormat> entries;

  friend bool operator==(const FormatTable&, const FormatTable&) = default;
};

struct LayerSpec {
  std::string name;
  int in_channels = 1;
  int out_channels = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  Padding padding = Padding::Valid;
  Activation activation = Activation::None;
  QuantScheme scheme = QuantScheme::FourD;

  int coeff_precision = 8;
  FormatTable coeff_formats;
  int input_data_precision = 8;
  std::vector<QFormat> input_formats;
  int accumulator_precision = 16;
  QFormat accumulator_format;
  int output_data_precision = 8;
  std::vector<QFormat> output_formats;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

struct Violation {
  std::string field;
  std::string message;
};

/// Every broken LayerSpec invariant; empty when the spec is consistent.
std::vector<Violation> validate(const LayerSpec& spec);

/// Per-layer violations (field prefixed by the layer name) plus channel chaining.
std::vector<Violation> validate(const NetworkSpec& net);

/// Throws UsageError listing every violation.
void require_valid(const LayerSpec& spec);
void require_valid(const NetworkSpec& net);

QFormat format_for(const LayerSpec& spec, int ic, int oc);

/// format_for expanded to every kernel, index oc * Ci + ic.
std::vector<QFormat> kernel_formats(const LayerSpec& spec);

/// Quantizes (Co, Ci, kh, kw) weights with each kernel's own format.
QTensor quantize_weights(const FloatTensor& w, const LayerSpec& spec,
                         RoundingMode mode = RoundingMode::NearestEven);

}  // namespace hpq
