#include "hpq/model.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "hpq/error.hpp"

namespace hpq {

std::string_view to_string(QuantScheme s) noexcept {
  switch (s) {
    case QuantScheme::TwoD: return "2D";
    case QuantScheme::ThreeD: return "3D";
    case QuantScheme::FourD: return "4D";
  }
  return "?";
}

std::string_view to_string(Padding p) noexcept {
  return p == Padding::Valid ? "valid" : "same";
}

std::string_view to_string(Activation a) noexcept {
  return a == Activation::None ? "none" : "relu";
}

std::size_t element_count(const std::vector<std::size_t>& dims) noexcept {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

FloatTensor make_float_tensor(std::vector<std::size_t> dims, std::vector<double> data) {
  if (element_count(dims) != data.size()) {
    throw UsageError("tensor data length " + std::to_string(data.size()) +
                     " does not match dims (" + std::to_string(element_count(dims)) + ")");
  }
  for (double v : data) {
    if (!std::isfinite(v)) throw DomainError("tensor contains a non-finite value");
  }
  return {std::move(dims), std::move(data)};
}

FloatTensor zeros(std::vector<std::size_t> dims) {
  const std::size_t n = element_count(dims);
  return {std::move(dims), std::vector<double>(n, 0.0)};
}

QFormat QTensor::format_at(std::size_t flat_index) const {
  if (dims.size() == 4) {
    return formats[flat_index / (dims[2] * dims[3])];
  }
  if (dims.size() == 3) {
    return formats[flat_index / (dims[1] * dims[2])];
  }
  throw UsageError("QTensor must have rank 3 (data) or 4 (weights)");
}

void check_qtensor(const QTensor& t) {
  std::size_t expected_formats = 0;
  if (t.dims.size() == 4) {
    expected_formats = t.dims[0] * t.dims[1];
  } else if (t.dims.size() == 3) {
    expected_formats = t.dims[0];
  } else {
    throw UsageError("QTensor must have rank 3 (data) or 4 (weights)");
  }
  if (t.formats.size() != expected_formats) {
    throw UsageError("QTensor has " + std::to_string(t.formats.size()) + " formats, expected " +
                     std::to_string(expected_formats));
  }
  if (t.codes.size() != element_count(t.dims)) {
    throw UsageError("QTensor code count does not match dims");
  }
  for (QFormat f : t.formats) require_valid(f);
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    const QFormat f = t.format_at(i);
    if (t.codes[i] < min_code(f) || t.codes[i] > max_code(f)) {
      throw UsageError("QTensor code " + std::to_string(t.codes[i]) + " outside " + to_string(f));
    }
  }
}

FloatTensor dequantize(const QTensor& t) {
  check_qtensor(t);
  FloatTensor out{t.dims, std::vector<double>(t.codes.size())};
  for (std::size_t i = 0; i < t.codes.size(); ++i) out.data[i] = dequantize(t.at(i));
  return out;
}

QTensor quantize_data(const FloatTensor& x, const std::vector<QFormat>& channel_formats,
                      RoundingMode mode) {
  if (x.dims.size() != 3) throw UsageError("data tensor must be (C, H, W)");
  if (channel_formats.size() != x.dims[0]) {
    throw UsageError("data tensor has " + std::to_string(x.dims[0]) + " channels but " +
                     std::to_string(channel_formats.size()) + " formats were given");
  }
  QTensor q{x.dims, std::vector<std::int32_t>(x.size()), channel_formats};
  const std::size_t plane = x.dims[1] * x.dims[2];
  for (std::size_t i = 0; i < x.size(); ++i) {
    q.codes[i] = static_cast<std::int32_t>(quantize(x.data[i], channel_formats[i / plane], mode).code);
  }
  return q;
}

PartitionKey partition_key(QuantScheme scheme, int ic, int oc) noexcept {
  switch (scheme) {
    case QuantScheme::TwoD: return {ic, oc};
    case QuantScheme::ThreeD: return {PartitionKey::kAll, oc};
    case QuantScheme::FourD: return {};
  }
  return {};
}

namespace {

std::string describe(const PartitionKey& k) {
  auto part = [](int v) { return v == PartitionKey::kAll ? std::string("*") : std::to_string(v); };
  return "(" + part(k.ic) + "," + part(k.oc) + ")";
}

void check_format(std::vector<Violation>& out, const std::string& field, QFormat f, int declared) {
  if (!is_valid(f)) {
    out.push_back({field, "invalid format " + to_string(f)});
    return;
  }
  if (precision(f) != declared) {
    out.push_back({field, "precision mismatch: " + to_string(f) + " is " +
                              std::to_string(precision(f)) + "b, declared " +
                              std::to_string(declared) + "b"});
  }
}

void check_precision(std::vector<Violation>& out, const std::string& field, int bits) {
  if (bits < QFormat::kMinPrecision || bits > QFormat::kMaxPrecision) {
    out.push_back({field, "precision " + std::to_string(bits) + "b outside [2, 32]"});
  }
}

}  // namespace

std::vector<Violation> validate(const LayerSpec& spec) {
  std::vector<Violation> out;
  auto positive = [&](const char* field, int v) {
    if (v <= 0) out.push_back({field, std::string(field) + " must be positive"});
  };
  positive("in_channels", spec.in_channels);
  positive("out_channels", spec.out_channels);
  positive("kernel_h", spec.kernel_h);
  positive("kernel_w", spec.kernel_w);
  positive("stride", spec.stride);
  check_precision(out, "coeff_precision", spec.coeff_precision);
  check_precision(out, "input_data_precision", spec.input_data_precision);
  check_precision(out, "accumulator_precision", spec.accumulator_precision);
  check_precision(out, "output_data_precision", spec.output_data_precision);

  if (spec.coeff_formats.scheme != spec.scheme) {
    out.push_back({"coeff_formats", "coeff_formats scheme " +
                                        std::string(to_string(spec.coeff_formats.scheme)) +
                                        " does not match layer scheme " +
                                        std::string(to_string(spec.scheme))});
  }
  std::set<PartitionKey> expected;
  for (int ic = 0; ic < spec.in_channels; ++ic) {
    for (int oc = 0; oc < spec.out_channels; ++oc) {
      expected.insert(partition_key(spec.scheme, ic, oc));
    }
  }
  for (const PartitionKey& k : expected) {
    if (!spec.coeff_formats.entries.contains(k)) {
      out.push_back({"coeff_formats", "incomplete coeff_formats: missing " + describe(k)});
    }
  }
  for (const auto& [k, f] : spec.coeff_formats.entries) {
    const std::string field = "coeff_formats" + describe(k);
    if (!expected.contains(k)) {
      out.push_back({field, "unexpected coeff_formats key " + describe(k)});
    }
    check_format(out, field, f, spec.coeff_precision);
  }

  auto check_list = [&](const char* field, const std::vector<QFormat>& fs, int count, int bits) {
    if (count > 0 && fs.size() != static_cast<std::size_t>(count)) {
      out.push_back({field, std::string(field) + " has " + std::to_string(fs.size()) +
                                " entries, expected " + std::to_string(count)});
    }
    for (std::size_t i = 0; i < fs.size(); ++i) {
      check_format(out, std::string(field) + "[" + std::to_string(i) + "]", fs[i], bits);
    }
  };
  check_list("input_formats", spec.input_formats, spec.in_channels, spec.input_data_precision);
  check_format(out, "accumulator_format", spec.accumulator_format, spec.accumulator_precision);
  check_list("output_formats", spec.output_formats, spec.out_channels, spec.output_data_precision);
  return out;
}

std::vector<Violation> validate(const NetworkSpec& net) {
  std::vector<Violation> out;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerSpec& layer = net.layers[l];
    for (Violation v : validate(layer)) {
      v.field = layer.name + "." + v.field;
      out.push_back(std::move(v));
    }
    if (l > 0 && layer.in_channels != net.layers[l - 1].out_channels) {
      out.push_back({layer.name + ".in_channels",
                     "layer has " + std::to_string(layer.in_channels) +
                         " input channels but the previous layer produces " +
                         std::to_string(net.layers[l - 1].out_channels)});
    }
  }
  return out;
}

namespace {

[[noreturn]] void throw_violations(const std::vector<Violation>& vs) {
  std::string msg = "invalid layer spec:";
  for (const Violation& v : vs) msg += "\n  " + v.field + ": " + v.message;
  throw UsageError(msg);
}

}  // namespace

void require_valid(const LayerSpec& spec) {
  if (auto vs = validate(spec); !vs.empty()) throw_violations(vs);
}

void require_valid(const NetworkSpec& net) {
  if (auto vs = validate(net); !vs.empty()) throw_violations(vs);
}

QFormat format_for(const LayerSpec& spec, int ic, int oc) {
  if (ic < 0 || ic >= spec.in_channels || oc < 0 || oc >= spec.out_channels) {
    throw UsageError("format_for: kernel (" + std::to_string(ic) + "," + std::to_string(oc) +
                     ") outside " + std::to_string(spec.in_channels) + "x" +
                     std::to_string(spec.out_channels));
  }
  auto it = spec.coeff_formats.entries.find(partition_key(spec.scheme, ic, oc));
  if (it == spec.coeff_formats.entries.end()) {
    throw UsageError("format_for: no coefficient format for kernel (" + std::to_string(ic) + "," +
                     std::to_string(oc) + ")");
  }
  return it->second;
}

std::vector<QFormat> kernel_formats(const LayerSpec& spec) {
  std::vector<QFormat> out;
  out.reserve(static_cast<std::size_t>(spec.in_channels * spec.out_channels));
  for (int oc = 0; oc < spec.out_channels; ++oc) {
    for (int ic = 0; ic < spec.in_channels; ++ic) out.push_back(format_for(spec, ic, oc));
  }
  return out;
}

QTensor quantize_weights(const FloatTensor& w, const LayerSpec& spec, RoundingMode mode) {
  require_valid(spec);
  const std::vector<std::size_t> expected{
      static_cast<std::size_t>(spec.out_channels), static_cast<std::size_t>(spec.in_channels),
      static_cast<std::size_t>(spec.kernel_h), static_cast<std::size_t>(spec.kernel_w)};
  if (w.dims != expected || w.data.size() != element_count(expected)) {
    throw UsageError("quantize_weights: weights must be (Co, Ci, kh, kw) = (" +
                     std::to_string(spec.out_channels) + ", " + std::to_string(spec.in_channels) +
                     ", " + std::to_string(spec.kernel_h) + ", " +
                     std::to_string(spec.kernel_w) + ")");
  }
  QTensor q{w.dims, std::vector<std::int32_t>(w.size()), kernel_formats(spec)};
  for (std::size_t i = 0; i < w.size(); ++i) {
    q.codes[i] = static_cast<std::int32_t>(quantize(w.data[i], q.format_at(i), mode).code);
  }
  return q;
}

}  // namespace hpq
