#include "hpq/tensor_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <string>

#include "hpq/error.hpp"

namespace hpq {

namespace {

constexpr std::array<char, 4> kCodeMagic{'H', 'P', 'Q', 'T'};
constexpr std::array<char, 4> kFloatMagic{'H', 'P', 'F', 'T'};
constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kDtypeInt32 = 0;
constexpr std::uint8_t kDtypeFloat64 = 1;

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

template <class U>
U get_le(const unsigned char* p) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(p[i]) << (8 * i);
  return value;
}

std::string header(const std::array<char, 4>& magic, std::uint8_t dtype,
                   const std::vector<std::size_t>& dims) {
  if (dims.size() > std::numeric_limits<std::uint8_t>::max()) {
    throw UsageError("tensor rank exceeds 255");
  }
  std::string out(magic.begin(), magic.end());
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(dtype));
  out.push_back(static_cast<char>(dims.size()));
  for (std::size_t d : dims) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw UsageError("tensor dim exceeds 2^32-1");
    put_le(out, static_cast<std::uint32_t>(d));
  }
  return out;
}

void check_length(const std::vector<std::size_t>& dims, std::size_t n) {
  if (element_count(dims) != n) throw UsageError("tensor data length does not match dims");
}

void emit(std::ostream& os, const std::string& bytes) {
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw FormatError("failed to write tensor");
}

}  // namespace

void write_tensor(std::ostream& os, const CodeTensor& t) {
  check_length(t.dims, t.size());
  std::string bytes = header(kCodeMagic, kDtypeInt32, t.dims);
  for (std::int32_t v : t.data) put_le(bytes, static_cast<std::uint32_t>(v));
  emit(os, bytes);
}

void write_tensor(std::ostream& os, const FloatTensor& t) {
  check_length(t.dims, t.size());
  std::string bytes = header(kFloatMagic, kDtypeFloat64, t.dims);
  for (double v : t.data) put_le(bytes, std::bit_cast<std::uint64_t>(v));
  emit(os, bytes);
}

AnyTensor read_tensor(std::istream& is) {
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 7) throw FormatError("tensor file truncated: header incomplete");

  const bool codes = std::memcmp(p, kCodeMagic.data(), 4) == 0;
  const bool floats = std::memcmp(p, kFloatMagic.data(), 4) == 0;
  if (!codes && !floats) throw FormatError("bad tensor magic (expected HPQT or HPFT)");
  if (p[4] != kVersion) throw FormatError("unsupported tensor version " + std::to_string(p[4]));
  const std::uint8_t dtype = p[5];
  if ((codes && dtype != kDtypeInt32) || (floats && dtype != kDtypeFloat64)) {
    throw FormatError("dtype " + std::to_string(dtype) + " does not match magic");
  }
  const std::size_t rank = p[6];
  std::size_t offset = 7;
  if (bytes.size() < offset + 4 * rank) throw FormatError("tensor file truncated: dims incomplete");
  std::vector<std::size_t> dims(rank);
  for (std::size_t i = 0; i < rank; ++i, offset += 4) dims[i] = get_le<std::uint32_t>(p + offset);

  const std::size_t elem = codes ? 4 : 8;
  const std::size_t count = element_count(dims);
  if (bytes.size() - offset != count * elem) {
    throw FormatError("tensor payload is " + std::to_string(bytes.size() - offset) +
                      " bytes, expected " + std::to_string(count * elem));
  }
  if (codes) {
    CodeTensor t{std::move(dims), std::vector<std::int32_t>(count)};
    for (std::size_t i = 0; i < count; ++i, offset += 4) {
      t.data[i] = static_cast<std::int32_t>(get_le<std::uint32_t>(p + offset));
    }
    return t;
  }
  FloatTensor t{std::move(dims), std::vector<double>(count)};
  for (std::size_t i = 0; i < count; ++i, offset += 8) {
    t.data[i] = std::bit_cast<double>(get_le<std::uint64_t>(p + offset));
    if (!std::isfinite(t.data[i])) throw FormatError("tensor contains a non-finite value");
  }
  return t;
}

void write_tensor_file(const std::filesystem::path& path, const CodeTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_tensor(os, t);
}

void write_tensor_file(const std::filesystem::path& path, const FloatTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_tensor(os, t);
}

AnyTensor read_tensor_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return read_tensor(is);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

FloatTensor read_float_tensor(const std::filesystem::path& path) {
  AnyTensor t = read_tensor_file(path);
  if (auto* f = std::get_if<FloatTensor>(&t)) return std::move(*f);
  throw FormatError(path.string() + ": expected an HPFT float tensor");
}

CodeTensor read_code_tensor(const std::filesystem::path& path) {
  AnyTensor t = read_tensor_file(path);
  if (auto* c = std::get_if<CodeTensor>(&t)) return std::move(*c);
  throw FormatError(path.string() + ": expected an HPQT code tensor");
}

}  // namespace hpq

namespace hpq {

std::vector<FloatTensor> split_batch(const FloatTensor& batch) {
  if (batch.dims.size() == 3) return {batch};
  if (batch.dims.size() != 4) throw UsageError("sample batch must be (N, C, H, W) or (C, H, W)");
  const std::size_t n = batch.dims[0];
  const std::vector<std::size_t> dims(batch.dims.begin() + 1, batch.dims.end());
  const std::size_t len = element_count(dims);
  std::vector<FloatTensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto first = batch.data.begin() + static_cast<std::ptrdiff_t>(i * len);
    out.push_back({dims, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len))});
  }
  return out;
}

FloatTensor stack_batch(const std::vector<FloatTensor>& samples) {
  if (samples.empty()) throw UsageError("stack_batch: no samples");
  FloatTensor out;
  out.dims.push_back(samples.size());
  out.dims.insert(out.dims.end(), samples.front().dims.begin(), samples.front().dims.end());
  for (const FloatTensor& s : samples) {
    if (s.dims != samples.front().dims) throw UsageError("stack_batch: samples differ in shape");
    out.data.insert(out.data.end(), s.data.begin(), s.data.end());
  }
  return out;
}

}  // namespace hpq
