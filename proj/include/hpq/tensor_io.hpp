#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>

#include "hpq/model.hpp"

namespace hpq {

/// Binary tensor container.
///
///   magic   4 bytes  "HPQT" (int32 codes) or "HPFT" (float64 values)
///   version 1 byte   1
///   dtype   1 byte   0 = little-endian int32, 1 = little-endian IEEE float64
///   rank    1 byte
///   dims    rank x little-endian uint32
///   payload row-major elements, nothing after
using AnyTensor = std::variant<CodeTensor, FloatTensor>;

void write_tensor(std::ostream& os, const CodeTensor& t);
void write_tensor(std::ostream& os, const FloatTensor& t);

/// Throws FormatError on bad magic, version, dtype, truncation, trailing bytes or
/// non-finite float payloads.
AnyTensor read_tensor(std::istream& is);

void write_tensor_file(const std::filesystem::path& path, const CodeTensor& t);
void write_tensor_file(const std::filesystem::path& path, const FloatTensor& t);
AnyTensor read_tensor_file(const std::filesystem::path& path);
FloatTensor read_float_tensor(const std::filesystem::path& path);
CodeTensor read_code_tensor(const std::filesystem::path& path);

}  // namespace hpq

namespace hpq {

/// Splits a (N, C, H, W) batch into N samples; a rank-3 tensor is a batch of one.
std::vector<FloatTensor> split_batch(const FloatTensor& batch);
FloatTensor stack_batch(const std::vector<FloatTensor>& samples);

}  // namespace hpq
