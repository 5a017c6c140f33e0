#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hpq/harness.hpp"

namespace hpq {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitInternalError = 2;

struct CalibrateOptions {
  std::vector<std::filesystem::path> weights;  // HPFT, one per layer
  std::filesystem::path samples;               // HPFT (N, C, H, W) or (C, H, W)
  QuantScheme scheme = QuantScheme::TwoD;
  PipelineConfig config;
  std::filesystem::path output;  // empty: stdout
};

struct QuantizeOptions {
  std::filesystem::path descriptor;
  std::vector<std::filesystem::path> weights;  // HPFT, one per layer
  std::vector<std::filesystem::path> outputs;  // HPQT, one per layer
  RoundingMode rounding = RoundingMode::NearestEven;
};

struct RunOptions {
  std::filesystem::path descriptor;
  std::vector<std::filesystem::path> weights;  // HPQT, one per layer
  std::filesystem::path input;                 // HPFT (C, H, W)
  std::filesystem::path output;                // HPQT codes of the last layer
  RoundingMode rounding = RoundingMode::NearestEven;
  int threads = 1;
};

struct CompareOptions {
  std::vector<std::filesystem::path> weights;
  std::filesystem::path samples;
  std::filesystem::path labels;  // optional HPQT rank-1 class indices
  PipelineConfig config;
};

struct FixtureOptions {
  std::string kind = "compare";  // compare | uniform | zero | random
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

int cmd_validate(const std::filesystem::path& descriptor, std::ostream& out, std::ostream& err);
int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err);
int cmd_quantize(const QuantizeOptions& opts, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err);
int cmd_fixture(const FixtureOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace hpq
