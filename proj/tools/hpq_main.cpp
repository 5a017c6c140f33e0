#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hpq/commands.hpp"

namespace {

const std::map<std::string, hpq::QuantScheme> kSchemes{
    {"2d", hpq::QuantScheme::TwoD}, {"3d", hpq::QuantScheme::ThreeD}, {"4d", hpq::QuantScheme::FourD}};
const std::map<std::string, hpq::RoundingMode> kRounding{
    {"even", hpq::RoundingMode::NearestEven},
    {"away", hpq::RoundingMode::NearestAway},
    {"trunc", hpq::RoundingMode::TruncateTowardNegInfinity}};
const std::map<std::string, hpq::Padding> kPadding{{"valid", hpq::Padding::Valid},
                                                   {"same", hpq::Padding::SameZero}};
const std::map<std::string, hpq::Activation> kActivation{{"none", hpq::Activation::None},
                                                         {"relu", hpq::Activation::ReLU}};

// Enum options are read as text and mapped once parsing is done.
struct EnumFlags {
  std::string rounding = "even";
  std::string padding = "valid";
  std::string activation = "none";
  std::string scheme = "2d";
};

template <class Map>
CLI::Option* add_choice(CLI::App* cmd, const std::string& flag, std::string& value, const Map& choices,
                        const std::string& help) {
  std::vector<std::string> names;
  for (const auto& [name, _] : choices) names.push_back(name);
  return cmd->add_option(flag, value, help)->check(CLI::IsMember(names));
}

void add_rounding(CLI::App* cmd, EnumFlags& flags) {
  add_choice(cmd, "--rounding", flags.rounding, kRounding, "even, away or trunc");
}

void add_pipeline(CLI::App* cmd, hpq::PipelineConfig& cfg, EnumFlags& flags) {
  cmd->add_option("--coeff-bits", cfg.coeff_bits, "Coefficient precision")->check(CLI::Range(2, 32));
  cmd->add_option("--data-bits", cfg.data.input_bits, "Input data precision")->check(CLI::Range(2, 32));
  cmd->add_option("--acc-bits", cfg.data.accumulator_bits, "Accumulator precision")
      ->check(CLI::Range(2, 32));
  cmd->add_option("--out-bits", cfg.data.output_bits, "Output data precision")->check(CLI::Range(2, 32));
  cmd->add_option("--stride", cfg.stride, "Convolution stride")->check(CLI::PositiveNumber);
  add_choice(cmd, "--padding", flags.padding, kPadding, "valid or same");
  add_choice(cmd, "--activation", flags.activation, kActivation, "none or relu");
  cmd->add_option("--threads", cfg.threads, "Worker threads (never changes output)")
      ->check(CLI::PositiveNumber);
  add_rounding(cmd, flags);
}

void apply(const EnumFlags& flags, hpq::PipelineConfig& cfg) {
  cfg.rounding = kRounding.at(flags.rounding);
  cfg.padding = kPadding.at(flags.padding);
  cfg.activation = kActivation.at(flags.activation);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid-precision fixed-point convolution toolkit"};
  app.require_subcommand(1);

  std::filesystem::path validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and check a .hpq descriptor");
  validate->add_option("descriptor", validate_path)->required();

  hpq::CalibrateOptions cal;
  auto* calibrate = app.add_subcommand("calibrate", "Choose all formats from float weights and samples");
  calibrate->add_option("--weights", cal.weights, "HPFT weights, one per layer")->required();
  calibrate->add_option("--samples", cal.samples, "HPFT sample batch")->required();
  EnumFlags cal_flags;
  add_choice(calibrate, "--scheme", cal_flags.scheme, kSchemes, "2d, 3d or 4d");
  calibrate->add_option("-o,--output", cal.output, "Descriptor path (default stdout)");
  add_pipeline(calibrate, cal.config, cal_flags);

  hpq::QuantizeOptions quant;
  auto* quantize = app.add_subcommand("quantize", "Quantize float weights with a descriptor");
  quantize->add_option("descriptor", quant.descriptor)->required();
  quantize->add_option("--weights", quant.weights, "HPFT weights, one per layer")->required();
  quantize->add_option("-o,--output", quant.outputs, "HPQT outputs, one per layer")->required();
  EnumFlags quant_flags;
  add_rounding(quantize, quant_flags);

  hpq::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run the quantized network on one input");
  run_cmd->add_option("descriptor", run.descriptor)->required();
  run_cmd->add_option("--weights", run.weights, "HPQT weights, one per layer")->required();
  run_cmd->add_option("--input", run.input, "HPFT input (C, H, W)")->required();
  run_cmd->add_option("-o,--output", run.output, "HPQT output codes")->required();
  run_cmd->add_option("--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);
  EnumFlags run_flags;
  add_rounding(run_cmd, run_flags);

  hpq::CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "Compare 2D, 3D and 4D quantization");
  compare->add_option("--weights", cmp.weights, "HPFT weights, one per layer")->required();
  compare->add_option("--samples", cmp.samples, "HPFT sample batch")->required();
  compare->add_option("--labels", cmp.labels, "HPQT rank-1 labels");
  EnumFlags cmp_flags;
  add_pipeline(compare, cmp.config, cmp_flags);

  hpq::FixtureOptions fix;
  auto* fixture = app.add_subcommand("fixture", "Generate a seeded test fixture");
  fixture->add_option("--kind", fix.kind, "compare, uniform, zero or random")
      ->check(CLI::IsMember({"compare", "uniform", "zero", "random"}));
  fixture->add_option("--seed", fix.seed, "Generator seed");
  fixture->add_option("--out-dir", fix.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hpq::kExitOk : hpq::kExitUserError;
  }

  apply(cal_flags, cal.config);
  cal.scheme = kSchemes.at(cal_flags.scheme);
  quant.rounding = kRounding.at(quant_flags.rounding);
  run.rounding = kRounding.at(run_flags.rounding);
  apply(cmp_flags, cmp.config);

  if (*validate) return hpq::cmd_validate(validate_path, std::cout, std::cerr);
  if (*calibrate) return hpq::cmd_calibrate(cal, std::cout, std::cerr);
  if (*quantize) return hpq::cmd_quantize(quant, std::cout, std::cerr);
  if (*run_cmd) return hpq::cmd_run(run, std::cout, std::cerr);
  if (*compare) return hpq::cmd_compare(cmp, std::cout, std::cerr);
  if (*fixture) return hpq::cmd_fixture(fix, std::cout, std::cerr);
  return hpq::kExitUserError;
}
