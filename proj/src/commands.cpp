#include "hpq/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "hpq/descriptor.hpp"
#include "hpq/engine.hpp"
#include "hpq/error.hpp"
#include "hpq/fixtures.hpp"
#include "hpq/tensor_io.hpp"

namespace hpq {

namespace {

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
  return kExitUserError;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Parses a descriptor, printing diagnostics. Returns nullopt on parse errors.
std::optional<NetworkSpec> load_descriptor(const std::filesystem::path& path, std::ostream& err) {
  ParseResult result = parse_descriptor(read_text(path));
  for (const ParseError& e : result.errors) err << render(e, path.string()) << '\n';
  if (!result.ok()) return std::nullopt;
  return std::move(result.network);
}

std::vector<FloatTensor> load_weights(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw UsageError("no weight files given");
  std::vector<FloatTensor> out;
  for (const auto& p : paths) out.push_back(read_float_tensor(p));
  return out;
}

void require_layer_count(const NetworkSpec& net, std::size_t files, std::string_view what) {
  if (net.layers.size() != files) {
    throw UsageError("descriptor has " + std::to_string(net.layers.size()) + " layer(s) but " +
                     std::to_string(files) + " " + std::string(what) + " were given");
  }
}

}  // namespace

int cmd_validate(const std::filesystem::path& descriptor, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto net = load_descriptor(descriptor, err);
    if (!net) return kExitUserError;
    out << descriptor.string() << ": ok, " << net->layers.size() << " layer(s)\n";
    for (const LayerSpec& l : net->layers) {
      out << "  " << l.name << ": " << l.in_channels << " -> " << l.out_channels << " channels, "
          << l.kernel_h << 'x' << l.kernel_w << " kernel, " << to_string(l.scheme)
          << ", coeff " << l.coeff_precision << "b, input " << l.input_data_precision
          << "b, accumulator " << to_string(l.accumulator_format) << ' '
          << precision(l.accumulator_format) << "b, output " << l.output_data_precision << "b\n";
    }
    return kExitOk;
  });
}

int cmd_calibrate(const CalibrateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<FloatTensor> weights = load_weights(opts.weights);
    const std::vector<FloatTensor> samples = split_batch(read_float_tensor(opts.samples));
    const NetworkSpec net = calibrate_network(weights, samples, opts.scheme, opts.config);
    const std::string text = serialize(net);
    if (opts.output.empty()) {
      out << text;
    } else {
      std::ofstream os(opts.output, std::ios::binary);
      if (!os) throw FormatError("cannot open '" + opts.output.string() + "' for writing");
      os << text;
    }
    return kExitOk;
  });
}

int cmd_quantize(const QuantizeOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto net = load_descriptor(opts.descriptor, err);
    if (!net) return kExitUserError;
    require_layer_count(*net, opts.weights.size(), "weight files");
    require_layer_count(*net, opts.outputs.size(), "output paths");
    const std::vector<FloatTensor> weights = load_weights(opts.weights);
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const QTensor q = quantize_weights(weights[l], net->layers[l], opts.rounding);
      write_tensor_file(opts.outputs[l], CodeTensor{q.dims, q.codes});
      out << net->layers[l].name << " -> " << opts.outputs[l].string() << '\n';
    }
    return kExitOk;
  });
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto net = load_descriptor(opts.descriptor, err);
    if (!net) return kExitUserError;
    require_layer_count(*net, opts.weights.size(), "weight files");
    std::vector<QTensor> weights;
    for (std::size_t l = 0; l < net->layers.size(); ++l) {
      CodeTensor codes = read_code_tensor(opts.weights[l]);
      QTensor q{std::move(codes.dims), std::move(codes.data), kernel_formats(net->layers[l])};
      check_qtensor(q);
      weights.push_back(std::move(q));
    }
    const FloatTensor input = read_float_tensor(opts.input);
    const NetworkRun run = run_network(*net, weights, input, opts.rounding, opts.threads);
    const QTensor& last = run.outputs.back();
    write_tensor_file(opts.output, CodeTensor{last.dims, last.codes});
    for (std::size_t l = 0; l < run.reports.size(); ++l) {
      const LayerErrorReport& r = run.reports[l];
      err << net->layers[l].name << ": sqnr_db=" << format_number(r.sqnr_db)
          << " max_abs_err=" << format_number(r.max_abs_err)
          << " mismatches=" << r.mismatch_count << '\n';
    }
    out << opts.output.string() << '\n';
    return kExitOk;
  });
}

int cmd_compare(const CompareOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::vector<FloatTensor> weights = load_weights(opts.weights);
    const std::vector<FloatTensor> samples = split_batch(read_float_tensor(opts.samples));
    std::vector<std::int32_t> labels;
    if (!opts.labels.empty()) {
      CodeTensor t = read_code_tensor(opts.labels);
      if (t.dims.size() != 1) throw UsageError("labels must be a rank-1 tensor");
      labels = std::move(t.data);
    }
    out << render(compare_schemes(weights, samples, labels, opts.config));
    return kExitOk;
  });
}

int cmd_fixture(const FixtureOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Fixture f;
    if (opts.kind == "compare") {
      f = compare_fixture(opts.seed);
    } else if (opts.kind == "uniform") {
      f = uniform_fixture(opts.seed);
    } else if (opts.kind == "zero") {
      f = zero_fixture(opts.seed);
    } else if (opts.kind == "random") {
      f = random_fixture(opts.seed);
    } else {
      throw UsageError("unknown fixture kind '" + opts.kind + "'");
    }
    write_fixture(f, opts.out_dir);
    out << "wrote " << f.weights.size() << " weight file(s), " << f.samples.size()
        << " samples to " << opts.out_dir.string() << '\n';
    return kExitOk;
  });
}

}  // namespace hpq
