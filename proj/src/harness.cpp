#include "hpq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hpq/engine.hpp"
#include "hpq/error.hpp"
#include "hpq/fixtures.hpp"

namespace hpq {

NetworkSpec calibrate_network(const std::vector<FloatTensor>& weights,
                              const std::vector<FloatTensor>& samples, QuantScheme scheme,
                              const PipelineConfig& config) {
  if (weights.empty()) throw UsageError("no weight tensors");
  NetworkSpec skeleton;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    skeleton.layers.push_back(make_skeleton("conv" + std::to_string(l + 1), weights[l], scheme,
                                            config.coeff_bits, config.stride, config.padding,
                                            config.activation, config.rounding));
  }
  NetworkSpec net = calibrate_activations(skeleton, weights, samples, config.data, config.rounding);
  require_valid(net);
  return net;
}

CompareReport compare_schemes(const std::vector<FloatTensor>& weights,
                              const std::vector<FloatTensor>& samples,
                              std::span<const std::int32_t> labels, const PipelineConfig& config) {
  if (!labels.empty() && labels.size() != samples.size()) {
    throw UsageError("compare: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(samples.size()) + " samples");
  }
  CompareReport report;
  for (QuantScheme scheme : {QuantScheme::TwoD, QuantScheme::ThreeD, QuantScheme::FourD}) {
    const NetworkSpec net = calibrate_network(weights, samples, scheme, config);
    std::vector<QTensor> qweights;
    std::vector<double> w_ref, w_test;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      qweights.push_back(quantize_weights(weights[l], net.layers[l], config.rounding));
      const FloatTensor deq = dequantize(qweights.back());
      w_ref.insert(w_ref.end(), weights[l].data.begin(), weights[l].data.end());
      w_test.insert(w_test.end(), deq.data.begin(), deq.data.end());
    }

    std::vector<double> out_ref, out_test;
    std::size_t wrong = 0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const NetworkRun run =
          run_network(net, qweights, samples[s], config.rounding, config.threads, weights);
      const FloatTensor deq = dequantize(run.outputs.back());
      const FloatTensor& ref = run.reference.back();
      out_ref.insert(out_ref.end(), ref.data.begin(), ref.data.end());
      out_test.insert(out_test.end(), deq.data.begin(), deq.data.end());
      if (!labels.empty() && classify(deq) != labels[s]) ++wrong;
    }

    SchemeRow row;
    row.scheme = scheme;
    row.weight_sqnr_db = sqnr_db(w_ref, w_test);
    row.output_sqnr_db = sqnr_db(out_ref, out_test);
    if (!labels.empty()) {
      row.class_error_pct = 100.0 * static_cast<double>(wrong) / static_cast<double>(labels.size());
    }
    report.rows.push_back(row);
  }
  return report;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string render(const CompareReport& report) {
  const bool labels = std::any_of(report.rows.begin(), report.rows.end(),
                                  [](const SchemeRow& r) { return r.class_error_pct.has_value(); });
  std::vector<std::vector<std::string>> table;
  table.push_back({"scheme", "weight_sqnr_db", "output_sqnr_db"});
  if (labels) table.back().push_back("class_error_pct");
  for (const SchemeRow& r : report.rows) {
    table.push_back({std::string(to_string(r.scheme)), format_number(r.weight_sqnr_db),
                     format_number(r.output_sqnr_db)});
    if (labels) table.back().push_back(r.class_error_pct ? format_number(*r.class_error_pct) : "-");
  }
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        out += row[c] + std::string(width[c] - row[c].size(), ' ');
      } else {
        out += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace hpq
