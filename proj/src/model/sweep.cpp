#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "rgnet/errors.hpp"
#include "rgnet/trainer.hpp"

namespace rgnet {

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<SweepRow> sweep(const RunConfig& base, const Dataset& dataset, const std::string& axis,
                            std::span<const double> values, const std::function<void(const SweepRow&)>& on_row) {
  if (std::find(std::begin(kSweepAxes), std::end(kSweepAxes), axis) == std::end(kSweepAxes)) {
    throw ConfigError("unknown sweep axis '" + axis + "'", "axis");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value", "values");

  std::vector<SweepRow> rows;
  std::optional<RGNetModel> shared;  // top_k does not influence training
  for (double v : values) {
    SweepRow row;
    row.axis = axis;
    row.value = v;
    row.config = base;
    set_config_value(row.config, axis, format_value(v));
    // Every row reports R@k at each swept top_k so the CSV columns line up.
    auto& rk = row.config.eval.retrieval_ks;
    std::vector<std::int64_t> wanted{row.config.train.top_k};
    if (axis == "top_k") {
      for (double u : values) wanted.push_back(static_cast<std::int64_t>(std::llround(u)));
    }
    for (auto k : wanted) {
      if (std::find(rk.begin(), rk.end(), k) == rk.end()) rk.push_back(k);
    }
    std::sort(rk.begin(), rk.end());
    row.config.validate();

    RGNetModel model = nullptr;
    if (axis == "top_k" && shared) {
      model = *shared;
    } else {
      model = init_parameters(row.config.train.model, row.config.train.seed);
      train(model, dataset, row.config.train);
      if (axis == "top_k") shared = model;
    }
    row.report = evaluate(model, dataset, row.config);
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  if (rows.empty()) return "axis,value\n";
  const auto& first = rows.front().report;
  std::string out = "axis,value,R@topk";
  for (const auto& [k, _] : first.retrieval) out += ",R@" + std::to_string(k);
  for (const auto& [key, _] : first.grounding) out += "," + grounding_label(key);
  for (const auto& [key, _] : first.oracle_grounding) out += ",oracle_" + grounding_label(key);
  out += '\n';
  for (const auto& row : rows) {
    const auto& r = row.report;
    out += row.axis + "," + format_value(row.value);
    const auto it = r.retrieval.find(row.config.train.top_k);
    out += "," + (it == r.retrieval.end() ? std::string("nan") : format_value(it->second));
    for (const auto& [k, _] : first.retrieval) {
      const auto jt = r.retrieval.find(k);
      out += "," + (jt == r.retrieval.end() ? std::string("nan") : format_value(jt->second));
    }
    for (const auto& [key, _] : first.grounding) {
      const auto jt = r.grounding.find(key);
      out += "," + (jt == r.grounding.end() ? std::string("nan") : format_value(jt->second));
    }
    for (const auto& [key, _] : first.oracle_grounding) {
      const auto jt = r.oracle_grounding.find(key);
      out += "," + (jt == r.oracle_grounding.end() ? std::string("nan") : format_value(jt->second));
    }
    out += '\n';
  }
  return out;
}

}  // namespace rgnet
