#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "daq/formats.hpp"
#include "daq/ldra.hpp"
#include "daq/pipeline.hpp"

namespace daq {

inline nlohmann::json to_json(const LayerReport &r) {
  return {
      {"method", r.method},
      {"format", r.format},
      {"group_size", r.group_size},
      {"rows", r.rows},
      {"cols", r.cols},
      {"samples", r.samples},
      {"groups", r.groups},
      {"degenerate_groups", r.degenerate_groups},
      {"init_loss", r.init_loss},
      {"total_loss", r.total_loss},
      {"group_loss", {{"min", r.group_loss_summary.min},
                      {"median", r.group_loss_summary.median},
                      {"max", r.group_loss_summary.max}}},
      {"group_losses", r.group_losses},
      {"iterations", {{"mean", r.mean_iterations}, {"max", r.max_iterations}}},
      {"wall_seconds", r.wall_seconds},
  };
}

inline nlohmann::json to_json(const ComparisonReport &c) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    auto row = to_json(c.rows[i]);
    row.erase("group_losses");
    nlohmann::json imp = nlohmann::json::object();
    for (std::size_t j = 0; j < c.rows.size(); ++j)
      if (j != i && c.improvements[i][j])
        imp[c.rows[j].method] = *c.improvements[i][j];
    row["improvement_vs"] = imp;
    row["best"] = (i == c.best);
    rows.push_back(std::move(row));
  }
  return {{"methods", rows}, {"best", c.rows.at(c.best).method}};
}

/// One JSON object per line: group index, iteration, step size, loss, params.
inline void write_trace_lines(std::ostream &os, std::size_t group, const OptimizeTrace &trace) {
  for (const auto &p : trace.points) {
    nlohmann::json line = {{"group", group},           {"t", p.t},
                           {"eta", p.eta},             {"loss", p.loss},
                           {"scale", p.params.scale},  {"zero", p.params.zero}};
    os << line.dump() << '\n';
  }
}

namespace detail {

inline std::string fmt_num(const char *spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

} // namespace detail

/// Aligned plain-text table of a comparison. Improvements are relative to
/// the first method.
inline std::string to_text(const ComparisonReport &c) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %16s %16s %10s %12s  %s\n", "method", "total_loss",
                "init_loss", "mean_iter", "vs_first_%", "");
  os << line;
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const auto &r = c.rows[i];
    const auto &imp = c.improvements[i].empty() ? std::nullopt : c.improvements[i][0];
    const std::string imp_s = (i == 0 || !imp) ? "-" : detail::fmt_num("%.3f", *imp);
    std::snprintf(line, sizeof line, "%-14s %16.8g %16.8g %10.2f %12s  %s\n", r.method.c_str(),
                  r.total_loss, r.init_loss, r.mean_iterations, imp_s.c_str(),
                  i == c.best ? "*best" : "");
    os << line;
  }
  return os.str();
}

inline std::string to_csv(const ComparisonReport &c) {
  std::ostringstream os;
  os << "method,format,group_size,total_loss,init_loss,mean_iterations,best";
  for (const auto &r : c.rows)
    os << ",improvement_vs_" << r.method;
  os << '\n';
  for (std::size_t i = 0; i < c.rows.size(); ++i) {
    const auto &r = c.rows[i];
    os << r.method << ',' << r.format << ',' << r.group_size << ','
       << detail::fmt_num("%.17g", r.total_loss) << ',' << detail::fmt_num("%.17g", r.init_loss)
       << ',' << detail::fmt_num("%.6g", r.mean_iterations) << ',' << (i == c.best ? 1 : 0);
    for (std::size_t j = 0; j < c.rows.size(); ++j) {
      os << ',';
      if (j != i && c.improvements[i][j])
        os << detail::fmt_num("%.6g", *c.improvements[i][j]);
    }
    os << '\n';
  }
  return os.str();
}

inline nlohmann::json codebook_json(const QuantFormat &fmt) { return fmt.codebook; }

} // namespace daq
