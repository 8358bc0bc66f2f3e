#pragma once

// Command-line front end. Kept in a header so tests can run subcommands
// in-process.

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "daq/daq.hpp"

namespace daq::cli {

enum ExitCode : int { kOk = 0, kBadInput = 2, kIo = 3, kInternal = 4 };

inline int exit_code_for(Errc code) {
  switch (code) {
  case Errc::IoError: return kIo;
  case Errc::InvariantViolation: return kInternal;
  default: return kBadInput;
  }
}

struct LayerArgs {
  std::string weights;
  std::string calib;
  std::string format = "nf";
  int bits = 4;
  std::int64_t group_size = 256;
  unsigned workers = 1;
  double clip_rate = 1.0;
  double m = 2.275;
  double eta0 = 1e-3;
  double decay = 0.05;
  double eps = 1e-4;
  int iters = 200;
  int patience = 50;
  bool no_scale = false;
  bool no_zero = false;
  bool ldra = false;

  void add_to(CLI::App &app) {
    app.add_option("--weights", weights, "Weight matrix (DAQT)")->required();
    app.add_option("--calib", calib, "Calibration activations (DAQT), in_features x samples")
        ->required();
    app.add_option("--format", format, "Quantization data type")
        ->check(CLI::IsMember({"nf", "int"}));
    app.add_option("--bits", bits, "Bit width");
    app.add_option("--group-size", group_size, "Weights per group, -1 for one group per row");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--clip-rate", clip_rate, "Percentile clipping rate (percent)");
    app.add_option("--m", m, "DCA clipping rate (percent)");
    app.add_option("--eta0", eta0, "LDRA initial learning rate");
    app.add_option("--decay", decay, "LDRA learning-rate decay");
    app.add_option("--eps", eps, "LDRA finite-difference step");
    app.add_option("--iters", iters, "LDRA iteration budget (<= 1000)");
    app.add_option("--patience", patience, "LDRA early-stop window");
    app.add_flag("--no-scale", no_scale, "Freeze the scale during LDRA");
    app.add_flag("--no-zero", no_zero, "Freeze the zero-point during LDRA");
    app.add_flag("--ldra", ldra, "Refine any method's parameters with LDRA");
  }

  MethodOptions method_options() const {
    MethodOptions o;
    o.dca.clip_rate = m;
    o.ldra = LdraConfig{eta0, decay, eps, iters, patience, !no_scale, !no_zero};
    o.clip_rate = clip_rate;
    return o;
  }

  MethodSpec method(const std::string &name) const {
    MethodSpec spec = method_from_name(name, method_options());
    if (ldra && !spec.ldra) {
      spec.ldra = true;
      spec.name += "+ldra";
    }
    return spec;
  }

  LayerOptions layer_options(const std::string &method_name) const {
    return {parse_format_kind(format), bits, group_size, method(method_name), workers, false};
  }
};

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    fail(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out)
    fail(Errc::IoError, "write failed for " + path.string());
}

inline std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"DAQ: density-centric weight quantization toolkit", "daq"};
  app.require_subcommand(1);

  // quantize
  LayerArgs qargs;
  std::string q_method = "daq", q_out, q_report;
  bool q_trace = false;
  auto *quantize = app.add_subcommand("quantize", "Quantize one layer and write a DAQQ artifact");
  qargs.add_to(*quantize);
  quantize->add_option("--method", q_method, "minmax|percentile|grid|dca|daq|ldra|daq-no-zero|daq-no-scale");
  quantize->add_option("--out", q_out, "Packed output (DAQQ)")->required();
  quantize->add_option("--report", q_report, "JSON report path");
  quantize->add_flag("--trace", q_trace, "Write LDRA traces to <out>.trace.jsonl");

  // compare
  LayerArgs cargs;
  std::string c_methods = "minmax,percentile,grid,dca,daq", c_report, c_csv;
  auto *comp = app.add_subcommand("compare", "Run several methods on one layer and tabulate losses");
  cargs.add_to(*comp);
  comp->add_option("--methods", c_methods, "Comma-separated method list");
  comp->add_option("--report", c_report, "JSON report path");
  comp->add_option("--csv", c_csv, "CSV report path");

  // codebook
  int cb_bits = 4;
  std::string cb_format = "nf";
  auto *codebook = app.add_subcommand("codebook", "Print a format's codebook as JSON");
  codebook->add_option("--bits", cb_bits, "Bit width");
  codebook->add_option("--format", cb_format, "nf|int")->check(CLI::IsMember({"nf", "int"}));

  // gen
  SynthSpec gspec;
  std::string g_out;
  auto *gen = app.add_subcommand("gen", "Write a seeded synthetic DAQT tensor");
  gen->add_option("--rows", gspec.rows)->required();
  gen->add_option("--cols", gspec.cols)->required();
  gen->add_option("--outlier-frac", gspec.outlier_frac, "Fraction of entries to scale");
  gen->add_option("--outlier-scale", gspec.outlier_scale, "Multiplier for outlier entries");
  gen->add_option("--seed", gspec.seed);
  gen->add_option("--out", g_out)->required();

  // verify
  std::string v_packed, v_weights, v_calib, v_report;
  auto *verify = app.add_subcommand("verify", "Recompute the calibration loss from a DAQQ artifact");
  verify->add_option("--packed", v_packed)->required();
  verify->add_option("--weights", v_weights)->required();
  verify->add_option("--calib", v_calib)->required();
  verify->add_option("--report", v_report, "Report whose total_loss must match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*quantize) {
      QuantJob job;
      job.weights = qargs.weights;
      job.calib = qargs.calib;
      job.format = parse_format_kind(qargs.format);
      job.bits = qargs.bits;
      job.group_size = qargs.group_size;
      job.method = qargs.method(q_method);
      job.out = q_out;
      job.report = q_report;
      job.workers = qargs.workers;
      job.trace = q_trace;

      const Tensor weights = load_tensor(job.weights);
      const Tensor calib = load_tensor(job.calib);
      const LayerResult res = quantize_layer(weights, calib, job.layer_options());
      save_packed(res.packed, job.out);

      const VerifyResult check = verify_packed(res.packed, weights, calib);
      if (check.total_loss != res.report.total_loss)
        fail(Errc::InvariantViolation, "artifact loss does not match the report");

      const auto json = to_json(res.report);
      if (!job.report.empty())
        write_text(job.report, json.dump(2) + "\n");
      if (job.trace) {
        std::ostringstream lines;
        for (std::size_t g = 0; g < res.traces.size(); ++g)
          write_trace_lines(lines, g, res.traces[g]);
        write_text(job.out.string() + ".trace.jsonl", lines.str());
      }
      out << res.report.method << " " << res.report.format << " groups=" << res.report.groups
          << " total_loss=" << detail::fmt_num("%.10g", res.report.total_loss)
          << " init_loss=" << detail::fmt_num("%.10g", res.report.init_loss)
          << " bytes=" << res.packed.byte_size() << "\n";
    } else if (*comp) {
      const Tensor weights = load_tensor(cargs.weights);
      const Tensor calib = load_tensor(cargs.calib);
      std::vector<MethodSpec> methods;
      for (const auto &name : split_list(c_methods))
        methods.push_back(cargs.method(name));
      const LayerOptions base = cargs.layer_options("minmax");
      const ComparisonReport cmp = compare(weights, calib, base, methods);
      if (!c_report.empty())
        write_text(c_report, to_json(cmp).dump(2) + "\n");
      if (!c_csv.empty())
        write_text(c_csv, to_csv(cmp));
      out << to_text(cmp);
    } else if (*codebook) {
      out << codebook_json(build_format(parse_format_kind(cb_format), cb_bits)).dump() << "\n";
    } else if (*gen) {
      save_tensor(generate_tensor(gspec), g_out);
    } else if (*verify) {
      const auto packed = load_packed(v_packed);
      const Tensor weights = load_tensor(v_weights);
      const Tensor calib = load_tensor(v_calib);
      const VerifyResult res = verify_packed(packed, weights, calib);
      nlohmann::json j = {{"rows", packed.layout.rows},
                          {"cols", packed.layout.cols},
                          {"groups", res.group_losses.size()},
                          {"total_loss", res.total_loss}};
      if (!v_report.empty()) {
        std::ifstream in(v_report);
        if (!in)
          fail(Errc::IoError, "cannot open " + v_report);
        nlohmann::json rep;
        try {
          rep = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception &e) {
          fail(Errc::InvalidArgument, std::string("report is not valid JSON: ") + e.what());
        }
        const double expected = rep.at("total_loss").get<double>();
        j["report_total_loss"] = expected;
        j["match"] = (expected == res.total_loss);
        out << j.dump() << "\n";
        if (expected != res.total_loss) {
          err << "error: recomputed loss differs from the report\n";
          return kInternal;
        }
        return kOk;
      }
      out << j.dump() << "\n";
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception &e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}

} // namespace daq::cli
