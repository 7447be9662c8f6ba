// Copyright 2026 The lipgeo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Subcommands of the lipgeo tool. Each Run* function writes to the given
// streams and returns the process exit code:
//
//   0  success
//   1  input error (parse, validation, bad flags)
//   2  degenerate geometry (no direction carries utility)
//   3  audit failure

#ifndef LIPGEO_CLI_HPP_
#define LIPGEO_CLI_HPP_

#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lipgeo/error.hpp"
#include "lipgeo/geometry.hpp"
#include "lipgeo/io.hpp"
#include "lipgeo/mechanisms.hpp"
#include "lipgeo/oracle.hpp"
#include "lipgeo/parallel.hpp"
#include "lipgeo/probability.hpp"

namespace lipgeo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitDegenerate = 2;
inline constexpr int kExitAuditFailure = 3;

struct DesignOptions {
  std::string instance_path;
  std::string approach = "first";
  std::string constraint = "lip";
  std::optional<double> epsilon;  // falls back to the instance file
  std::string out_path;           // empty: JSON to stdout
  bool bits = false;
};

struct SweepOptions {
  std::string instance_path;
  double eps_start = 0.005;
  double eps_end = 0.05;
  int eps_steps = 10;
  bool oracle = false;
  int oracle_resolution = 1000;
  int oracle_u = 2;
  std::string out_path;  // empty: CSV to stdout
  std::string svg_path;
  bool bits = false;
};

namespace internal {

inline int ReportError(std::ostream& err, ErrorCode code,
                       const std::string& message) {
  err << ErrorJson(code, message).dump() << '\n';
  return code == ErrorCode::kDegenerateSpectrum ? kExitDegenerate
                                                : kExitInputError;
}

template <typename Body>
int Guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return ReportError(err, e.code(), e.detail());
  } catch (const std::exception& e) {
    return ReportError(err, ErrorCode::kInvalidArgument, e.what());
  }
}

inline std::vector<double> EpsilonGrid(double start, double end, int steps) {
  std::vector<double> grid;
  if (steps == 1) return {start};
  for (int i = 0; i < steps; ++i) {
    grid.push_back(i == steps - 1
                       ? end
                       : start + (end - start) * i / (steps - 1));
  }
  return grid;
}

}  // namespace internal

inline int RunAnalyze(const std::string& instance_path, std::ostream& out,
                      std::ostream& err) {
  return internal::Guarded(err, [&] {
    const ProblemInstance inst = LoadInstance(instance_path).instance;
    try {
      out << GeometryJson(BuildGeometry(inst)).dump(2) << '\n';
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateSpectrum) throw;
      const Matrix w = OperatorW(inst);
      Eigen::JacobiSVD<Matrix> svd(w);
      const Json partial = {
          {"w", lipgeo::internal::MatrixJson(w)},
          {"singular_values",
           lipgeo::internal::VectorJson(svd.singularValues())},
          {"degenerate", true},
      };
      out << partial.dump(2) << '\n';
      throw;
    }
    return kExitOk;
  });
}

inline int RunDesign(const DesignOptions& opts, std::ostream& out,
                     std::ostream& err) {
  return internal::Guarded(err, [&] {
    const InstanceFile file = LoadInstance(opts.instance_path);
    const std::optional<double> eps =
        opts.epsilon ? opts.epsilon : file.epsilon;
    if (!eps) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no --epsilon given and the instance has none");
    }
    if (!(*eps > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "leakage budget must be positive, got " + FormatNumber(*eps));
    }
    const ConstraintFamily family =
        FamilyFromNames(opts.approach, opts.constraint);
    const ProblemInstance inst = file.instance.WithEpsilon(*eps);
    const GeometryContext ctx = BuildGeometry(inst);
    const Mechanism m = BuildMechanism(
        inst, ctx, ComputeScalingFactors(ctx, family, *eps), *eps);
    const std::string json = MechanismJson(m, opts.bits).dump(2) + "\n";
    if (opts.out_path.empty()) {
      out << json;
      return kExitOk;
    }
    WriteFile(opts.out_path, json);
    const char* unit = opts.bits ? "bits" : "nats";
    out << FamilyName(m.family) << " eps=" << FormatNumber(*eps)
        << " |U|=" << m.u_size()
        << " exact_mi=" << FormatNumber(ToUnits(m.exact_utility, opts.bits))
        << ' ' << unit
        << " approx_mi=" << FormatNumber(ToUnits(m.approx_utility, opts.bits))
        << ' ' << unit << " exact_lip=" << FormatNumber(m.exact_lip)
        << " exact_maxlift=" << FormatNumber(m.exact_maxlift)
        << " validity=" << (m.in_validity_range ? "true" : "false")
        << (m.simplex_capped ? " simplex_capped" : "") << " -> "
        << opts.out_path << '\n';
    return kExitOk;
  });
}

inline std::vector<SweepRow> ComputeSweep(const ProblemInstance& inst,
                                          const SweepOptions& opts) {
  if (!(opts.eps_start > 0.0) || !(opts.eps_start <= opts.eps_end)) {
    throw Error(ErrorCode::kInvalidArgument,
                "sweep needs 0 < eps-start <= eps-end");
  }
  if (opts.eps_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "eps-steps must be at least 1");
  }
  const std::vector<double> grid =
      internal::EpsilonGrid(opts.eps_start, opts.eps_end, opts.eps_steps);
  const GeometryContext ctx = BuildGeometry(inst);
  std::optional<OracleOptions> oracle;
  if (opts.oracle) {
    oracle = OracleOptions{.u_cardinality = opts.oracle_u,
                           .resolution = opts.oracle_resolution};
  }
  std::vector<std::optional<SweepRow>> rows(grid.size());
  auto row = [&](int i) {
    rows[i] = SweepRowFrom(ComputeBoundsReport(inst, ctx, grid[i], oracle));
  };
  // With the oracle on, parallelism lives inside each grid search.
  ParallelFor(static_cast<int>(grid.size()), opts.oracle ? 1 : ThreadCount(),
              row);
  std::vector<SweepRow> out;
  for (auto& r : rows) out.push_back(*r);
  return out;
}

inline int RunSweep(const SweepOptions& opts, std::ostream& out,
                    std::ostream& err) {
  return internal::Guarded(err, [&] {
    const ProblemInstance inst = LoadInstance(opts.instance_path).instance;
    const std::vector<SweepRow> rows = ComputeSweep(inst, opts);
    std::ostringstream csv;
    WriteSweepCsv(csv, rows, opts.bits);
    if (opts.out_path.empty()) {
      out << csv.str();
    } else {
      WriteFile(opts.out_path, csv.str());
      out << rows.size() << " rows -> " << opts.out_path << '\n';
    }
    if (!opts.svg_path.empty()) {
      WriteFile(opts.svg_path, SweepSvg(rows, opts.bits));
    }
    return kExitOk;
  });
}

inline int RunVerify(const std::string& instance_path,
                     const std::string& mechanism_path, std::ostream& out,
                     std::ostream& err) {
  return internal::Guarded(err, [&] {
    const InstanceFile file = LoadInstance(instance_path);
    const Mechanism mech = LoadMechanism(mechanism_path);
    if (mech.p_x_given_u.empty() ||
        mech.p_x_given_u.front().size() != file.instance.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "mechanism and instance alphabets differ");
    }
    // The budget is the one the mechanism declares; an eps in the instance
    // file is ignored so that `design --epsilon` output always verifies.
    const AuditReport report = AuditMechanism(file.instance, mech);
    const double leakage =
        IsMaxLift(mech.family) ? report.exact_maxlift : report.exact_lip;

    auto line = [&](const char* name, double value, bool ok) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%-28s %-20s %s\n", name,
                    FormatNumber(value).c_str(), ok ? "ok" : "FAIL");
      out << buf;
    };
    out << "family " << FamilyName(mech.family) << ", declared eps "
        << FormatNumber(mech.epsilon) << "\n";
    line("exact_utility", report.exact_utility, true);
    line(IsMaxLift(mech.family) ? "exact_maxlift" : "exact_lip", leakage,
         !report.leakage_exceeded);
    line("y_mixture_residual", report.y_mixture_residual,
         report.y_mixture_residual <= kAuditTolerance);
    line("x_mixture_residual", report.x_mixture_residual,
         report.x_mixture_residual <= kAuditTolerance);
    line("markov_residual", report.markov_residual, !report.markov_violated);
    line("joint_residual", report.joint_residual, !report.joint_inconsistent);
    line("direction_mixture_residual", report.direction_mixture_residual,
         report.direction_mixture_residual <= kAuditTolerance);
    line("orthogonality_residual", report.orthogonality_residual,
         report.orthogonality_residual <= kAuditTolerance);
    line("direction_residual", report.direction_residual,
         report.direction_residual <= kAuditTolerance);
    if (report.structure_invalid) {
      out << "structure: " << report.structure_message << '\n';
    }
    std::string flags;
    for (const std::string& f : report.Flags()) flags += " " + f;
    out << (report.passed() ? "PASS" : "FAIL")
        << (flags.empty() ? "" : " flags:" + flags) << '\n';
    return report.passed() ? kExitOk : kExitAuditFailure;
  });
}

// Full command-line entry point.
inline int RunMain(int argc, const char* const* argv, std::ostream& out,
                   std::ostream& err) {
  CLI::App app{"Privacy mechanism design under LIP and max-lift constraints",
               "lipgeo"};
  app.require_subcommand(1);

  std::string analyze_path;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Geometry of an instance (JSON)");
  analyze->add_option("instance", analyze_path, "Instance JSON")->required();

  DesignOptions design_opts;
  double design_eps = 0.0;
  CLI::App* design =
      app.add_subcommand("design", "Build a mechanism along L*");
  design->add_option("instance", design_opts.instance_path, "Instance JSON")
      ->required();
  design->add_option("--approach", design_opts.approach)
      ->check(CLI::IsMember({"first", "second"}))
      ->capture_default_str();
  design->add_option("--constraint", design_opts.constraint)
      ->check(CLI::IsMember({"lip", "maxlift"}))
      ->capture_default_str();
  CLI::Option* design_eps_opt =
      design->add_option("--epsilon", design_eps, "Leakage budget (nats)");
  design->add_option("--out", design_opts.out_path, "Mechanism JSON path");
  design->add_flag("--bits", design_opts.bits, "Report information in bits");

  SweepOptions sweep_opts;
  std::string oracle_switch = "off";
  CLI::App* sweep = app.add_subcommand("sweep", "Bounds over an eps grid");
  sweep->add_option("instance", sweep_opts.instance_path, "Instance JSON")
      ->required();
  sweep->add_option("--eps-start", sweep_opts.eps_start)->capture_default_str();
  sweep->add_option("--eps-end", sweep_opts.eps_end)->capture_default_str();
  sweep->add_option("--eps-steps", sweep_opts.eps_steps)->capture_default_str();
  sweep->add_option("--oracle", oracle_switch)
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  sweep->add_option("--oracle-resolution", sweep_opts.oracle_resolution)
      ->capture_default_str();
  sweep->add_option("--oracle-u", sweep_opts.oracle_u, "|U| for the oracle")
      ->capture_default_str();
  sweep->add_option("--out", sweep_opts.out_path, "CSV path");
  sweep->add_option("--svg", sweep_opts.svg_path, "SVG chart path");
  sweep->add_flag("--bits", sweep_opts.bits, "Report information in bits");

  std::string verify_instance, verify_mechanism;
  CLI::App* verify = app.add_subcommand("verify", "Audit a mechanism file");
  verify->add_option("instance", verify_instance, "Instance JSON")->required();
  verify->add_option("mechanism", verify_mechanism, "Mechanism JSON")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::ostringstream help;
      app.exit(e, help, help);
      out << help.str();
      return kExitOk;
    }
    return internal::ReportError(err, ErrorCode::kInvalidArgument, e.what());
  }

  if (*analyze) return RunAnalyze(analyze_path, out, err);
  if (*design) {
    if (*design_eps_opt) design_opts.epsilon = design_eps;
    return RunDesign(design_opts, out, err);
  }
  if (*sweep) {
    sweep_opts.oracle = oracle_switch == "on";
    return RunSweep(sweep_opts, out, err);
  }
  return RunVerify(verify_instance, verify_mechanism, out, err);
}

}  // namespace lipgeo::cli

#endif  // LIPGEO_CLI_HPP_
