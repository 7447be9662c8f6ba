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

// File formats: instance and mechanism JSON, sweep CSV, SVG chart.
//
// All numbers are written with 12 significant digits so that repeated runs
// produce byte-identical files.

#ifndef LIPGEO_IO_HPP_
#define LIPGEO_IO_HPP_

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lipgeo/error.hpp"
#include "lipgeo/mechanisms.hpp"
#include "lipgeo/oracle.hpp"
#include "lipgeo/probability.hpp"

namespace lipgeo {

using Json = nlohmann::json;

inline constexpr int kOutputDigits = 12;

inline std::string FormatNumber(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*g", kOutputDigits, value);
  return buf;
}

inline double RoundForOutput(double value) {
  return std::strtod(FormatNumber(value).c_str(), nullptr);
}

// Unit conversion applied to information quantities at output time only.
inline double ToUnits(double nats, bool bits) {
  return bits ? nats / std::numbers::ln2 : nats;
}

namespace internal {

inline Json VectorJson(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out.push_back(RoundForOutput(v(i)));
  }
  return out;
}

inline Json MatrixJson(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out.push_back(VectorJson(m.row(r).transpose()));
  }
  return out;
}

[[noreturn]] inline void ParseFailure(const std::string& what) {
  throw Error(ErrorCode::kParseError, what);
}

inline double NumberFrom(const Json& j, const std::string& where) {
  if (!j.is_number()) ParseFailure(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) ParseFailure(where + " must be finite");
  return v;
}

inline Vector VectorFrom(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    ParseFailure(where + " must be a non-empty array");
  }
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) =
        NumberFrom(j[i], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline Matrix MatrixFrom(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    ParseFailure(where + " must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = VectorFrom(j[r], where + "[" + std::to_string(r) + "]");
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      ParseFailure(where + " is not rectangular");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline Json ParseJsonText(const std::string& text, const std::string& name) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    ParseFailure(name + ": " + e.what());
  }
}

}  // namespace internal

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kParseError, "cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << contents) || !out.flush()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  }
}

// The budget stored in the file, if any; instances parse with eps = 0 when
// absent.
struct InstanceFile {
  ProblemInstance instance;
  std::optional<double> epsilon;
};

inline InstanceFile ParseInstance(const std::string& text) {
  const Json j = internal::ParseJsonText(text, "instance");
  if (!j.is_object()) internal::ParseFailure("instance must be a JSON object");
  const bool joint = j.contains("p_xy");
  const bool kernel = j.contains("p_x_given_y") || j.contains("p_y");
  if (joint == kernel) {
    internal::ParseFailure(
        "instance needs exactly one of \"p_xy\" or \"p_x_given_y\" + \"p_y\"");
  }
  std::optional<double> epsilon;
  if (j.contains("epsilon")) {
    epsilon = internal::NumberFrom(j["epsilon"], "epsilon");
  }
  const double eps = epsilon.value_or(0.0);
  if (joint) {
    return {ProblemInstance::FromJoint(internal::MatrixFrom(j["p_xy"], "p_xy"),
                                       eps),
            epsilon};
  }
  if (!j.contains("p_x_given_y") || !j.contains("p_y")) {
    internal::ParseFailure("\"p_x_given_y\" and \"p_y\" must appear together");
  }
  return {ProblemInstance::FromKernel(
              internal::MatrixFrom(j["p_x_given_y"], "p_x_given_y"),
              internal::VectorFrom(j["p_y"], "p_y"), eps),
          epsilon};
}

inline InstanceFile LoadInstance(const std::string& path) {
  return ParseInstance(ReadFile(path));
}

inline Json GeometryJson(const GeometryContext& ctx) {
  return {
      {"w", internal::MatrixJson(ctx.w)},
      {"singular_values", internal::VectorJson(ctx.singular_values)},
      {"sigma_max", RoundForOutput(ctx.sigma_max)},
      {"l_star", internal::VectorJson(ctx.l_star)},
      {"sqrt_px", internal::VectorJson(ctx.sqrt_px)},
      {"c1", RoundForOutput(ctx.c1)},
      {"c2", RoundForOutput(ctx.c2)},
      {"c1_prime", RoundForOutput(ctx.c1p)},
      {"c2_prime", RoundForOutput(ctx.c2p)},
      {"spectrum_tie", ctx.spectrum_tie},
  };
}

inline Json MechanismJson(const Mechanism& m, bool bits = false) {
  Json dirs = Json::array();
  for (const Direction& d : m.directions) dirs.push_back(internal::VectorJson(d.l));
  Json px = Json::array();
  Json py = Json::array();
  for (int u = 0; u < m.u_size(); ++u) {
    px.push_back(internal::VectorJson(m.p_x_given_u[u].values()));
    py.push_back(internal::VectorJson(m.p_y_given_u[u].values()));
  }
  Json joint = Json::array();
  for (const Matrix& slice : m.p_xyu) joint.push_back(internal::MatrixJson(slice));
  return {
      {"family", FamilyName(m.family)},
      {"approach", std::string(ApproachName(m.family))},
      {"constraint", std::string(ConstraintName(m.family))},
      {"epsilon", RoundForOutput(m.epsilon)},
      {"units", bits ? "bits" : "nats"},
      {"p_u", internal::VectorJson(m.p_u.values())},
      {"directions", dirs},
      {"p_x_given_u", px},
      {"p_y_given_u", py},
      {"p_xyu", joint},
      {"exact_utility", RoundForOutput(ToUnits(m.exact_utility, bits))},
      {"exact_lip", RoundForOutput(m.exact_lip)},
      {"exact_maxlift", RoundForOutput(m.exact_maxlift)},
      {"approx_utility", RoundForOutput(ToUnits(m.approx_utility, bits))},
      {"validity", m.in_validity_range},
      {"simplex_capped", m.simplex_capped},
  };
}

// Reads back a mechanism file. Only the structural fields are trusted; the
// stored utility and leakage values are kept for display and recomputed by
// AuditMechanism.
inline Mechanism ParseMechanism(const std::string& text) {
  const Json j = internal::ParseJsonText(text, "mechanism");
  if (!j.is_object()) internal::ParseFailure("mechanism must be a JSON object");
  for (const char* key : {"approach", "constraint", "epsilon", "p_u",
                          "p_x_given_u", "p_y_given_u"}) {
    if (!j.contains(key)) {
      internal::ParseFailure(std::string("mechanism is missing \"") + key + "\"");
    }
  }
  if (!j["approach"].is_string() || !j["constraint"].is_string()) {
    internal::ParseFailure("\"approach\" and \"constraint\" must be strings");
  }
  const ConstraintFamily family =
      FamilyFromNames(j["approach"].get<std::string>(),
                      j["constraint"].get<std::string>());
  const double epsilon = internal::NumberFrom(j["epsilon"], "epsilon");

  const Distribution p_u(internal::VectorFrom(j["p_u"], "p_u"));
  auto rows = [&](const char* key) {
    std::vector<Distribution> out;
    const Matrix m = internal::MatrixFrom(j[key], key);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out.emplace_back(Vector(m.row(r).transpose()));
    }
    return out;
  };
  std::vector<Direction> directions;
  if (j.contains("directions") && !j["directions"].empty()) {
    const Matrix d = internal::MatrixFrom(j["directions"], "directions");
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      directions.push_back(Direction{d.row(r).transpose()});
    }
  }
  std::vector<Matrix> joint;
  if (j.contains("p_xyu")) {
    if (!j["p_xyu"].is_array()) internal::ParseFailure("p_xyu must be an array");
    for (std::size_t u = 0; u < j["p_xyu"].size(); ++u) {
      joint.push_back(internal::MatrixFrom(j["p_xyu"][u],
                                           "p_xyu[" + std::to_string(u) + "]"));
    }
  }
  Mechanism m{
      .family = family,
      .epsilon = epsilon,
      .p_u = p_u,
      .directions = std::move(directions),
      .p_x_given_u = rows("p_x_given_u"),
      .p_y_given_u = rows("p_y_given_u"),
      .p_xyu = std::move(joint),
  };
  auto optional_number = [&](const char* key, double& slot) {
    if (j.contains(key)) slot = internal::NumberFrom(j[key], key);
  };
  optional_number("exact_utility", m.exact_utility);
  optional_number("exact_lip", m.exact_lip);
  optional_number("exact_maxlift", m.exact_maxlift);
  optional_number("approx_utility", m.approx_utility);
  if (j.contains("validity") && j["validity"].is_boolean()) {
    m.in_validity_range = j["validity"].get<bool>();
  }
  return m;
}

inline Mechanism LoadMechanism(const std::string& path) {
  return ParseMechanism(ReadFile(path));
}

inline Json AuditJson(const AuditReport& r) {
  Json flags = Json::array();
  for (const std::string& f : r.Flags()) flags.push_back(f);
  return {
      {"passed", r.passed()},
      {"exact_utility", RoundForOutput(r.exact_utility)},
      {"exact_lip", RoundForOutput(r.exact_lip)},
      {"exact_maxlift", RoundForOutput(r.exact_maxlift)},
      {"y_mixture_residual", RoundForOutput(r.y_mixture_residual)},
      {"x_mixture_residual", RoundForOutput(r.x_mixture_residual)},
      {"markov_residual", RoundForOutput(r.markov_residual)},
      {"joint_residual", RoundForOutput(r.joint_residual)},
      {"direction_mixture_residual",
       RoundForOutput(r.direction_mixture_residual)},
      {"orthogonality_residual", RoundForOutput(r.orthogonality_residual)},
      {"direction_residual", RoundForOutput(r.direction_residual)},
      {"flags", flags},
  };
}

inline Json ErrorJson(ErrorCode code, const std::string& message) {
  return {{"error", std::string(ErrorCodeName(code))}, {"message", message}};
}

// One line of the sweep table.
struct SweepRow {
  double epsilon = 0.0;
  double p1_lower = 0.0;
  double p1_upper = 0.0;
  std::optional<double> p1_point;
  double p2_lower = 0.0;
  double p2_upper = 0.0;
  std::optional<double> p2_point;
  double p1_prime = 0.0;  // max-lift first approach lower bound
  double p2_prime = 0.0;  // max-lift second approach lower bound
  double chi2 = 0.0;
  std::optional<double> mech1_exact_mi;
  std::optional<double> mech1_exact_lip;
  std::optional<double> mech2_exact_mi;
  std::optional<double> mech2_exact_lip;
  std::optional<double> oracle_mi;
  bool in_validity_range = false;
};

inline constexpr const char* kSweepHeader =
    "epsilon,p1_lower,p1_upper,p1_point,p2_lower,p2_upper,p2_point,p1_prime,"
    "p2_prime,chi2,mech1_exact_mi,mech1_exact_lip,mech2_exact_mi,"
    "mech2_exact_lip,oracle_mi,in_validity_range";

inline SweepRow SweepRowFrom(const BoundsReport& b) {
  SweepRow row;
  row.epsilon = b.epsilon;
  row.p1_lower = b.p1.lower;
  row.p1_upper = b.p1.upper;
  row.p1_point = b.p1.point;
  row.p2_lower = b.p2.lower;
  row.p2_upper = b.p2.upper;
  row.p2_point = b.p2.point;
  row.p1_prime = b.p1_prime.lower;
  row.p2_prime = b.p2_prime.lower;
  row.chi2 = b.chi2_baseline;
  if (b.mech1) {
    row.mech1_exact_mi = b.mech1->exact_utility;
    row.mech1_exact_lip = b.mech1->exact_lip;
  }
  if (b.mech2) {
    row.mech2_exact_mi = b.mech2->exact_utility;
    row.mech2_exact_lip = b.mech2->exact_lip;
  }
  if (b.oracle) row.oracle_mi = b.oracle->best_utility;
  row.in_validity_range = b.in_validity_range;
  return row;
}

// Information columns are converted when `bits` is set; eps and the leakage
// columns stay in nats.
inline void WriteSweepCsv(std::ostream& out, const std::vector<SweepRow>& rows,
                          bool bits = false) {
  auto info = [&](double v) { return FormatNumber(ToUnits(v, bits)); };
  auto opt_info = [&](const std::optional<double>& v) {
    return v ? info(*v) : std::string();
  };
  auto opt_raw = [](const std::optional<double>& v) {
    return v ? FormatNumber(*v) : std::string();
  };
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    out << FormatNumber(r.epsilon) << ',' << info(r.p1_lower) << ','
        << info(r.p1_upper) << ',' << opt_info(r.p1_point) << ','
        << info(r.p2_lower) << ',' << info(r.p2_upper) << ','
        << opt_info(r.p2_point) << ',' << info(r.p1_prime) << ','
        << info(r.p2_prime) << ',' << info(r.chi2) << ','
        << opt_info(r.mech1_exact_mi) << ',' << opt_raw(r.mech1_exact_lip)
        << ',' << opt_info(r.mech2_exact_mi) << ','
        << opt_raw(r.mech2_exact_lip) << ',' << opt_info(r.oracle_mi) << ','
        << (r.in_validity_range ? "true" : "false") << '\n';
  }
}

// Static line chart of the sweep: P1, P2, the chi^2 baseline and, when
// present, the oracle optimum against eps.
inline std::string SweepSvg(const std::vector<SweepRow>& rows,
                            bool bits = false) {
  constexpr double kWidth = 640, kHeight = 420, kMargin = 56;
  struct Series {
    const char* label;
    const char* color;
    std::vector<std::pair<double, double>> points;
  };
  std::vector<Series> series = {{"P1", "#1f77b4", {}},
                                {"P2", "#d62728", {}},
                                {"chi2 baseline", "#2ca02c", {}},
                                {"oracle", "#000000", {}}};
  double x_min = 0, x_max = 1, y_max = 0;
  if (!rows.empty()) {
    x_min = rows.front().epsilon;
    x_max = rows.back().epsilon;
  }
  for (const SweepRow& r : rows) {
    const double p1 = ToUnits(r.p1_point.value_or(r.p1_lower), bits);
    const double p2 = ToUnits(r.p2_point.value_or(r.p2_lower), bits);
    const double chi2 = ToUnits(r.chi2, bits);
    series[0].points.emplace_back(r.epsilon, p1);
    series[1].points.emplace_back(r.epsilon, p2);
    series[2].points.emplace_back(r.epsilon, chi2);
    y_max = std::max({y_max, p1, p2, chi2});
    if (r.oracle_mi) {
      const double o = ToUnits(*r.oracle_mi, bits);
      series[3].points.emplace_back(r.epsilon, o);
      y_max = std::max(y_max, o);
    }
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max <= 0.0) y_max = 1.0;
  auto sx = [&](double x) {
    return kMargin + (x - x_min) / (x_max - x_min) * (kWidth - 2 * kMargin);
  };
  auto sy = [&](double y) {
    return kHeight - kMargin - y / y_max * (kHeight - 2 * kMargin);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kHeight - kMargin
      << "\" x2=\"" << kWidth - kMargin << "\" y2=\"" << kHeight - kMargin
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\""
      << kMargin << "\" y2=\"" << kHeight - kMargin << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\">epsilon</text>\n";
  svg << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\" text-anchor=\"middle\">I(U;Y) ["
      << (bits ? "bits" : "nats") << "]</text>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"" << kHeight - kMargin + 16
      << "\" text-anchor=\"middle\">" << FormatNumber(x_min) << "</text>\n";
  svg << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kHeight - kMargin + 16
      << "\" text-anchor=\"middle\">" << FormatNumber(x_max) << "</text>\n";
  svg << "<text x=\"" << kMargin - 4 << "\" y=\"" << kMargin + 4
      << "\" text-anchor=\"end\">" << FormatNumber(y_max) << "</text>\n";
  int legend = 0;
  for (const Series& s : series) {
    if (s.points.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : s.points) {
      svg << FormatNumber(sx(x)) << ',' << FormatNumber(sy(y)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kMargin + 16.0 * legend++;
    svg << "<text x=\"" << kMargin + 12 << "\" y=\"" << ly << "\" fill=\""
        << s.color << "\">" << s.label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lipgeo

#endif  // LIPGEO_IO_HPP_
