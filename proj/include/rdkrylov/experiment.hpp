#pragma once

// Experiment driver behind the command-line tool: flat key=value configs,
// operator construction, tau resolution and CSV output of per-iteration data.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rdkrylov/bounds.hpp"
#include "rdkrylov/errors.hpp"
#include "rdkrylov/operators.hpp"
#include "rdkrylov/phifun.hpp"
#include "rdkrylov/rd_arnoldi.hpp"
#include "rdkrylov/sector.hpp"
#include "rdkrylov/tauselect.hpp"

namespace rdkrylov {

/// How tau is chosen: calibrated, a fixed number, or N / cos(theta).
struct TauSpec {
  enum class Kind { automatic, fixed, over_cos } kind = Kind::automatic;
  double value = 0.0;

  static TauSpec parse(const std::string& s);
  std::string str() const;
};

struct ExperimentConfig {
  std::string op = "advdiff";
  Eigen::Index M = 200;
  std::vector<double> c{2.0, 4.0};
  std::string file;
  std::vector<int> k{0, 1, 2};
  double h = 0.5;
  TauSpec tau;
  std::vector<double> tau_scale{1.0};
  Eigen::Index m_coarse = 50;
  double calib_tol = 1e-12;
  bool calib_residual = false;
  double tol = 1e-12;
  int max_m = 60;
  StopMode mode = StopMode::oracle;
  int check_every = 1;
  bool oracle = true;
  std::uint64_t seed = 1;
  int n_angles = 256;
  double theta_margin = 0.01;
  std::optional<double> theta;
  bool symmetric = false;
  std::string v = "ones";
  int window_k = 0;
  int window_m_max = 40;

  /// Every field on one line, in a fixed order.
  std::string resolved() const;
  void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", x);
  return buf;
}

inline std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(x)) {
      throw std::invalid_argument(s);
    }
    return x;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected a number, got '" + s + "'");
  }
}

inline long long to_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return x;
  } catch (const std::exception&) {
    throw ParseError(where + ": expected an integer, got '" + s + "'");
  }
}

inline bool to_bool(const std::string& s, const std::string& where) {
  if (s == "on" || s == "true" || s == "1" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "0" || s == "no") return false;
  throw ParseError(where + ": expected on/off, got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt_short(xs[i]);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s;
}

} // namespace detail

inline TauSpec TauSpec::parse(const std::string& s) {
  if (s == "auto") {
    return {};
  }
  const auto slash = s.find('/');
  if (slash != std::string::npos) {
    if (detail::trim(s.substr(slash + 1)) != "cos") {
      throw ParseError("tau: expected 'auto', a number or 'N/cos', got '" + s + "'");
    }
    return {Kind::over_cos, detail::to_double(detail::trim(s.substr(0, slash)), "tau")};
  }
  return {Kind::fixed, detail::to_double(s, "tau")};
}

inline std::string TauSpec::str() const {
  switch (kind) {
  case Kind::automatic: return "auto";
  case Kind::fixed: return detail::fmt_short(value);
  case Kind::over_cos: return detail::fmt_short(value) + "/cos";
  }
  return "?";
}

inline std::string ExperimentConfig::resolved() const {
  std::ostringstream s;
  s << "operator=" << op << " M=" << M;
  if (op == "file") {
    s << " file=" << file;
  } else {
    s << " c=" << detail::join(c);
  }
  s << " k=" << detail::join(k) << " h=" << detail::fmt_short(h) << " tau=" << tau.str()
    << " tau_scale=" << detail::join(tau_scale) << " m_coarse=" << m_coarse
    << " calib_tol=" << detail::fmt_short(calib_tol)
    << " calib_residual=" << (calib_residual ? "on" : "off")
    << " tol=" << detail::fmt_short(tol) << " max_m=" << max_m << " mode=" << to_string(mode)
    << " check_every=" << check_every << " oracle=" << (oracle ? "on" : "off")
    << " seed=" << seed << " n_angles=" << n_angles
    << " theta_margin=" << detail::fmt_short(theta_margin)
    << " theta=" << (theta ? detail::fmt_short(*theta) : std::string("auto"))
    << " symmetric=" << (symmetric ? "on" : "off") << " v=" << v << " window_k=" << window_k
    << " window_m_max=" << window_m_max;
  return s.str();
}

inline void ExperimentConfig::validate() const {
  if (op != "advdiff" && op != "file") {
    throw ParseError("operator: expected 'advdiff' or 'file'");
  }
  if (op == "file" && file.empty()) {
    throw ParseError("operator=file needs file=PATH");
  }
  if (op == "advdiff" && (M < 2 || c.empty())) {
    throw ParseError("advdiff needs M >= 2 and a nonempty c list");
  }
  if (k.empty() || tau_scale.empty()) {
    throw ParseError("k and tau_scale lists must be nonempty");
  }
  for (int kk : k) {
    if (kk < 0 || kk > max_phi_index) throw ParseError("k entries must be in [0, 6]");
  }
  for (double s : tau_scale) {
    if (!(s > 0.0)) throw ParseError("tau_scale entries must be positive");
  }
  if (!(h > 0.0)) throw ParseError("h must be positive");
  if (tau.kind != TauSpec::Kind::automatic && !(tau.value > 0.0)) {
    throw ParseError("tau must be positive");
  }
  if (!(tol >= 1e-15) || !(calib_tol >= 1e-15)) throw ParseError("tolerances must be >= 1e-15");
  if (max_m < 1 || check_every < 1) throw ParseError("max_m and check_every must be >= 1");
  if (m_coarse < 2) throw ParseError("m_coarse must be >= 2");
  if (n_angles < 8) throw ParseError("n_angles must be >= 8");
  if (!(theta_margin >= 0.0)) throw ParseError("theta_margin must be >= 0");
  if (theta && !(*theta >= 0.0 && *theta < std::numbers::pi / 2.0)) {
    throw ParseError("theta must be in [0, pi/2)");
  }
  if (v != "ones" && v != "random") throw ParseError("v: expected 'ones' or 'random'");
  if (oracle && op == "advdiff" && M > 400) {
    throw ParseError("oracle needs M <= 400; use oracle=off for larger M");
  }
  if (mode == StopMode::oracle && !oracle) {
    throw ParseError("mode=oracle needs oracle=on");
  }
  if (window_k < 0 || window_m_max < 2) throw ParseError("window_k >= 0, window_m_max >= 2");
}

/// Parses key=value lines; '#' starts a comment line. Unknown or repeated
/// keys are errors reported with their line number.
inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') {
      continue;
    }
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(where + ": expected key=value");
    }
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (val.empty()) {
      throw ParseError(where + ": empty value for '" + key + "'");
    }
    if (auto [it, fresh] = seen.emplace(key, lineno); !fresh) {
      throw ParseError(where + ": key '" + key + "' already set on line " +
                       std::to_string(it->second));
    }
    const std::string kw = where + " " + key;
    auto doubles = [&] {
      std::vector<double> xs;
      for (const auto& s : detail::split_list(val)) xs.push_back(detail::to_double(s, kw));
      return xs;
    };

    if (key == "operator") {
      cfg.op = val;
    } else if (key == "M") {
      cfg.M = detail::to_int(val, kw);
    } else if (key == "c") {
      cfg.c = doubles();
    } else if (key == "file") {
      cfg.file = val;
    } else if (key == "k") {
      cfg.k.clear();
      for (const auto& s : detail::split_list(val)) {
        cfg.k.push_back(static_cast<int>(detail::to_int(s, kw)));
      }
    } else if (key == "h") {
      cfg.h = detail::to_double(val, kw);
    } else if (key == "tau") {
      try {
        cfg.tau = TauSpec::parse(val);
      } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
      }
    } else if (key == "tau_scale") {
      cfg.tau_scale = doubles();
    } else if (key == "m_coarse") {
      cfg.m_coarse = detail::to_int(val, kw);
    } else if (key == "calib_tol") {
      cfg.calib_tol = detail::to_double(val, kw);
    } else if (key == "calib_residual") {
      cfg.calib_residual = detail::to_bool(val, kw);
    } else if (key == "tol") {
      cfg.tol = detail::to_double(val, kw);
    } else if (key == "max_m") {
      cfg.max_m = static_cast<int>(detail::to_int(val, kw));
    } else if (key == "mode") {
      try {
        cfg.mode = parse_stop_mode(val);
      } catch (const InvalidArgument&) {
        throw ParseError(where + ": unknown mode '" + val + "'");
      }
    } else if (key == "check_every") {
      cfg.check_every = static_cast<int>(detail::to_int(val, kw));
    } else if (key == "oracle") {
      cfg.oracle = detail::to_bool(val, kw);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::to_int(val, kw));
    } else if (key == "n_angles") {
      cfg.n_angles = static_cast<int>(detail::to_int(val, kw));
    } else if (key == "theta_margin") {
      cfg.theta_margin = detail::to_double(val, kw);
    } else if (key == "theta") {
      cfg.theta = val == "auto" ? std::nullopt : std::optional(detail::to_double(val, kw));
    } else if (key == "symmetric") {
      cfg.symmetric = detail::to_bool(val, kw);
    } else if (key == "v") {
      cfg.v = val;
    } else if (key == "window_k") {
      cfg.window_k = static_cast<int>(detail::to_int(val, kw));
    } else if (key == "window_m_max") {
      cfg.window_m_max = static_cast<int>(detail::to_int(val, kw));
    } else {
      throw ParseError(where + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open config file " + path.string());
  }
  return parse_config(in, path.string());
}

/// One operator of an experiment, with the c it was built for (0 for files).
struct ExperimentOperator {
  std::string label;
  double c = 0.0;
  SectorialOperator op;
};

inline std::vector<ExperimentOperator> build_operators(const ExperimentConfig& cfg) {
  std::vector<ExperimentOperator> ops;
  if (cfg.op == "file") {
    ops.push_back({"file", 0.0, read_coordinate_file(cfg.file)});
    if (cfg.oracle && ops.back().op.dimension() > 400) {
      throw ParseError("oracle needs M <= 400; use oracle=off for larger operators");
    }
  } else {
    for (double c : cfg.c) {
      ops.push_back({"c" + detail::fmt_short(c), c, make_advection_diffusion(cfg.M, c)});
    }
  }
  return ops;
}

inline RealVector start_vector(const ExperimentConfig& cfg, Eigen::Index dim) {
  RealVector v(dim);
  if (cfg.v == "random") {
    std::mt19937_64 gen(cfg.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = dist(gen);
  } else {
    v.setOnes();
  }
  return v / v.norm();
}

/// Sector semiangle used for bounds and tau: the explicit value if given,
/// otherwise the computed angle plus the margin. Advection-diffusion angles
/// come from the coarse grid.
inline double resolve_theta(const ExperimentConfig& cfg, const ExperimentOperator& eo) {
  if (cfg.theta) {
    return *cfg.theta;
  }
  if (cfg.op == "advdiff") {
    return compute_sector(make_advection_diffusion(cfg.m_coarse, eo.c), cfg.n_angles,
                          cfg.theta_margin)
        .theta_used();
  }
  return compute_sector(eo.op, cfg.n_angles, cfg.theta_margin).theta_used();
}

struct ResolvedTau {
  double tau = 0.0;
  std::optional<TauPolicy> policy;
};

inline ResolvedTau resolve_tau(const ExperimentConfig& cfg, const ExperimentOperator& eo, int k,
                               double theta) {
  switch (cfg.tau.kind) {
  case TauSpec::Kind::fixed: return {cfg.tau.value, std::nullopt};
  case TauSpec::Kind::over_cos: return {cfg.tau.value / std::cos(theta), std::nullopt};
  case TauSpec::Kind::automatic: break;
  }
  CalibrationOptions opt;
  opt.m_coarse = cfg.m_coarse;
  opt.tolerance = cfg.calib_tol;
  opt.use_residual = cfg.calib_residual;
  OperatorFactory factory;
  if (cfg.op == "advdiff") {
    factory = [c = eo.c](Eigen::Index m) { return make_advection_diffusion(m, c); };
  } else {
    // A file operator has no coarser version; calibrate on it directly.
    factory = [op = eo.op](Eigen::Index) { return op; };
  }
  const TauPolicy p = calibrate_on_coarse(factory, k, cfg.h, theta, opt);
  return {p.tau_opt, p};
}

struct RunResult {
  std::filesystem::path path;
  int k = 0;
  double c = 0.0;
  double theta = 0.0;
  double tau = 0.0;
  PhiApproximation approx;
};

namespace detail {

inline std::string opt_field(const std::optional<double>& x) {
  return x ? fmt(*x) : std::string("nan");
}

inline std::string scale_tag(double s) {
  return s == 1.0 ? std::string() : "_s" + fmt_short(s);
}

} // namespace detail

/// One RD Arnoldi run per (operator, k, tau_scale); writes the iteration
/// history of each to its own CSV file.
inline std::vector<RunResult> run_convergence_experiment(const ExperimentConfig& cfg,
                                                         const std::filesystem::path& out_dir,
                                                         const std::string& prefix = "converge",
                                                         bool bounds_columns = true) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  std::vector<RunResult> results;
  for (const auto& eo : build_operators(cfg)) {
    const double theta = resolve_theta(cfg, eo);
    const RealVector v = start_vector(cfg, eo.op.dimension());
    const RealMatrix dense = cfg.oracle ? eo.op.dense() : RealMatrix();
    for (int k : cfg.k) {
      const ResolvedTau base = resolve_tau(cfg, eo, k, theta);
      std::optional<RealVector> ref;
      if (cfg.oracle) {
        ref = phi_oracle_dense(k, cfg.h, dense, v);
      }
      for (double scale : cfg.tau_scale) {
        RunResult r;
        r.k = k;
        r.c = eo.c;
        r.theta = theta;
        r.tau = base.tau * scale;
        const auto req = PhiRequest::from_tau(k, cfg.h, r.tau, v);
        SolveOptions so;
        so.stop.tolerance = cfg.tol;
        so.stop.max_m = static_cast<int>(std::min<Eigen::Index>(cfg.max_m, eo.op.dimension()));
        so.stop.mode = cfg.mode;
        so.stop.check_every = cfg.check_every;
        so.theta = theta;
        so.crouzeix = cfg.symmetric ? 1.0 : crouzeix_default;
        so.reference = ref;
        try {
          r.approx = rd_arnoldi_phi(req, eo.op, so);
        } catch (const MaxIterations& e) {
          r.approx = e.best();
        }

        r.path = out_dir / (prefix + "_k" + std::to_string(k) + "_" + eo.label +
                            detail::scale_tag(scale) + ".csv");
        std::ofstream f(r.path);
        if (!f) {
          throw ParseError("cannot write " + r.path.string());
        }
        f << "# " << cfg.resolved() << "\n";
        f << "# run k=" << k << " " << eo.label << " theta=" << detail::fmt(theta)
          << " tau=" << detail::fmt(r.tau) << " converged=" << (r.approx.converged ? 1 : 0)
          << " m=" << r.approx.m << "\n";
        f << "m";
        if (cfg.oracle) f << ",true_error";
        if (bounds_columns) f << ",bound_fe1,bound_fe2";
        f << ",residual";
        if (bounds_columns) f << ",subdiag_product";
        f << "\n";
        for (const auto& rec : r.approx.history) {
          f << rec.m;
          if (cfg.oracle) f << "," << detail::opt_field(rec.true_error);
          if (bounds_columns) {
            f << "," << detail::opt_field(rec.bound_fe1) << "," << detail::opt_field(rec.bound_fe2);
          }
          f << "," << detail::fmt(rec.residual);
          if (bounds_columns) f << "," << detail::fmt(rec.subdiag_product);
          f << "\n";
        }
        results.push_back(std::move(r));
      }
    }
  }
  return results;
}

/// True error against the generalized residual; needs the dense reference.
inline std::vector<RunResult> run_residual_experiment(const ExperimentConfig& cfg,
                                                      const std::filesystem::path& out_dir) {
  if (!cfg.oracle) {
    throw ParseError("the residual experiment needs oracle=on");
  }
  return run_convergence_experiment(cfg, out_dir, "residual", false);
}

/// Window endpoints for m = 2..window_m_max and extra = 1, 2.
inline std::filesystem::path run_window_experiment(const ExperimentConfig& cfg,
                                                   const std::filesystem::path& out_dir) {
  cfg.validate();
  const double theta = cfg.theta.value_or(0.0);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "window.csv";
  std::ofstream f(path);
  if (!f) {
    throw ParseError("cannot write " + path.string());
  }
  f << "# " << cfg.resolved() << "\n";
  f << "m,tau_opt,tau1_extra1,tau2_extra1,tau1_extra2,tau2_extra2\n";
  for (int m = 2; m <= cfg.window_m_max; ++m) {
    const auto w1 = tau_window(m, cfg.window_k, theta, 1);
    const auto w2 = tau_window(m, cfg.window_k, theta, 2);
    f << m << "," << detail::fmt(tau_optimal(m, cfg.window_k, theta)) << ","
      << detail::fmt(w1.tau_lo) << "," << detail::fmt(w1.tau_hi) << ","
      << detail::fmt(w2.tau_lo) << "," << detail::fmt(w2.tau_hi) << "\n";
  }
  return path;
}

} // namespace rdkrylov
