// Command-line driver for the RD rational Arnoldi experiments.
//
//   rdkrylov converge  --config cfg.txt --out results/
//   rdkrylov window    --out results/
//   rdkrylov sector    --config cfg.txt
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "rdkrylov/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out = ".";
  std::string oracle;
  std::optional<std::uint64_t> seed;
  bool large = false;
};

void add_common(CLI::App* sub, CommonFlags& flags) {
  sub->add_option("--config", flags.config, "key=value configuration file");
  sub->add_option("--out", flags.out, "output directory");
  sub->add_option("--oracle", flags.oracle, "dense reference column")
      ->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--seed", flags.seed, "seed for the random start vector");
  sub->add_flag("--large", flags.large, "M = 1000 without the dense reference");
}

rdkrylov::ExperimentConfig load(const CommonFlags& flags) {
  rdkrylov::ExperimentConfig cfg;
  if (!flags.config.empty()) {
    cfg = rdkrylov::parse_config_file(flags.config);
  }
  if (flags.large) {
    cfg.M = 1000;
    cfg.oracle = false;
    if (cfg.mode == rdkrylov::StopMode::oracle) {
      cfg.mode = rdkrylov::StopMode::residual;
    }
  }
  if (!flags.oracle.empty()) {
    cfg.oracle = flags.oracle == "on";
    if (!cfg.oracle && cfg.mode == rdkrylov::StopMode::oracle) {
      cfg.mode = rdkrylov::StopMode::residual;
    }
  }
  if (flags.seed) {
    cfg.seed = *flags.seed;
  }
  cfg.validate();
  return cfg;
}

void report_runs(const std::vector<rdkrylov::RunResult>& runs) {
  for (const auto& r : runs) {
    std::printf("k=%d c=%g theta=%.6f tau=%.6f m=%d converged=%s -> %s\n", r.k, r.c, r.theta,
                r.tau, r.approx.m, r.approx.converged ? "yes" : "no", r.path.string().c_str());
  }
}

int calibrate(const rdkrylov::ExperimentConfig& cfg) {
  for (const auto& eo : rdkrylov::build_operators(cfg)) {
    const double theta = rdkrylov::resolve_theta(cfg, eo);
    for (int k : cfg.k) {
      rdkrylov::ExperimentConfig auto_cfg = cfg;
      auto_cfg.tau = {};
      const auto t = rdkrylov::resolve_tau(auto_cfg, eo, k, theta);
      const auto& p = *t.policy;
      std::printf("%s k=%d theta=%.6f target_m=%d tau_opt=%.6f window=[%.6f, %.6f]%s\n",
                  eo.label.c_str(), k, theta, p.target_m, p.tau_opt, p.tau_lo, p.tau_hi,
                  p.bracket_failure ? " (bracket failure)" : "");
    }
  }
  return 0;
}

int sector(const rdkrylov::ExperimentConfig& cfg) {
  for (const auto& eo : rdkrylov::build_operators(cfg)) {
    const auto info = rdkrylov::compute_sector(eo.op, cfg.n_angles, cfg.theta_margin, true);
    std::printf("%s M=%ld theta=%.6f theta_used=%.6f R=%.6e\n", eo.label.c_str(),
                static_cast<long>(eo.op.dimension()), info.theta, info.theta_used(),
                *info.radius);
  }
  return 0;
}

int phi(const rdkrylov::ExperimentConfig& cfg, const std::filesystem::path& out) {
  rdkrylov::ExperimentConfig one = cfg;
  one.k.resize(1);
  if (one.op == "advdiff") one.c.resize(1);
  one.tau_scale = {1.0};
  const auto runs = rdkrylov::run_convergence_experiment(one, out, "phi_history");
  const auto& r = runs.front();
  const auto path = out / ("phi_k" + std::to_string(r.k) + ".txt");
  std::ofstream f(path);
  if (!f) {
    throw rdkrylov::ParseError("cannot write " + path.string());
  }
  f << "# " << one.resolved() << "\n";
  for (Eigen::Index i = 0; i < r.approx.y.size(); ++i) {
    f << rdkrylov::detail::fmt(r.approx.y(i)) << "\n";
  }
  std::printf("k=%d m=%d converged=%s -> %s\n", r.k, r.approx.m,
              r.approx.converged ? "yes" : "no", path.string().c_str());
  return r.approx.converged ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"RD rational Arnoldi approximation of phi-functions"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string which;
  const std::pair<const char*, const char*> commands[] = {
      {"converge", "error and bound histories per (k, c), one CSV each"},
      {"residual", "true error next to the generalized residual"},
      {"window", "tau_opt and the admissible tau window for m = 2..window_m_max"},
      {"calibrate", "coarse-grid calibration of the target iteration count and tau"},
      {"sector", "field-of-values sector angle and radius"},
      {"phi", "one approximation, written as a column vector"},
  };
  for (auto [name, help] : commands) {
    add_common(app.add_subcommand(name, help), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  const std::filesystem::path out = flags.out;

  try {
    const auto cfg = load(flags);
    if (cmd == "converge") {
      report_runs(rdkrylov::run_convergence_experiment(cfg, out));
    } else if (cmd == "residual") {
      report_runs(rdkrylov::run_residual_experiment(cfg, out));
    } else if (cmd == "window") {
      std::printf("%s\n", rdkrylov::run_window_experiment(cfg, out).string().c_str());
    } else if (cmd == "calibrate") {
      return calibrate(cfg);
    } else if (cmd == "sector") {
      return sector(cfg);
    } else if (cmd == "phi") {
      return phi(cfg, out);
    }
  } catch (const rdkrylov::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const rdkrylov::error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
