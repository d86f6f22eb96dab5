#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phaselab/injectivity.hpp"
#include "phaselab/io.hpp"
#include "phaselab/rng.hpp"
#include "phaselab/stability_avg.hpp"
#include "phaselab/stability_worst.hpp"
#include "phaselab/threads.hpp"

namespace {

using namespace phaselab;

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;   // valid negative/degenerate analysis result
constexpr int kExitUsage = 2;      // usage or input error
constexpr int kExitBudget = 3;     // enumeration budget exceeded

int verdict_exit(const InjectivityVerdict& v) {
  return v.status == Status::NotInjective ? kExitNegative : kExitOk;
}

InjectivityVerdict check_auto(const MeasurementEnsemble& Phi, const CPOptions& cp,
                              const HMWOptions& hmw, int probes, std::uint64_t seed) {
  if (Phi.is_real()) return real_injectivity(Phi, cp);
  if (Phi.M() == 3) return hmw_test(Phi, hmw);
  InjectivityVerdict v = nullspace_classifier(Phi, hmw);
  if (v.status != Status::Indeterminate) return v;
  std::string trail = v.reason;
  try {
    InjectivityVerdict f = cp_necessity_filter(Phi, cp);
    if (f.status == Status::NotInjective) {
      f.nullity = v.nullity;
      return f;
    }
    trail += "; " + f.reason;
  } catch (const budget_error&) {
    trail += "; complement property enumeration over budget";
  }
  const Eigen::Index M = Phi.M();
  for (int k = 0; k < probes; ++k) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    const Eigen::VectorXcd u = rng.complex_normal_vector(M);
    if (span_condition(Phi, u, hmw.rank) < 2 * M - 1) {
      InjectivityVerdict out;
      out.status = Status::NotInjective;
      out.method = "span_condition";
      out.nullity = v.nullity;
      out.rank_floor = hmw.rank.floor;
      out.witness = span_condition_witness(Phi, u, hmw.rank);
      return out;
    }
  }
  v.reason = trail + "; " + std::to_string(probes) + " span probes found no certificate";
  return v;
}

int cmd_check(const std::string& input, const std::string& method, int probes,
              std::uint64_t seed, double rank_floor, double det_tol, int threads) {
  const MeasurementEnsemble Phi = load_ensemble(input);
  CPOptions cp;
  cp.threads = threads;
  cp.rank.floor = rank_floor;
  HMWOptions hmw;
  hmw.det_tol = det_tol;
  hmw.rank.floor = rank_floor;
  InjectivityVerdict v;
  if (method == "auto") {
    v = check_auto(Phi, cp, hmw, probes, seed);
  } else if (method == "cp") {
    v = Phi.is_real() ? real_injectivity(Phi, cp) : cp_necessity_filter(Phi, cp);
  } else if (method == "hmw") {
    v = hmw_test(Phi, hmw);
  } else if (method == "nullspace") {
    v = nullspace_classifier(Phi, hmw);
  } else {
    throw input_error("check: unknown method " + method);
  }
  std::cout << verdict_to_json(v) << "\n";
  return verdict_exit(v);
}

int cmd_scp(const std::string& input, int budget, const std::string& mode, int threads) {
  const MeasurementEnsemble Phi = load_ensemble(input);
  if (mode == "exact") {
    SCPOptions opts;
    opts.max_N = budget;
    opts.threads = threads;
    const SCPReport rep = scp_sigma(Phi, opts);
    std::cout << scp_report_to_json(rep) << "\n";
    return rep.sigma == 0.0 ? kExitNegative : kExitOk;
  }
  if (mode == "bound") {
    const SCPBound bound = scp_window_bound(Phi);
    std::cout << scp_bound_to_json(bound) << "\n";
    return bound.sigma_sq_upper == 0.0 ? kExitNegative : kExitOk;
  }
  throw input_error("scp: unknown mode " + mode);
}

int cmd_lipschitz(const std::string& input, std::uint64_t samples, std::uint64_t seed,
                  int budget, int threads) {
  const MeasurementEnsemble Phi = load_ensemble(input);
  SCPOptions opts;
  opts.max_N = budget;
  opts.threads = threads;
  const LipschitzReport rep = lipschitz_report(Phi, samples, seed, opts);
  std::cout << lipschitz_report_to_json(rep) << "\n";
  return rep.sigma == 0.0 ? kExitNegative : kExitOk;
}

int cmd_gaussian(int M, const std::vector<double>& R_values, int trials, std::uint64_t seed,
                 const std::string& out_prefix, int budget, int threads) {
  GaussianExperimentConfig cfg;
  cfg.M = M;
  cfg.R_values = R_values;
  cfg.trials = trials;
  cfg.base_seed = seed;
  cfg.threads = threads;
  cfg.scp.max_N = budget;
  const GaussianExperimentResult result = run_gaussian_experiment(cfg);
  const std::string points_path = out_prefix + "_points.csv";
  const std::string summary_path = out_prefix + "_summary.csv";
  write_file(points_path, points_csv(result));
  write_file(summary_path, summary_csv(result));
  std::string out = "{\"points_csv\":\"" + points_path + "\",\"summary_csv\":\"" + summary_path +
                    "\",\"M\":" + std::to_string(M) + ",\"trials\":" + std::to_string(trials) +
                    ",\"base_seed\":" + std::to_string(seed) + ",\"excluded\":[";
  for (std::size_t i = 0; i < result.summary.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(result.summary[i].excluded);
  }
  out += "]}";
  std::cout << out << "\n";
  return kExitOk;
}

int cmd_crlb(const std::string& input, const std::string& theta_path, double noise_sigma,
             std::uint64_t mc_trials, std::uint64_t seed, int threads) {
  const MeasurementEnsemble Phi = load_ensemble(input);
  const Eigen::VectorXcd theta = load_theta(theta_path);
  const NoiseModel noise{noise_sigma};
  const FisherReport rep = fisher_matrix(theta, Phi, noise);
  std::optional<double> discrepancy;
  std::optional<std::uint64_t> trials;
  if (mc_trials > 0) {
    const Eigen::MatrixXd J_mc = monte_carlo_fisher(theta, Phi, noise, mc_trials, seed, threads);
    discrepancy = (J_mc - rep.J).norm() / std::max(rep.J.norm(), 1e-300);
    trials = mc_trials;
  }
  std::cout << fisher_report_to_json(rep, discrepancy, trials) << "\n";
  return rep.positive_definite ? kExitOk : kExitNegative;
}

int cmd_make(const std::string& kind, int M, int N, std::uint64_t seed, const std::string& field,
             std::optional<double> alpha, const std::string& out_path) {
  MeasurementEnsemble Phi;
  const Field f = field == "complex" ? Field::Complex : Field::Real;
  if (field != "real" && field != "complex") {
    throw input_error("make: field must be real or complex");
  }
  if (kind == "identity") {
    if (M < 1) throw input_error("make: identity requires --M");
    Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(M, M);
    Phi = f == Field::Real ? make_real_ensemble(I.real()) : make_complex_ensemble(I);
  } else if (kind == "fourier-localized") {
    if (M < 1 || N < 1) throw input_error("make: fourier-localized requires --M and --N");
    Phi = localized_fourier_frame(M, N);
  } else if (kind == "fracft3") {
    Phi = alpha ? fractional_dft_3(*alpha) : fractional_dft_3_stack();
  } else if (kind == "gaussian") {
    if (M < 1 || N < 1) throw input_error("make: gaussian requires --M and --N");
    Phi = gaussian_ensemble(M, N, seed, f);
  } else {
    throw input_error("make: unknown kind " + kind);
  }
  save_ensemble(Phi, out_path);
  std::cout << "{\"written\":\"" << out_path << "\",\"field\":\""
            << (Phi.is_real() ? "real" : "complex") << "\",\"M\":" << Phi.M()
            << ",\"N\":" << Phi.N() << "}\n";
  return kExitOk;
}

int cmd_bounds(int M) {
  std::cout << bounds_to_json(M) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: injectivity and stability analysis of phase retrieval ensembles"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --threads appear after the subcommand too
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 = PHASELAB_THREADS or hardware)");

  std::string input, method = "auto", mode = "exact", out_prefix, theta_path, kind,
              field = "real", out_path;
  int probes = 64, budget_cp = 26, budget_scp = 24, M = 0, N = 0, trials = 30;
  std::uint64_t seed = 0, samples = 10000, mc_trials = 0;
  double rank_floor = 1e-10, det_tol = 1e-10, noise_sigma = 1.0;
  std::vector<double> R_values;
  std::optional<double> alpha;

  CLI::App* check = app.add_subcommand("check", "injectivity analysis");
  check->add_option("--input", input)->required();
  check->add_option("--method", method)->check(CLI::IsMember({"auto", "cp", "hmw", "nullspace"}));
  check->add_option("--probes", probes);
  check->add_option("--seed", seed);
  check->add_option("--rank-floor", rank_floor);
  check->add_option("--det-tol", det_tol);

  CLI::App* scp = app.add_subcommand("scp", "sigma strong complement property");
  scp->add_option("--input", input)->required();
  scp->add_option("--budget", budget_scp);
  scp->add_option("--mode", mode)->check(CLI::IsMember({"exact", "bound"}));

  CLI::App* lip = app.add_subcommand("lipschitz", "worst-case stability report");
  lip->add_option("--input", input)->required();
  lip->add_option("--samples", samples);
  lip->add_option("--seed", seed);
  lip->add_option("--budget", budget_scp);

  CLI::App* gauss = app.add_subcommand("gaussian", "Gaussian stability experiment");
  gauss->add_option("--M", M)->required();
  gauss->add_option("--R", R_values)->required()->delimiter(',');
  gauss->add_option("--trials", trials);
  gauss->add_option("--seed", seed);
  gauss->add_option("--out", out_prefix)->required();
  gauss->add_option("--budget", budget_scp);

  CLI::App* crlb = app.add_subcommand("crlb", "Fisher information and CRLB");
  crlb->add_option("--input", input)->required();
  crlb->add_option("--theta", theta_path)->required();
  crlb->add_option("--noise-sigma", noise_sigma)->required();
  crlb->add_option("--mc", mc_trials);
  crlb->add_option("--seed", seed);

  CLI::App* make = app.add_subcommand("make", "generate a named ensemble");
  make->add_option("--kind", kind)
      ->required()
      ->check(CLI::IsMember({"identity", "fourier-localized", "fracft3", "gaussian"}));
  make->add_option("--M", M);
  make->add_option("--N", N);
  make->add_option("--seed", seed);
  make->add_option("--field", field)->check(CLI::IsMember({"real", "complex"}));
  double alpha_value = 0.0;
  CLI::Option* alpha_opt = make->add_option("--alpha", alpha_value);
  make->add_option("--out", out_path)->required();

  CLI::App* bounds = app.add_subcommand("bounds", "known injectivity thresholds for M");
  int bounds_M = 0;
  bounds->add_option("--M", bounds_M)->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*check) return cmd_check(input, method, probes, seed, rank_floor, det_tol, threads);
    if (*scp) return cmd_scp(input, budget_scp, mode, threads);
    if (*lip) return cmd_lipschitz(input, samples, seed, budget_scp, threads);
    if (*gauss) return cmd_gaussian(M, R_values, trials, seed, out_prefix, budget_scp, threads);
    if (*crlb) return cmd_crlb(input, theta_path, noise_sigma, mc_trials, seed, threads);
    if (*make) {
      if (alpha_opt->count() > 0) alpha = alpha_value;
      return cmd_make(kind, M, N, seed, field, alpha, out_path);
    }
    if (*bounds) return cmd_bounds(bounds_M);
  } catch (const budget_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
