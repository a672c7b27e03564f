#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "csv_io.hpp"
#include "lmfrail/em_gamma.hpp"
#include "lmfrail/profile_fit.hpp"
#include "lmfrail/region.hpp"
#include "lmfrail/sim_bench.hpp"
#include "lmfrail/version.hpp"

namespace lmfrail::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotConverged = 2;

using json = nlohmann::json;

std::string round4(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const json& config, double elapsed_ms,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "lmfrail";
  m["version"] = kVersion;
  m["command"] = command;
  m["config"] = config;
  m["timings_ms"] = elapsed_ms;
  m["outputs"] = outputs;
  std::ofstream f(out_path + ".manifest.json");
  f << m.dump(2) << "\n";
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string csv_path;
  std::string baseline = "nonparametric";
  std::string method = "lmm";
  double tol = 1e-4;
  int max_iters = 60;
  std::string out = "fit.csv";
};

void append_param(std::ofstream& f, const std::string& method,
                  const std::string& name, const std::string& value) {
  f << method << "," << name << "," << value << "\n";
}

void write_baseline_csv(const std::string& path, const BaselineHazard& b) {
  std::ofstream f(path);
  f << "time,increment,cumulative\n";
  if (b.is_constant()) {
    f << "," << io::format_full(b.rate()) << ",\n";
    return;
  }
  double cum = 0.0;
  for (const auto& j : b.jumps()) {
    cum += j.increment;
    f << io::format_full(j.time) << "," << io::format_full(j.increment)
      << "," << io::format_full(cum) << "\n";
  }
}

int cmd_fit(const FitArgs& args) {
  const Timer timer;
  const SurvivalDataset data = io::read_dataset_csv(args.csv_path);
  const bool run_lmm = args.method == "lmm" || args.method == "both";
  const bool run_em = args.method == "em" || args.method == "both";

  std::optional<FitResult> lmm;
  std::optional<EmFit> em;
  if (run_lmm) {
    FitConfig fc;
    fc.baseline_mode = args.baseline == "constant"
                           ? BaselineMode::constant_rate
                           : BaselineMode::nonparametric;
    fc.beta_tol = args.tol;
    fc.max_outer_iters = args.max_iters;
    lmm = fit(data, fc);
  }
  if (run_em) {
    EmConfig ec;
    ec.max_em_iters = std::max(args.max_iters * 10, 100);
    em = em_fit(data, ec);
  }

  std::ofstream f(args.out);
  if (!f) throw io::CsvError("cannot write '" + args.out + "'", 0, "");
  f << "method,parameter,value\n";
  std::vector<std::string> outputs{args.out};
  if (lmm) {
    for (int j = 0; j < lmm->beta_hat.size(); ++j) {
      append_param(f, "lmm", "beta.x" + std::to_string(j + 1),
                   io::format_full(lmm->beta_hat[j]));
    }
    append_param(f, "lmm", "lambda2", io::format_full(lmm->lambda_hat.lambda2));
    append_param(f, "lmm", "lambda3", io::format_full(lmm->lambda_hat.lambda3));
    append_param(f, "lmm", "lambda4", io::format_full(lmm->lambda_hat.lambda4));
    append_param(f, "lmm", "loglik", io::format_full(lmm->profile_loglik));
    append_param(f, "lmm", "on_boundary",
                 lmm->lambda_on_boundary ? "1" : "0");
    append_param(f, "lmm", "converged", lmm->converged ? "1" : "0");
    const std::string bpath = args.out + ".baseline.lmm.csv";
    write_baseline_csv(bpath, lmm->baseline_hat);
    outputs.push_back(bpath);
  }
  if (em) {
    for (int j = 0; j < em->beta_hat.size(); ++j) {
      append_param(f, "em", "beta.x" + std::to_string(j + 1),
                   io::format_full(em->beta_hat[j]));
    }
    append_param(f, "em", "eta", io::format_full(em->eta_hat));
    append_param(f, "em", "loglik", io::format_full(em->loglik));
    append_param(f, "em", "converged", em->converged ? "1" : "0");
    const std::string bpath = args.out + ".baseline.em.csv";
    write_baseline_csv(bpath, em->baseline_hat);
    outputs.push_back(bpath);
  }
  f.close();

  std::cout << "fit: n = " << data.size() << ", events = " << data.n_events()
            << ", p = " << data.covariate_dim() << "\n";
  if (lmm) {
    std::cout << "  lmm ";
    for (int j = 0; j < lmm->beta_hat.size(); ++j) {
      std::cout << "beta" << (j + 1) << " = " << round4(lmm->beta_hat[j])
                << "  ";
    }
    std::cout << "lambda = (" << round4(lmm->lambda_hat.lambda2) << ", "
              << round4(lmm->lambda_hat.lambda3) << ", "
              << round4(lmm->lambda_hat.lambda4) << ")"
              << (lmm->lambda_on_boundary ? " [boundary]" : "")
              << (lmm->converged ? "" : " [NOT CONVERGED]") << "\n";
  }
  if (em) {
    std::cout << "  em  ";
    for (int j = 0; j < em->beta_hat.size(); ++j) {
      std::cout << "beta" << (j + 1) << " = " << round4(em->beta_hat[j])
                << "  ";
    }
    std::cout << "eta = " << round4(em->eta_hat)
              << (em->converged ? "" : " [NOT CONVERGED]") << "\n";
  }

  json cfg{{"csv", args.csv_path},      {"baseline", args.baseline},
           {"method", args.method},     {"tol", args.tol},
           {"max_iters", args.max_iters}, {"out", args.out}};
  write_manifest(args.out, "fit", cfg, timer.ms(), outputs);

  const bool ok = (!lmm || lmm->converged) && (!em || em->converged);
  return ok ? kExitOk : kExitNotConverged;
}

// ----------------------------------------------------------- simulate

struct SimArgs {
  std::string table = "custom";
  int n = 200;
  double beta = 1.0986122886681098;
  std::string frailty = "none";
  double eta = 0.1;
  double a1 = 5.0, b1 = 1.0, a2 = 3.0, b2 = 1.0;
  double weight = 0.4;
  double c_const = 0.01;
  double tau = 4.6;
  double censor_mean = 100.0;
  double censor_sd = 15.0;
  int replicates = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "simulate.csv";
  std::string emit_datasets;
};

sim::FrailtySpec frailty_from_args(const SimArgs& a) {
  if (a.frailty == "none") return sim::FrailtySpec::none();
  if (a.frailty == "gamma") return sim::FrailtySpec::gamma(a.eta);
  if (a.frailty == "beta") return sim::FrailtySpec::beta(a.a1, a.b1);
  if (a.frailty == "betamix") {
    return sim::FrailtySpec::beta_mixture(a.weight, a.a1, a.b1, a.a2, a.b2);
  }
  throw std::invalid_argument("unknown frailty '" + a.frailty + "'");
}

int cmd_simulate(const SimArgs& args) {
  const Timer timer;
  std::vector<std::pair<std::string, sim::SimConfig>> scenarios;
  sim::SimConfig base;
  base.beta_true = args.beta;
  base.c_const = args.c_const;
  base.tau = args.tau;
  base.censor_mean = args.censor_mean;
  base.censor_sd = args.censor_sd;
  base.replicates = args.replicates;
  base.master_seed = args.seed;

  if (args.table == "1") {
    for (double eta : {0.1, 0.2, 0.4}) {
      sim::SimConfig c = base;
      c.n = 200;
      c.frailty = sim::FrailtySpec::gamma(eta);
      scenarios.emplace_back("gamma eta=" + round4(eta), c);
    }
  } else if (args.table == "2") {
    {
      sim::SimConfig c = base;
      c.n = 500;
      c.frailty = sim::FrailtySpec::beta(5.0, 1.0);
      scenarios.emplace_back("beta(5,1)", c);
    }
    {
      sim::SimConfig c = base;
      c.n = 500;
      c.frailty = sim::FrailtySpec::beta_mixture(0.4, 3.0, 3.0, 3.0, 1.0);
      scenarios.emplace_back("0.4 beta(3,3) + 0.6 beta(3,1)", c);
    }
  } else {
    sim::SimConfig c = base;
    c.n = args.n;
    c.frailty = frailty_from_args(args);
    scenarios.emplace_back(c.frailty.label(), c);
  }

  if (!args.emit_datasets.empty()) {
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      for (int r = 0; r < scenarios[s].second.replicates; ++r) {
        char name[64];
        std::snprintf(name, sizeof(name), "/scenario_%zu_rep_%03d.csv", s,
                      r);
        io::write_dataset_csv(
            args.emit_datasets + name,
            sim::generate_dataset(scenarios[s].second, r));
      }
    }
  }

  std::ofstream f(args.out);
  if (!f) throw io::CsvError("cannot write '" + args.out + "'", 0, "");
  f << "scenario,n,replicates,method,used,failures,bias,std,"
       "mean_fit_seconds\n";
  std::printf("%-32s %-5s %-6s %10s %10s %6s %10s\n", "scenario", "n",
              "method", "bias", "std", "fail", "sec/fit");
  for (const auto& [label, cfg] : scenarios) {
    const auto rows = sim::run_comparison(cfg, args.threads);
    for (const auto& row : rows) {
      f << label << "," << cfg.n << "," << cfg.replicates << ","
        << row.method << "," << row.replicates_used << "," << row.failures
        << "," << io::format_full(row.bias) << ","
        << (std::isnan(row.std_dev) ? std::string()
                                    : io::format_full(row.std_dev))
        << "," << io::format_full(row.mean_fit_seconds) << "\n";
      std::printf("%-32s %-5d %-6s %10s %10s %6d %10.3f\n", label.c_str(),
                  cfg.n, row.method.c_str(), round4(row.bias).c_str(),
                  std::isnan(row.std_dev) ? "-"
                                          : round4(row.std_dev).c_str(),
                  row.failures, row.mean_fit_seconds);
    }
  }
  f.close();

  json cfg{{"table", args.table},   {"n", args.n},
           {"beta", args.beta},     {"frailty", args.frailty},
           {"replicates", args.replicates}, {"seed", args.seed},
           {"threads", args.threads}, {"out", args.out}};
  write_manifest(args.out, "simulate", cfg, timer.ms(), {args.out});
  return kExitOk;
}

// ----------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string csv_path;
  std::string bins = "1..10";
  std::string out = "diagnose.csv";
};

std::vector<double> parse_bins(const std::string& spec) {
  std::vector<double> out;
  const auto dots = spec.find("..");
  if (dots != std::string::npos) {
    const int lo = std::stoi(spec.substr(0, dots));
    const int hi = std::stoi(spec.substr(dots + 2));
    if (lo < 1 || hi < lo) {
      throw std::invalid_argument("invalid bin range '" + spec + "'");
    }
    for (int g = lo; g <= hi; ++g) out.push_back(g);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty bin list");
  return out;
}

int cmd_diagnose(const DiagnoseArgs& args) {
  const Timer timer;
  const SurvivalDataset data = io::read_dataset_csv(args.csv_path);
  const std::vector<double> lengths = parse_bins(args.bins);
  const auto diag = sim::binning_diagnostic(data, lengths);

  std::ofstream f(args.out);
  if (!f) throw io::CsvError("cannot write '" + args.out + "'", 0, "");
  f << "bin_length,ratio,skewness\n";
  std::printf("%-12s %12s %12s\n", "bin_length", "var/mean", "skewness");
  for (const auto& d : diag) {
    f << io::format_full(d.bin_length) << ","
      << (d.ratio ? io::format_full(*d.ratio) : std::string()) << ","
      << (d.skewness ? io::format_full(*d.skewness) : std::string()) << "\n";
    std::printf("%-12s %12s %12s\n", round4(d.bin_length).c_str(),
                d.ratio ? round4(*d.ratio).c_str() : "-",
                d.skewness ? round4(*d.skewness).c_str() : "-");
  }
  f.close();

  json cfg{{"csv", args.csv_path}, {"bins", args.bins}, {"out", args.out}};
  write_manifest(args.out, "diagnose", cfg, timer.ms(), {args.out});
  return kExitOk;
}

// ------------------------------------------------------------- region

struct RegionArgs {
  std::string lambda;
  std::string boundary;
};

std::vector<double> parse_tuple(const std::string& spec, std::size_t count,
                                const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  if (out.size() != count) {
    throw std::invalid_argument(what + " needs " + std::to_string(count) +
                                " comma-separated values");
  }
  return out;
}

int cmd_region(const RegionArgs& args) {
  if (args.lambda.empty() == args.boundary.empty()) {
    throw std::invalid_argument(
        "region: pass exactly one of --lambda or --boundary");
  }
  if (!args.lambda.empty()) {
    const auto v = parse_tuple(args.lambda, 3, "--lambda");
    const LmmParams lmm{v[0], v[1], v[2]};
    const bool member = region::is_member(lmm);
    std::cout << "member: " << (member ? "true" : "false") << "\n";
    std::cout << "defect: " << io::format_full(region::boundary_defect(lmm))
              << "\n";
    return kExitOk;
  }
  const auto v = parse_tuple(args.boundary, 2, "--boundary");
  const auto r = region::boundary_param(v[0], v[1]);
  std::cout << "lambda: (" << io::format_full(r.lambda.lambda2) << ", "
            << io::format_full(r.lambda.lambda3) << ", "
            << io::format_full(r.lambda.lambda4) << ")\n";
  std::cout << "valid: " << (r.valid ? "true" : "false") << "\n";
  if (r.valid) {
    const double y = region::double_root(r.lambda);
    std::cout << "double_root: " << io::format_full(y) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Frailty survival regression via local mixtures"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand(
      "fit", "Fit a frailty survival regression to a CSV dataset");
  fit_cmd->add_option("csv", fit_args.csv_path, "input CSV")->required();
  fit_cmd->add_option("--baseline", fit_args.baseline, "baseline hazard")
      ->check(CLI::IsMember({"constant", "nonparametric"}));
  fit_cmd->add_option("--method", fit_args.method, "estimator(s) to run")
      ->check(CLI::IsMember({"lmm", "em", "both"}));
  fit_cmd->add_option("--tol", fit_args.tol, "outer beta tolerance");
  fit_cmd->add_option("--max-iters", fit_args.max_iters,
                      "outer iteration cap");
  fit_cmd->add_option("--out", fit_args.out, "output CSV path");

  SimArgs sim_args;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Replicate comparison bench on simulated data");
  sim_cmd->add_option("--table", sim_args.table, "preset: 1, 2 or custom")
      ->check(CLI::IsMember({"1", "2", "custom"}));
  sim_cmd->add_option("--n", sim_args.n, "sample size (custom)");
  sim_cmd->add_option("--beta", sim_args.beta, "true coefficient");
  sim_cmd->add_option("--frailty", sim_args.frailty,
                      "none|gamma|beta|betamix (custom)")
      ->check(CLI::IsMember({"none", "gamma", "beta", "betamix"}));
  sim_cmd->add_option("--eta", sim_args.eta, "gamma frailty variance");
  sim_cmd->add_option("--a1", sim_args.a1, "beta shape a (first component)");
  sim_cmd->add_option("--b1", sim_args.b1, "beta shape b (first component)");
  sim_cmd->add_option("--a2", sim_args.a2, "beta shape a (second component)");
  sim_cmd->add_option("--b2", sim_args.b2, "beta shape b (second component)");
  sim_cmd->add_option("--weight", sim_args.weight, "mixture weight");
  sim_cmd->add_option("--c-const", sim_args.c_const, "time scale constant");
  sim_cmd->add_option("--tau", sim_args.tau, "baseline shape");
  sim_cmd->add_option("--censor-mean", sim_args.censor_mean,
                      "censoring mean");
  sim_cmd->add_option("--censor-sd", sim_args.censor_sd, "censoring sd");
  sim_cmd->add_option("--replicates", sim_args.replicates,
                      "replicates per scenario");
  sim_cmd->add_option("--seed", sim_args.seed, "master seed");
  sim_cmd->add_option("--threads", sim_args.threads, "worker threads");
  sim_cmd->add_option("--out", sim_args.out, "output CSV path");
  sim_cmd->add_option("--emit-datasets", sim_args.emit_datasets,
                      "directory for per-replicate CSV dumps");

  DiagnoseArgs diag_args;
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "Event-count binning diagnostic (overdispersion)");
  diag_cmd->add_option("csv", diag_args.csv_path, "input CSV")->required();
  diag_cmd->add_option("--bins", diag_args.bins,
                       "bin lengths: 'a..b' or comma list");
  diag_cmd->add_option("--out", diag_args.out, "output CSV path");

  RegionArgs region_args;
  auto* region_cmd = app.add_subcommand(
      "region", "Feasible-region membership and boundary queries");
  region_cmd->add_option("--lambda", region_args.lambda,
                         "lambda2,lambda3,lambda4 membership query");
  region_cmd->add_option("--boundary", region_args.boundary,
                         "y,lambda2 boundary parametrization query");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_args);
    if (sim_cmd->parsed()) return cmd_simulate(sim_args);
    if (diag_cmd->parsed()) return cmd_diagnose(diag_args);
    if (region_cmd->parsed()) return cmd_region(region_args);
  } catch (const io::CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitNotConverged;
  }
  return kExitInput;
}

}  // namespace lmfrail::cli
