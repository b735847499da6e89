// Command-line front end: meanfield, boundary, experiment, susceptibility
// and finitetemp pipelines with seeded, byte-reproducible CSV/JSON outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cavreg/csv.hpp"
#include "cavreg/experiment.hpp"
#include "cavreg/finitetemp.hpp"
#include "cavreg/instance.hpp"
#include "cavreg/lp.hpp"
#include "cavreg/meanfield.hpp"
#include "cavreg/rng.hpp"
#include "cavreg/suscept.hpp"
#include "cavreg/version.hpp"

namespace {

using json = nlohmann::json;
using namespace cavreg;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "csv";
  json parameters = json::object();

  json to_json() const {
    return json{{"command", command},
                {"seed", seed},
                {"output", output},
                {"format", format},
                {"parameters", parameters}};
  }

  // the hash pins the scientific configuration; the output path is just a
  // destination and stays out of it
  std::uint64_t hash() const {
    json j = to_json();
    j.erase("output");
    return fnv1a(j.dump());
  }
};

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void stamp(CsvBuilder& csv, const RunConfig& cfg) {
  csv.add_comment(std::string("cavreg ") + kVersion);
  csv.add_comment("seed=" + std::to_string(cfg.seed) +
                  " config_hash=" + hash_hex(cfg.hash()));
  csv.add_comment("config=" + cfg.to_json().dump());
}

json report_shell(const RunConfig& cfg) {
  return json{{"version", kVersion},
              {"config_hash", hash_hex(cfg.hash())},
              {"config", cfg.to_json()}};
}

void emit(const std::string& path, const std::string& content) {
  write_file_atomic(path, content);
  std::cerr << "wrote " << path << "\n";
}

// "a:b:step" (inclusive) or "v1,v2,..." or a single value
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, s = 0;
    char c1 = 0, c2 = 0;
    std::istringstream is(text);
    if (!(is >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':' || s <= 0) {
      throw std::invalid_argument("bad grid spec: " + text);
    }
    for (int k = 0; a + k * s <= b + 1e-9 * s; ++k) out.push_back(a + k * s);
    return out;
  }
  std::istringstream is(text);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("empty grid spec: " + text);
  return out;
}

PenaltyModel make_penalty(const std::string& kind, double lambda, double eps) {
  if (kind == "l1") return PenaltyModel::l1(lambda);
  if (kind == "ridge") return PenaltyModel::ridge(lambda);
  if (kind == "smoothed_l1") return PenaltyModel::smoothed_l1(lambda, eps);
  throw std::invalid_argument("unknown penalty: " + kind);
}

// ---------------------------------------------------------------------------
// meanfield
// ---------------------------------------------------------------------------

struct MeanfieldOpts {
  double rho = 0.2;
  std::string alpha = "0.5";
  double var0 = 1.0;
  std::string penalty = "l1";
  double lambda = 1.0;
  double epsilon = 1e-2;
  double sigma2 = 0.5;
  double noise_var = 0.0;
  bool bp_limit = false;
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 20000;
  std::string route = "auto";
  bool serial = false;
};

int run_meanfield(const MeanfieldOpts& o, RunConfig& cfg) {
  cfg.parameters = json{{"rho", o.rho},       {"alpha", o.alpha},
                        {"var0", o.var0},     {"penalty", o.penalty},
                        {"lambda", o.lambda}, {"epsilon", o.epsilon},
                        {"sigma2", o.sigma2}, {"noise-var", o.noise_var},
                        {"bp-limit", o.bp_limit}, {"damping", o.damping},
                        {"tol", o.tol},       {"max-iter", o.max_iter},
                        {"route", o.route},   {"serial", o.serial}};
  if (o.bp_limit && o.penalty != "l1") {
    throw std::invalid_argument("--bp-limit requires the l1 penalty");
  }
  const PenaltyModel pen = make_penalty(o.penalty, o.lambda, o.epsilon);
  const SignalPrior prior{o.rho, o.var0};
  const Exec exec = o.serial ? Exec::Serial : Exec::Parallel;
  MomentRoute route = MomentRoute::Auto;
  if (o.route == "closed") route = MomentRoute::ClosedForm;
  else if (o.route == "quadrature") route = MomentRoute::Quadrature;
  else if (o.route != "auto") throw std::invalid_argument("bad --route");

  const std::vector<double> alphas = parse_grid(o.alpha);
  int failures = 0;
  json results = json::array();
  CsvBuilder csv({"rho", "alpha", "q", "chi_bar", "theta", "sigma_xi2",
                  "converged", "iterations"});
  stamp(csv, cfg);

  for (double alpha : alphas) {
    FixedPointReport rep;
    bool ok = true;
    try {
      if (o.bp_limit) {
        rep = solve_basis_pursuit_limit(alpha, prior, o.noise_var, o.tol);
      } else {
        const EnsembleParams params{alpha, o.sigma2, o.noise_var};
        rep = solve_fixed_point(params, pen, prior,
                                default_init(params, pen, prior), o.damping,
                                o.tol, o.max_iter, route, exec);
      }
    } catch (const std::exception& e) {
      ok = false;
      ++failures;
      std::cerr << "meanfield point alpha=" << alpha << " failed: " << e.what()
                << "\n";
    }
    const double nan = std::nan("");
    const MeanFieldState& st = rep.state;
    csv.add_row({format_double(o.rho), format_double(alpha),
                 format_double(ok ? st.q : nan),
                 format_double(ok ? st.chi_bar : nan),
                 format_double(ok ? st.theta : nan),
                 format_double(ok ? st.sigma_xi2 : nan),
                 ok && rep.converged ? "1" : "0",
                 std::to_string(rep.iterations)});
    results.push_back(json{{"rho", o.rho},
                           {"alpha", alpha},
                           {"ok", ok},
                           {"q", st.q},
                           {"chi_bar", st.chi_bar},
                           {"theta", st.theta},
                           {"sigma_xi2", st.sigma_xi2},
                           {"converged", rep.converged},
                           {"iterations", rep.iterations},
                           {"residual", rep.residual}});
  }

  if (cfg.format == "json") {
    json rep = report_shell(cfg);
    rep["results"] = results;
    emit(cfg.output, rep.dump(2) + "\n");
  } else {
    emit(cfg.output, csv.str());
  }
  return failures ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// boundary
// ---------------------------------------------------------------------------

struct BoundaryOpts {
  std::string rho_grid = "0.1:0.9:0.1";
  std::string bracket = "0.05:0.99";
  double tol_alpha = 2e-3;
  double var0 = 1.0;
  bool serial = false;
};

int run_boundary(const BoundaryOpts& o, RunConfig& cfg) {
  cfg.parameters = json{{"rho-grid", o.rho_grid},
                        {"alpha-bracket", o.bracket},
                        {"tol-alpha", o.tol_alpha},
                        {"var0", o.var0},
                        {"serial", o.serial}};
  const std::vector<double> rhos = parse_grid(o.rho_grid);
  double blo = 0.05, bhi = 0.99;
  {
    std::istringstream is(o.bracket);
    char c = 0;
    if (!(is >> blo >> c >> bhi) || c != ':' || !(blo < bhi)) {
      throw std::invalid_argument("bad --alpha-bracket: " + o.bracket);
    }
  }

  const auto pts = scan_phase_boundary(
      rhos, {blo, bhi}, o.tol_alpha, o.var0,
      o.serial ? Exec::Serial : Exec::Parallel);

  CsvBuilder csv({"rho", "alpha_c", "tol_alpha"});
  stamp(csv, cfg);
  json results = json::array();
  int failures = 0;
  for (const auto& p : pts) {
    if (!p.ok) {
      ++failures;
      std::cerr << "boundary point rho=" << p.rho << " failed: " << p.note
                << "\n";
    }
    csv.add_row({format_double(p.rho),
                 format_double(p.ok ? p.alpha_c : std::nan("")),
                 format_double(p.tol_alpha)});
    results.push_back(json{{"rho", p.rho},
                           {"alpha_c", p.alpha_c},
                           {"tol_alpha", p.tol_alpha},
                           {"ok", p.ok},
                           {"note", p.note}});
  }

  if (cfg.format == "json") {
    json rep = report_shell(cfg);
    rep["results"] = results;
    emit(cfg.output, rep.dump(2) + "\n");
  } else {
    emit(cfg.output, csv.str());
  }
  return failures ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

struct ExperimentOpts {
  int n = 200;
  int k = -1;
  double rho = -1.0;
  std::string alpha = "0.35";
  int instances = 10;
  int nodes = 50;
  double var0 = 1.0;
  double f_min = 1e-4;
  double f_max = 0.5;
  int f_per_side = 10;
  double fit_window = 1e-2;
  bool mse_sweep_mode = false;
  bool serial = false;
};

std::vector<double> build_f_grid(const ExperimentOpts& o) {
  std::vector<double> grid{0.0};
  for (int k = 0; k < o.f_per_side; ++k) {
    const double mag =
        o.f_min * std::pow(o.f_max / o.f_min,
                           static_cast<double>(k) /
                               std::max(1, o.f_per_side - 1));
    grid.push_back(mag);
    grid.push_back(-mag);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

int run_experiment(const ExperimentOpts& o, RunConfig& cfg) {
  const double rho = o.rho >= 0.0 ? o.rho
                                  : static_cast<double>(o.k) / o.n;
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("provide --rho in [0,1] or --k in [0,n]");
  }
  cfg.parameters = json{{"n", o.n},
                        {"rho", rho},
                        {"alpha", o.alpha},
                        {"instances", o.instances},
                        {"nodes", o.nodes},
                        {"var0", o.var0},
                        {"f-min", o.f_min},
                        {"f-max", o.f_max},
                        {"f-per-side", o.f_per_side},
                        {"fit-window", o.fit_window},
                        {"mse-sweep", o.mse_sweep_mode},
                        {"serial", o.serial}};
  const Exec exec = o.serial ? Exec::Serial : Exec::Parallel;
  const SignalPrior prior{rho, o.var0};
  const std::vector<double> alphas = parse_grid(o.alpha);

  if (o.mse_sweep_mode) {
    const auto rows =
        mse_sweep(alphas, rho, o.n, o.instances, cfg.seed, o.var0, exec);
    CsvBuilder csv({"alpha", "mse_median", "mse_iqr", "q_meanfield", "n_fail"});
    stamp(csv, cfg);
    json results = json::array();
    int failures = 0;
    for (const auto& r : rows) {
      failures += r.n_fail;
      csv.add_row({format_double(r.alpha), format_double(r.mse_median),
                   format_double(r.mse_iqr), format_double(r.q_meanfield),
                   std::to_string(r.n_fail)});
      results.push_back(json{{"alpha", r.alpha},
                             {"mse_median", r.mse_median},
                             {"mse_iqr", r.mse_iqr},
                             {"q_meanfield", r.q_meanfield},
                             {"n_fail", r.n_fail}});
    }
    json rep = report_shell(cfg);
    rep["results"] = results;
    if (cfg.format == "json") {
      emit(cfg.output + "_sweep.json", rep.dump(2) + "\n");
    } else {
      emit(cfg.output + "_sweep.csv", csv.str());
      emit(cfg.output + "_report.json", rep.dump(2) + "\n");
    }
    return failures ? kExitPartial : kExitOk;
  }

  if (alphas.size() != 1) {
    throw std::invalid_argument("response mode takes a single --alpha");
  }
  const double alpha = alphas[0];
  const int M = static_cast<int>(std::lround(alpha * o.n));
  const std::vector<double> f_grid = build_f_grid(o);

  std::vector<ExperimentReport> reports;
  int failed_cells = 0;
  int lp_solves = 0;
  double wall = 0.0;
  for (int i = 0; i < o.instances; ++i) {
    const std::uint64_t inst_seed = derive_seed(cfg.seed, 0x10000ull + i);
    const ProblemInstance inst = draw_instance(o.n, M, prior, 0.0, inst_seed);
    reports.push_back(run_response_experiment(
        inst, f_grid, o.nodes, derive_seed(cfg.seed, 0x20000ull + i), exec,
        o.fit_window));
    failed_cells += reports.back().failed_cells;
    lp_solves += reports.back().lp_solves;
    wall += reports.back().wall_seconds;
  }
  std::cerr << "experiment: " << lp_solves << " LP solves in " << wall
            << " s\n";

  // staircases: per-instance blocks sharing the node,f,u_a columns
  CsvBuilder stair_csv({"node", "f", "u_a"});
  stamp(stair_csv, cfg);
  for (std::size_t r = 0; r < reports.size(); ++r) {
    stair_csv.add_inline_comment("instance=" + std::to_string(r) +
                                 " seed=" + std::to_string(reports[r].seed));
    const ResponseCurve& c = reports[r].response;
    for (std::size_t k = 0; k < c.node_ids.size(); ++k) {
      for (std::size_t i = 0; i < c.f_grid.size(); ++i) {
        stair_csv.add_row({std::to_string(c.node_ids[k]),
                           format_double(c.f_grid[i]),
                           format_double(c.staircases[k][i])});
      }
    }
  }

  // pooled average response over instances
  CsvBuilder resp_csv({"f", "avg_response"});
  stamp(resp_csv, cfg);
  json inst_results = json::array();
  std::vector<double> pooled(f_grid.size(), 0.0);
  for (const auto& rep : reports) {
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      pooled[i] += rep.response.avg_response[i] / reports.size();
    }
    json jr{{"seed", rep.seed},
            {"N", rep.N},
            {"M", rep.M},
            {"K", rep.K},
            {"mse_empirical", rep.mse_empirical},
            {"lp_solves", rep.lp_solves},
            {"failed_cells", rep.failed_cells}};
    if (rep.response.fitted_chi) jr["fitted_chi"] = *rep.response.fitted_chi;
    inst_results.push_back(jr);
  }
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    resp_csv.add_row({format_double(f_grid[i]), format_double(pooled[i])});
  }

  json rep = report_shell(cfg);
  rep["instances"] = inst_results;
  rep["alpha"] = alpha;
  rep["M"] = M;
  if (reports.size() >= 2) {
    try {
      const auto [mean, se] = estimate_empirical_chi(reports);
      rep["chi_mean"] = mean;
      rep["chi_stderr"] = se;
    } catch (const std::exception&) {
      // fewer than 2 fitted slopes; leave absent
    }
  }

  if (cfg.format == "json") {
    emit(cfg.output + "_report.json", rep.dump(2) + "\n");
  } else {
    emit(cfg.output + "_staircase.csv", stair_csv.str());
    emit(cfg.output + "_response.csv", resp_csv.str());
    emit(cfg.output + "_report.json", rep.dump(2) + "\n");
  }
  return failed_cells ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// susceptibility
// ---------------------------------------------------------------------------

struct SusceptOpts {
  int n = 400;
  int m = 200;
  int seeds = 20;
  std::string penalty = "ridge";
  double lambda = 1.0;
  double epsilon = 1e-2;
  double sigma2 = 0.5;
  double rho = 0.2;
  double var0 = 1.0;
  bool serial = false;
};

int run_susceptibility(const SusceptOpts& o, RunConfig& cfg) {
  cfg.parameters = json{{"n", o.n},           {"m", o.m},
                        {"seeds", o.seeds},   {"penalty", o.penalty},
                        {"lambda", o.lambda}, {"epsilon", o.epsilon},
                        {"sigma2", o.sigma2}, {"rho", o.rho},
                        {"var0", o.var0},     {"serial", o.serial}};
  const PenaltyModel pen = make_penalty(o.penalty, o.lambda, o.epsilon);
  const SusceptibilityReport report =
      verify_susceptibility_identities(o.n, o.m, pen, {o.rho, o.var0}, o.seeds, o.sigma2,
                        cfg.seed, o.serial ? Exec::Serial : Exec::Parallel);

  CsvBuilder csv({"seed", "N", "M", "diag_mean", "chi_bar_resummed",
                  "offdiag_rms", "trace_lhs", "trace_rhs"});
  stamp(csv, cfg);
  for (const auto& row : report.per_seed) {
    csv.add_row({std::to_string(row.seed), std::to_string(report.N),
                 std::to_string(report.M), format_double(row.diag_mean),
                 format_double(row.chi_bar_resummed),
                 format_double(row.offdiag_rms), format_double(row.trace_lhs),
                 format_double(row.trace_rhs)});
  }

  json rep = report_shell(cfg);
  rep["results"] = json{{"N", report.N},
                        {"M", report.M},
                        {"seeds_used", report.seeds_used},
                        {"seeds_failed", report.seeds_failed},
                        {"diag_mean", report.chi_matrix_diag_mean},
                        {"chi_bar_resummed", report.chi_bar_resummed},
                        {"offdiag_rms", report.offdiag_rms},
                        {"self_energy", report.self_energy},
                        {"trace_lhs", report.trace_identity_lhs},
                        {"trace_rhs", report.trace_identity_rhs}};

  if (cfg.format == "json") {
    emit(cfg.output, rep.dump(2) + "\n");
  } else {
    emit(cfg.output, csv.str());
  }
  return report.seeds_failed ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------------------
// finitetemp
// ---------------------------------------------------------------------------

struct FiniteTempOpts {
  std::string beta_grid = "10,100,1000";
  double alpha = 0.6;
  double rho = 0.2;
  double var0 = 1.0;
  std::string penalty = "smoothed_l1";
  double lambda = 1.0;
  double epsilon = 1e-2;
  double sigma2 = 0.5;
  double tol = 1e-10;
  bool serial = false;
};

int run_finitetemp(const FiniteTempOpts& o, RunConfig& cfg) {
  cfg.parameters = json{{"beta-grid", o.beta_grid}, {"alpha", o.alpha},
                        {"rho", o.rho},             {"var0", o.var0},
                        {"penalty", o.penalty},     {"lambda", o.lambda},
                        {"epsilon", o.epsilon},     {"sigma2", o.sigma2},
                        {"tol", o.tol},             {"serial", o.serial}};
  const PenaltyModel pen = make_penalty(o.penalty, o.lambda, o.epsilon);
  const EnsembleParams params{o.alpha, o.sigma2, 0.0};
  const auto rows =
      fdt_check(params, pen, {o.rho, o.var0}, parse_grid(o.beta_grid), o.tol,
                o.serial ? Exec::Serial : Exec::Parallel);

  CsvBuilder csv({"beta", "q", "delta_Q", "beta_deltaQ", "chi_bar_ref",
                  "rel_err"});
  stamp(csv, cfg);
  json results = json::array();
  for (const auto& r : rows) {
    csv.add_row({format_double(r.beta), format_double(r.q),
                 format_double(r.delta_Q), format_double(r.beta_deltaQ),
                 format_double(r.chi_bar_ref), format_double(r.rel_err)});
    results.push_back(json{{"beta", r.beta},
                           {"q", r.q},
                           {"delta_Q", r.delta_Q},
                           {"beta_deltaQ", r.beta_deltaQ},
                           {"chi_bar_ref", r.chi_bar_ref},
                           {"rel_err", r.rel_err}});
  }

  if (cfg.format == "json") {
    json rep = report_shell(cfg);
    rep["results"] = results;
    emit(cfg.output, rep.dump(2) + "\n");
  } else {
    emit(cfg.output, csv.str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// config-file handling: JSON alternative to flags, flags take precedence
// ---------------------------------------------------------------------------

std::vector<std::string> tokens_from_config(const json& cfg) {
  std::vector<std::string> toks;
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    const std::string& key = it.key();
    if (key == "command" || key == "parameters") continue;
    if (key != "seed" && key != "output" && key != "format") {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    toks.push_back("--" + key);
    if (it->is_string()) toks.push_back(it->get<std::string>());
    else toks.push_back(it->dump());
  }
  if (cfg.contains("parameters")) {
    const json& p = cfg.at("parameters");
    if (!p.is_object()) throw std::invalid_argument("config: parameters must be an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      const std::string flag = "--" + it.key();
      if (it->is_boolean()) {
        if (it->get<bool>()) toks.push_back(flag);
        continue;
      }
      toks.push_back(flag);
      if (it->is_string()) toks.push_back(it->get<std::string>());
      else toks.push_back(it->dump());
    }
  }
  return toks;
}

}  // namespace

int main(int argc, char** argv) {
  // pre-scan for --config and splice its tokens in before the CLI flags
  std::vector<std::string> args;
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config") {
      if (i + 1 >= argc) {
        std::cerr << "--config needs a path\n";
        return kExitConfig;
      }
      config_path = argv[++i];
    } else {
      args.push_back(std::move(a));
    }
  }

  std::string command;
  std::vector<std::string> spliced;
  try {
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("cannot read config: " + config_path);
      const json cfg = json::parse(f);
      if (cfg.contains("command")) command = cfg.at("command").get<std::string>();
      spliced = tokens_from_config(cfg);
    }
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
      const std::string cli_command = args[0];
      args.erase(args.begin());
      if (!command.empty() && command != cli_command) {
        throw std::invalid_argument("config command '" + command +
                                    "' conflicts with '" + cli_command + "'");
      }
      command = cli_command;
    }
    if (command.empty()) {
      throw std::invalid_argument(
          "usage: cavreg [--config cfg.json] "
          "{meanfield|boundary|experiment|susceptibility|finitetemp} [options]");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"cavity mean-field solver for penalized least squares"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig cfg;
  cfg.command = command;

  MeanfieldOpts mf;
  BoundaryOpts bd;
  ExperimentOpts ex;
  SusceptOpts su;
  FiniteTempOpts ft;

  CLI::App* sub = nullptr;
  if (command == "meanfield") {
    sub = &app;
    cfg.output = "meanfield.csv";
    sub->add_option("--rho", mf.rho);
    sub->add_option("--alpha", mf.alpha);
    sub->add_option("--var0", mf.var0);
    sub->add_option("--penalty", mf.penalty);
    sub->add_option("--lambda", mf.lambda);
    sub->add_option("--epsilon", mf.epsilon);
    sub->add_option("--sigma2", mf.sigma2);
    sub->add_option("--noise-var", mf.noise_var);
    sub->add_flag("--bp-limit", mf.bp_limit);
    sub->add_option("--damping", mf.damping);
    sub->add_option("--tol", mf.tol);
    sub->add_option("--max-iter", mf.max_iter);
    sub->add_option("--route", mf.route);
    sub->add_flag("--serial", mf.serial);
  } else if (command == "boundary") {
    sub = &app;
    cfg.output = "boundary.csv";
    sub->add_option("--rho-grid", bd.rho_grid);
    sub->add_option("--alpha-bracket", bd.bracket);
    sub->add_option("--tol-alpha", bd.tol_alpha);
    sub->add_option("--var0", bd.var0);
    sub->add_flag("--serial", bd.serial);
  } else if (command == "experiment") {
    sub = &app;
    cfg.output = "experiment";
    sub->add_option("--n", ex.n);
    sub->add_option("--k", ex.k);
    sub->add_option("--rho", ex.rho);
    sub->add_option("--alpha", ex.alpha);
    sub->add_option("--instances", ex.instances);
    sub->add_option("--nodes", ex.nodes);
    sub->add_option("--var0", ex.var0);
    sub->add_option("--f-min", ex.f_min);
    sub->add_option("--f-max", ex.f_max);
    sub->add_option("--f-per-side", ex.f_per_side);
    sub->add_option("--fit-window", ex.fit_window);
    sub->add_flag("--mse-sweep", ex.mse_sweep_mode);
    sub->add_flag("--serial", ex.serial);
  } else if (command == "susceptibility") {
    sub = &app;
    cfg.output = "susceptibility.csv";
    sub->add_option("--n", su.n);
    sub->add_option("--m", su.m);
    sub->add_option("--seeds", su.seeds);
    sub->add_option("--penalty", su.penalty);
    sub->add_option("--lambda", su.lambda);
    sub->add_option("--epsilon", su.epsilon);
    sub->add_option("--sigma2", su.sigma2);
    sub->add_option("--rho", su.rho);
    sub->add_option("--var0", su.var0);
    sub->add_flag("--serial", su.serial);
  } else if (command == "finitetemp") {
    sub = &app;
    cfg.output = "finitetemp.csv";
    sub->add_option("--beta-grid", ft.beta_grid);
    sub->add_option("--alpha", ft.alpha);
    sub->add_option("--rho", ft.rho);
    sub->add_option("--var0", ft.var0);
    sub->add_option("--penalty", ft.penalty);
    sub->add_option("--lambda", ft.lambda);
    sub->add_option("--epsilon", ft.epsilon);
    sub->add_option("--sigma2", ft.sigma2);
    sub->add_option("--tol", ft.tol);
    sub->add_flag("--serial", ft.serial);
  } else {
    std::cerr << "unknown command: " << command << "\n";
    return kExitConfig;
  }

  app.add_option("--seed", cfg.seed);
  app.add_option("--output,-o", cfg.output);
  app.add_option("--format", cfg.format)
      ->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::string> all;
  all.insert(all.end(), spliced.begin(), spliced.end());
  all.insert(all.end(), args.begin(), args.end());
  // CLI11 wants reversed argv-style tokens
  std::reverse(all.begin(), all.end());
  try {
    app.parse(all);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (command == "meanfield") return run_meanfield(mf, cfg);
    if (command == "boundary") return run_boundary(bd, cfg);
    if (command == "experiment") return run_experiment(ex, cfg);
    if (command == "susceptibility") return run_susceptibility(su, cfg);
    if (command == "finitetemp") return run_finitetemp(ft, cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}
