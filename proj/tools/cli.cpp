#include "cli.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rwpe/asymptotics.hpp"
#include "rwpe/environment_io.hpp"
#include "rwpe/induced_chain.hpp"
#include "rwpe/reversibility.hpp"
#include "rwpe/simulator.hpp"

namespace rwpe::cli {

namespace {

using Report = nlohmann::ordered_json;

// Below this sup-norm the gradient is treated as the zero vector.
constexpr double kZeroGradient = 1e-12;

Report to_json(const Eigen::VectorXd& v) {
  Report a = Report::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Report to_json(const Eigen::MatrixXd& m) {
  Report a = Report::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Report row = Report::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    a.push_back(std::move(row));
  }
  return a;
}

double angle_degrees(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd u = a.normalized();
  const Eigen::VectorXd v = b.normalized();
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm()) * 180.0 / M_PI;
}

Report echo(const RunConfig& c) {
  Report r;
  r["subcommand"] = c.subcommand;
  r["env"] = c.env_path;
  r["seed"] = c.seed;
  r["replicas"] = c.replicas;
  r["steps"] = c.steps;
  r["k"] = c.k;
  r["max_denominator"] = c.max_denominator;
  r["max_steps"] = c.max_steps;
  r["start"] = c.start;
  r["K"] = c.K;
  r["epsilon"] = c.epsilon;
  r["out"] = c.out_path;
  r["renormalize"] = c.renormalize;
  r["covariance"] = c.covariance;
  r["show_chain"] = c.show_chain;
  r["format"] = c.format == OutputFormat::structured ? "structured" : "human";
  return r;
}

Environment load(const RunConfig& c) {
  if (c.env_path.empty()) throw Error(ErrorCode::io, "--env is required for " + c.subcommand);
  ParseOptions opts;
  opts.renormalize = c.renormalize;
  return load_environment(c.env_path, opts);
}

SimOptions sim_options(const RunConfig& c) { return SimOptions{c.threads}; }

InducedChain irreducible_chain(const Environment& env) {
  auto chain = InducedChain::build(env);
  if (!chain.irreducible) throw Error(ErrorCode::not_irreducible, "induced chain is not irreducible");
  return chain;
}

std::string coord_text(const IntVec& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? "," : "") + std::to_string(x[i]);
  return s + ")";
}

int cmd_validate(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const auto v = validate(env);
  Report defects = Report::array();
  for (const auto& d : v.sum_defects)
    defects.push_back({{"coord", env.dims().coords(d.site)}, {"defect", d.defect}});
  r["validation"] = {{"ok", v.ok()},
                     {"max_sum_defect", v.max_sum_defect},
                     {"sums_within_tolerance", v.sums_within_tolerance},
                     {"finite_support", v.finite_support},
                     {"nearest_neighbour", v.nearest_neighbour},
                     {"strictly_positive", v.strictly_positive},
                     {"sum_defects", defects}};
  return v.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_analyze(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const auto chain = irreducible_chain(env);
  const auto s = analyze(env, chain);
  r["nu"] = to_json(s.nu);
  r["sigma"] = to_json(s.sigma);
  r["period"] = s.period;
  r["pi"] = to_json(chain.pi);
  Report warnings = Report::array();
  if (s.aperiodic_warning)
    warnings.push_back("induced chain has period " + std::to_string(s.period) +
                       "; nu and sigma use the stationary formulas for periodic chains");
  r["warnings"] = warnings;
  if (c.show_chain) r["P"] = to_json(chain.P);
  return kExitOk;
}

int cmd_check_reversible(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const auto check = check_reversible(env);
  r["reversible"] = check.reversible;
  r["max_cycle_defect"] = check.max_cycle_defect;
  if (check.reversible) r["g"] = to_json(average_negative_gradient(env));
  return check.reversible ? kExitOk : kExitCheckFailed;
}

int cmd_potential(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const auto field = potential(env);
  r["reversible"] = field.reversible;
  r["max_cycle_defect"] = field.max_cycle_defect;
  r["g"] = to_json(field.g);
  Report table = Report::array();
  for (std::size_t i = 0; i < field.cell.size(); ++i)
    table.push_back({{"coord", field.cell.coords(i)}, {"u", field.u[i]}});
  r["u_table"] = table;
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, Report& r) {
  const auto env = load(c);
  TrajectoryStats stats;
  Report exact;
  const auto chain = InducedChain::build(env);
  if (c.covariance) {
    if (!chain.irreducible) throw Error(ErrorCode::not_irreducible, "covariance needs an irreducible chain");
    const auto s = analyze(env, chain);
    stats = estimate_covariance(env, c.steps, c.replicas, c.seed, s.nu, sim_options(c));
    exact = {{"nu", to_json(s.nu)}, {"sigma", to_json(s.sigma)}};
  } else {
    stats = estimate_drift(env, c.steps, c.replicas, c.seed, sim_options(c));
    if (chain.irreducible) exact = {{"nu", to_json(drift(env, chain))}};
  }
  r["generator"] = stats.generator;
  r["seed"] = stats.seed;
  r["n_steps"] = stats.n_steps;
  r["replicas"] = stats.replicas;
  r["estimates"] = {{"nu_hat", to_json(stats.nu_hat)}};
  r["stderrs"] = {{"nu_hat", to_json(stats.nu_stderr)}};
  if (stats.sigma_hat.size() > 0) r["estimates"]["sigma_hat"] = to_json(stats.sigma_hat);
  r["censored_count"] = 0;
  if (!exact.is_null()) r["exact"] = exact;
  return kExitOk;
}

int cmd_hitting(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const auto g = average_negative_gradient(env);
  const auto dir = approximate_appropriate_direction(g, c.max_denominator, env.dims());
  const auto stats = hitting_probability(env, dir.g1, c.k, c.replicas, c.seed, c.max_steps, sim_options(c));
  Report rational = Report::array();
  for (const auto& q : dir.g_rational) rational.push_back(std::to_string(q.num) + "/" + std::to_string(q.den));
  r["generator"] = stats.generator;
  r["seed"] = stats.seed;
  r["g"] = to_json(g);
  r["g_rational"] = rational;
  r["g1"] = dir.g1;
  r["angle_error"] = dir.angle_error;
  r["estimates"] = {{"p_lower_first", stats.estimate}};
  r["stderrs"] = {{"p_lower_first", stats.std_error}};
  r["hits_lower"] = stats.hits_lower;
  r["hits_upper"] = stats.hits_upper;
  r["censored_count"] = stats.censored;
  r["censored_fraction"] = stats.censored_fraction();
  return kExitOk;
}

int cmd_gamble(const RunConfig& c, Report& r) {
  const auto env = load(c);
  const double exact = exit_probability_1d_exact(env, c.k, c.start);
  const auto mc = exit_frequency_1d(env, c.k, c.start, c.replicas, c.seed, c.max_steps, sim_options(c));
  const double z = mc.std_error > 0 ? (mc.estimate - exact) / mc.std_error : 0.0;
  r["generator"] = mc.generator;
  r["seed"] = mc.seed;
  r["exact"] = {{"p_upper_first", exact}};
  r["estimates"] = {{"p_upper_first", mc.estimate}};
  r["stderrs"] = {{"p_upper_first", mc.std_error}};
  r["z_score"] = z;
  r["within_4_stderr"] = std::abs(exact - mc.estimate) <= 4.0 * mc.std_error;
  r["censored_count"] = mc.censored;
  return kExitOk;
}

// Shared by theorem-check and counterexample.
int report_theorem(const Environment& env, Report& r) {
  const auto g = average_negative_gradient(env);
  const auto chain = irreducible_chain(env);
  const auto nu = drift(env, chain);
  const double inner = g.dot(nu);
  r["g"] = to_json(g);
  r["nu"] = to_json(nu);
  r["inner_product"] = inner;
  if (g.lpNorm<Eigen::Infinity>() <= kZeroGradient) {
    r["verdict"] = "gradient zero; theorem vacuous";
    return kExitOk;
  }
  r["angle_degrees"] = nu.norm() > 0 ? Report(angle_degrees(g, nu)) : Report(nullptr);
  r["verdict"] = inner > 0 ? "holds: <g,nu> > 0" : "violated: <g,nu> <= 0";
  return inner > 0 ? kExitOk : kExitCheckFailed;
}

int cmd_theorem_check(const RunConfig& c, Report& r) { return report_theorem(load(c), r); }

int cmd_counterexample(const RunConfig& c, Report& r) {
  if (c.out_path.empty()) throw Error(ErrorCode::io, "--out is required for counterexample");
  const auto env = make_counterexample(c.K, c.epsilon);
  save_environment(env, c.out_path);
  r["written"] = c.out_path;
  report_theorem(env, r);
  return kExitOk;
}

void render_human(const Report& node, const std::string& prefix, std::ostream& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      const std::string path = prefix.empty() ? key : prefix + "." + key;
      const bool scalar_array =
          value.is_array() && std::all_of(value.begin(), value.end(), [](const Report& v) {
            return v.is_primitive() || (v.is_array() && std::all_of(v.begin(), v.end(),
                                                                    [](const Report& w) { return w.is_primitive(); }));
          });
      if (value.is_object() || (value.is_array() && !scalar_array)) {
        render_human(value, path, out);
      } else {
        out << path << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
      }
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) render_human(node[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << node.dump() << '\n';
  }
}

void emit(const Report& report, const RunConfig& c, std::ostream& out) {
  if (c.format == OutputFormat::structured)
    out << report.dump(2) << '\n';
  else
    render_human(report, "", out);
}

const std::map<std::string, std::function<int(const RunConfig&, Report&)>>& commands() {
  static const std::map<std::string, std::function<int(const RunConfig&, Report&)>> table{
      {"validate", cmd_validate},
      {"analyze", cmd_analyze},
      {"check-reversible", cmd_check_reversible},
      {"potential", cmd_potential},
      {"simulate", cmd_simulate},
      {"hitting", cmd_hitting},
      {"gamble", cmd_gamble},
      {"theorem-check", cmd_theorem_check},
      {"counterexample", cmd_counterexample},
  };
  return table;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto it = commands().find(config.subcommand);
  if (it == commands().end()) {
    err << "error [usage]: unknown subcommand \"" << config.subcommand << "\"\n";
    return kExitUsage;
  }
  Report report;
  report["config"] = echo(config);
  try {
    const int status = it->second(config, report);
    emit(report, config, out);
    return status;
  } catch (const Error& e) {
    report["error"] = {{"code", code_name(e.code())}, {"message", e.what()}};
    if (config.format == OutputFormat::structured) out << report.dump(2) << '\n';
    err << "error [" << code_name(e.code()) << "]: " << e.what() << '\n';
    return kExitError;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Periodic-environment random walks: exact asymptotics and Monte Carlo checks", "rwpe"};
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig config;
  std::string format = "human";
  app.add_option("--env", config.env_path, "Environment file (JSON)");
  app.add_option("--seed", config.seed, "Master seed for all random streams");
  app.add_option("--replicas", config.replicas, "Monte Carlo replicas");
  app.add_option("--steps", config.steps, "Steps per trajectory");
  app.add_option("--k", config.k, "Level index k (hitting) or interval half-width K (gamble)");
  app.add_option("--max-denominator", config.max_denominator, "Largest denominator for direction approximation");
  app.add_option("--max-steps", config.max_steps, "Per-replica step cap for first-passage runs");
  app.add_option("--start", config.start, "Starting point for gamble");
  app.add_option("--K", config.K, "Counterexample ratio K > 1");
  app.add_option("--epsilon", config.epsilon, "Counterexample scale epsilon > 0");
  app.add_option("--out", config.out_path, "Output path for counterexample");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "structured"}));
  app.add_option("--threads", config.threads, "Simulator worker threads (0 = all cores)");
  app.add_flag("--renormalize", config.renormalize, "Divide each jump law by its sum");
  app.add_flag("--covariance", config.covariance, "simulate: also estimate the diffusion matrix");
  app.add_flag("--show-chain", config.show_chain, "analyze: print the transition matrix");

  const std::map<std::string, std::string> help{
      {"validate", "Check an environment file and report per-site defects"},
      {"analyze", "Stationary law, drift and diffusion matrix of the walk"},
      {"check-reversible", "Kolmogorov plaquette test"},
      {"potential", "Potential on one period cell and average negative gradient"},
      {"simulate", "Monte Carlo drift (and optionally covariance) estimate"},
      {"hitting", "Frequency of reaching the lower level first along a rational direction"},
      {"gamble", "1-D exit probability: exact formula vs Monte Carlo"},
      {"theorem-check", "Sign of <g, nu> for a reversible nearest-neighbour walk"},
      {"counterexample", "Single-state non-reversible walk with <g, nu> > 0 at a wide angle"},
  };
  for (const auto& [name, _] : commands()) app.add_subcommand(name, help.at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error [usage]: " << e.what() << '\n';
    return kExitUsage;
  }
  config.subcommand = app.get_subcommands().front()->get_name();
  config.format = format == "structured" ? OutputFormat::structured : OutputFormat::human;
  return run(config, out, err);
}

}  // namespace rwpe::cli
