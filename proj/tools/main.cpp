#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rarexact/cmdp.hpp"
#include "rarexact/montecarlo.hpp"
#include "rarexact/oc.hpp"
#include "rarexact/parallel.hpp"
#include "rarexact/serialize.hpp"

using namespace rarexact;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kInfeasible = 3, kNumeric = 4, kIo = 5 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Configuration

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("invalid value for '") + key + "'");
  }
}

struct PolicyConfig {
  std::string kind = "ea";
  double gamma = 2.0;
  std::string table;  // CMDP policy table file
};

PolicyConfig parse_policy(const json& j) {
  PolicyConfig p;
  if (j.is_string()) {
    p.kind = j.get<std::string>();
  } else if (j.is_object()) {
    check_keys(j, {"kind", "gamma", "table"}, "policy");
    p.kind = get_or<std::string>(j, "kind", p.kind);
    p.gamma = get_or<double>(j, "gamma", p.gamma);
    p.table = get_or<std::string>(j, "table", "");
  } else {
    throw ConfigError("policy must be a string or object");
  }
  static const std::set<std::string> kinds{"ea", "dbcd", "tna", "brar", "cmdp"};
  if (!kinds.count(p.kind)) throw ConfigError("unknown policy kind '" + p.kind + "'");
  if (p.kind == "cmdp" && p.table.empty()) throw ConfigError("policy kind cmdp needs a 'table' file");
  return p;
}

struct RunConfig {
  json raw;
  int n = 50;
  int burn_in = 6;
  PolicyConfig policy;
  PolicyConfig baseline;
  std::string test = "asymptotic";
  double alpha = 0.05;
  std::vector<ThetaPoint> theta;
  std::uint64_t seed = 1;
  int sims = 1000;
  int reps = 1000;
  int paths = 5;
  int ea_block = 10;
  std::string burn_in_mode = "permuted_block";
  CmdpSpec cmdp;
};

std::vector<ThetaPoint> parse_theta(const json& j) {
  if (!j.is_object() || j.size() != 1) throw ConfigError("theta must hold exactly one of null, curves, points");
  const auto& [kind, v] = *j.items().begin();
  if (kind == "null") {
    check_keys(v, {"from", "to", "step"}, "theta.null");
    return null_diagonal(get_or<double>(v, "from", 0.0), get_or<double>(v, "to", 1.0), get_or<double>(v, "step", 0.01));
  }
  if (kind == "curves") {
    check_keys(v, {"bases", "step"}, "theta.curves");
    return alternative_curves(get_or<std::vector<double>>(v, "bases", {}), get_or<double>(v, "step", 0.01));
  }
  if (kind == "points") {
    std::vector<ThetaPoint> out;
    for (const auto& p : v) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("theta points are [theta_c, theta_d] pairs");
      out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (out.empty()) throw ConfigError("theta.points is empty");
    return out;
  }
  throw ConfigError("unknown theta kind '" + kind + "'");
}

CmdpSpec parse_cmdp(const json& j, int n, int b, double alpha) {
  CmdpSpec s;
  s.n = n;
  s.burn_in = b;
  s.alpha = alpha;
  s.null_grid = default_null_grid();
  if (j.is_null()) return s;
  check_keys(j,
             {"p", "average_bound", "pointwise_bound", "average_constraint", "null_grid", "rectangles",
              "benefit_floor", "dual"},
             "cmdp");
  s.p = get_or<double>(j, "p", s.p);
  s.average_bound = get_or<double>(j, "average_bound", s.average_bound);
  s.pointwise_bound = get_or<double>(j, "pointwise_bound", s.pointwise_bound);
  s.average_constraint = get_or<bool>(j, "average_constraint", s.average_constraint);
  s.benefit_floor = get_or<double>(j, "benefit_floor", s.benefit_floor);
  if (j.contains("null_grid") && !j.at("null_grid").is_string())
    s.null_grid = get_or<std::vector<double>>(j, "null_grid", {});
  if (j.contains("rectangles")) {
    const auto& r = j.at("rectangles");
    if (r.is_string()) {
      const auto v = r.get<std::string>();
      if (v == "default")
        s.rectangles = default_rectangles();
      else if (v != "none")
        throw ConfigError("rectangles must be \"default\", \"none\" or a list");
    } else {
      for (const auto& q : r) {
        if (!q.is_array() || q.size() != 4) throw ConfigError("rectangles are [lc, uc, ld, ud] lists");
        s.rectangles.push_back(Measure::rectangle(q[0], q[1], q[2], q[3]));
      }
    }
  }
  if (j.contains("dual")) {
    const auto& d = j.at("dual");
    check_keys(d,
               {"method", "max_iterations", "tolerance", "step0", "stop_when_feasible", "multiplier_cap",
                "stabilization", "gap_tolerance"},
               "cmdp.dual");
    const auto m = get_or<std::string>(d, "method", "cutting_plane");
    if (m == "cutting_plane")
      s.dual.method = DualMethod::kCuttingPlane;
    else if (m == "subgradient")
      s.dual.method = DualMethod::kSubgradient;
    else
      throw ConfigError("unknown dual method '" + m + "'");
    s.dual.max_iterations = get_or<int>(d, "max_iterations", s.dual.max_iterations);
    s.dual.tolerance = get_or<double>(d, "tolerance", s.dual.tolerance);
    s.dual.step0 = get_or<double>(d, "step0", s.dual.step0);
    s.dual.stop_when_feasible = get_or<bool>(d, "stop_when_feasible", s.dual.stop_when_feasible);
    s.dual.multiplier_cap = get_or<double>(d, "multiplier_cap", s.dual.multiplier_cap);
    s.dual.stabilization = get_or<double>(d, "stabilization", s.dual.stabilization);
    s.dual.gap_tolerance = get_or<double>(d, "gap_tolerance", s.dual.gap_tolerance);
  }
  return s;
}

RunConfig parse_config(json raw) {
  check_keys(raw,
             {"n", "burn_in", "policy", "baseline", "test", "alpha", "theta", "seed", "sims", "reps", "paths",
              "ea_block", "burn_in_mode", "cmdp"},
             "config");
  RunConfig c;
  c.n = get_or<int>(raw, "n", c.n);
  c.burn_in = get_or<int>(raw, "burn_in", c.burn_in);
  if (raw.contains("policy")) c.policy = parse_policy(raw.at("policy"));
  if (raw.contains("baseline")) c.baseline = parse_policy(raw.at("baseline"));
  c.test = get_or<std::string>(raw, "test", c.test);
  static const std::set<std::string> tests{"asymptotic", "conditional", "unconditional", "gb"};
  if (!tests.count(c.test)) throw ConfigError("unknown test '" + c.test + "'");
  c.alpha = get_or<double>(raw, "alpha", c.alpha);
  c.theta = raw.contains("theta") ? parse_theta(raw.at("theta")) : null_diagonal(0.0, 1.0, 0.01);
  c.seed = get_or<std::uint64_t>(raw, "seed", c.seed);
  c.sims = get_or<int>(raw, "sims", c.sims);
  c.reps = get_or<int>(raw, "reps", c.reps);
  c.paths = get_or<int>(raw, "paths", c.paths);
  c.ea_block = get_or<int>(raw, "ea_block", c.ea_block);
  c.burn_in_mode = get_or<std::string>(raw, "burn_in_mode", c.burn_in_mode);
  if (c.burn_in_mode != "permuted_block" && c.burn_in_mode != "alternating")
    throw ConfigError("burn_in_mode must be permuted_block or alternating");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha outside (0,1)");
  if (c.n < 1 || c.burn_in < 0 || 2 * c.burn_in > c.n) throw ConfigError("infeasible n / burn_in");
  c.cmdp = parse_cmdp(raw.contains("cmdp") ? raw.at("cmdp") : json(), c.n, c.burn_in, c.alpha);
  c.raw = std::move(raw);
  return c;
}

// ---------------------------------------------------------------------------
// Building blocks

Policy make_policy(const PolicyConfig& p, int n, int b) {
  if (p.kind == "ea") return Policy(EqualAllocation{}, n, b);
  if (p.kind == "dbcd") return Policy(DbcdNeyman{p.gamma}, n, b);
  if (p.kind == "tna") return Policy(TemperedDbcdNeyman{p.gamma}, n, b);
  if (p.kind == "brar") return Policy(BayesianRar{}, n, b);
  std::ifstream in(p.table);
  if (!in) throw IoError("cannot open policy table " + p.table);
  std::stringstream ss;
  ss << in.rdbuf();
  auto table = std::make_shared<PolicyTable>(policy_table_from_json(ss.str()));
  if (table->horizon() != n || table->burn_in() != b)
    throw ConfigError("policy table shape differs from configured n / burn_in");
  return Policy(CmdpTable{table}, n, b);
}

PathWeightTable build_design(const PolicyConfig& p, int n, int b) {
  if (p.kind == "ea") {
    if (n % 2 != 0) throw ConfigError("equal allocation needs an even n");
    return equal_allocation_g(n);
  }
  return forward_g(make_policy(p, n, b));
}

PathWeightTable load_design(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open design " + path);
  return read_path_table(in);
}

TestRule build_rule(const std::string& test, const PathWeightTable& g, double alpha) {
  if (test == "asymptotic") return AsymptoticRule{alpha};
  if (test == "conditional") return conditional_rule(g, alpha);
  if (test == "unconditional") return unconditional_rule(g, alpha);
  return gb_rule(g, alpha);
}

TestRule load_rule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rule " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return rule_from_json(ss.str());
}

std::string meta_json(const RunConfig& c, const std::string& command) {
  json m;
  m["tool"] = "rarexact";
  m["version"] = version();
  m["command"] = command;
  m["config"] = c.raw;
  return m.dump();
}

// Output sink: a file when a path is given, else stdout.
class Sink {
 public:
  explicit Sink(const std::string& path, bool binary = false) {
    if (!path.empty()) {
      file_.open(path, binary ? std::ios::binary | std::ios::out : std::ios::out);
      if (!file_) throw IoError("cannot write " + path);
    }
  }
  std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw IoError("write failed");
    } else {
      std::cout.flush();
    }
  }

 private:
  std::ofstream file_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void csv_preamble(std::ostream& os, const RunConfig& c, const std::string& command) {
  os << "# rarexact " << version() << '\n';
  os << "# command " << command << '\n';
  os << "# config " << c.raw.dump() << '\n';
}

void write_text(const std::string& path, const std::string& text) {
  Sink s(path);
  s.os() << text << '\n';
  s.close();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_design(const RunConfig& c, const std::string& out) {
  auto g = build_design(c.policy, c.n, c.burn_in);
  json d = json::parse(g.policy);
  d["version"] = version();
  d["config"] = c.raw;
  g.policy = d.dump();
  Sink s(out, true);
  write_path_table(s.os(), g);
  s.close();
  return kOk;
}

PathWeightTable design_for(const RunConfig& c, const std::string& design) {
  return design.empty() ? build_design(c.policy, c.n, c.burn_in) : load_design(design);
}

int cmd_crit(const RunConfig& c, const std::string& design, const std::string& out) {
  const auto g = design_for(c, design);
  write_text(out, rule_to_json(build_rule(c.test, g, c.alpha), meta_json(c, "crit")));
  return kOk;
}

int cmd_oc(const RunConfig& c, const std::string& design, const std::string& rule_path, const std::string& out) {
  const auto g = design_for(c, design);
  const TestRule rule = rule_path.empty() ? build_rule(c.test, g, c.alpha) : load_rule(rule_path);
  const auto prof = profile(g, rule, c.theta);
  Sink s(out);
  auto& os = s.os();
  csv_preamble(os, c, "oc");
  os << "# design " << g.policy << '\n';
  os << "# test " << prof.test << " alpha " << num(prof.alpha) << '\n';
  os << "theta_c,theta_d,rejection_rate,patient_benefit\n";
  for (std::size_t i = 0; i < prof.theta.size(); ++i)
    os << num(prof.theta[i].theta_c) << ',' << num(prof.theta[i].theta_d) << ',' << num(prof.rejection_rate[i])
       << ',' << num(prof.patient_benefit[i]) << '\n';
  s.close();
  return kOk;
}

int cmd_power_diff(const RunConfig& c, const std::string& out) {
  const auto ga = build_design(c.policy, c.n, c.burn_in);
  const auto gb = build_design(c.baseline, c.n, c.burn_in);
  const auto pa = profile(ga, build_rule(c.test, ga, c.alpha), c.theta);
  const auto pb = profile(gb, build_rule(c.test, gb, c.alpha), c.theta);
  Sink s(out);
  auto& os = s.os();
  csv_preamble(os, c, "power-diff");
  os << "# design " << ga.policy << '\n' << "# baseline " << gb.policy << '\n';
  os << "theta_c,theta_d,rejection_rate,baseline_rejection_rate,difference,patient_benefit,"
        "baseline_patient_benefit\n";
  for (std::size_t i = 0; i < c.theta.size(); ++i)
    os << num(c.theta[i].theta_c) << ',' << num(c.theta[i].theta_d) << ',' << num(pa.rejection_rate[i]) << ','
       << num(pb.rejection_rate[i]) << ',' << num(pa.rejection_rate[i] - pb.rejection_rate[i]) << ','
       << num(pa.patient_benefit[i]) << ',' << num(pb.patient_benefit[i]) << '\n';
  s.close();
  return kOk;
}

int cmd_cmdp_solve(const RunConfig& c, const std::string& out, const std::string& audit_out) {
  const auto sol = solve_cmdp(c.cmdp);
  json meta = json::parse(meta_json(c, "cmdp solve"));
  meta["feasible"] = sol.feasible;
  meta["iteration"] = sol.iteration;
  write_text(out, policy_table_to_json(sol.table, meta.dump()));
  if (!audit_out.empty()) write_text(audit_out, audit_to_json(sol.audit, &sol.dual, meta.dump()));
  if (!sol.feasible) {
    std::cerr << "rarexact: no feasible policy found (max violation " << num(sol.audit.max_violation()) << ")\n";
    return kInfeasible;
  }
  return kOk;
}

SimulationOptions sim_options(const RunConfig& c) {
  SimulationOptions o;
  o.ea_block = c.ea_block;
  o.burn_in = c.burn_in_mode == "alternating" ? BurnInMode::kAlternating : BurnInMode::kPermutedBlock;
  return o;
}

int cmd_randtest(const RunConfig& c, const std::string& out) {
  const Policy p = make_policy(c.policy, c.n, c.burn_in);
  Sink s(out);
  auto& os = s.os();
  csv_preamble(os, c, "mc randtest");
  os << "# generator " << CounterRng::kIdentity << '\n';
  os << "policy,theta_c,theta_d,estimate,half_width,lower,upper,sims,reps,seed\n";
  for (const auto& th : c.theta) {
    const auto e = randomization_rejection_rate(p, th.theta_c, th.theta_d, c.sims, c.reps, c.alpha, c.seed,
                                                sim_options(c));
    os << p.name() << ',' << num(th.theta_c) << ',' << num(th.theta_d) << ',' << num(e.estimate) << ','
       << num(e.half_width) << ',' << num(e.estimate - e.half_width) << ',' << num(e.estimate + e.half_width) << ','
       << e.sims << ',' << e.reps << ',' << e.seed << '\n';
  }
  s.close();
  return kOk;
}

int cmd_paths(const RunConfig& c, const std::string& out) {
  const Policy p = make_policy(c.policy, c.n, c.burn_in);
  SimulationOptions o = sim_options(c);
  o.burn_in = BurnInMode::kAlternating;
  Sink s(out);
  auto& os = s.os();
  csv_preamble(os, c, "paths");
  os << "# generator " << CounterRng::kIdentity << '\n';
  os << "theta_c,theta_d,trial,participant,arm,outcome,proportion_control\n";
  std::uint32_t stream = 0;
  for (const auto& th : c.theta)
    for (int k = 0; k < c.paths; ++k, ++stream) {
      CounterRng rng(c.seed, stream);
      const auto h = simulate_trial(p, th.theta_c, th.theta_d, rng, o);
      const auto prop = h.running_proportion();
      for (std::size_t t = 0; t < h.arms.size(); ++t)
        os << num(th.theta_c) << ',' << num(th.theta_d) << ',' << k << ',' << t + 1 << ','
           << (h.arms[t] == Arm::kControl ? 'C' : 'D') << ',' << int(h.outcomes[t]) << ',' << num(prop[t]) << '\n';
    }
  s.close();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact evaluation and optimization of response-adaptive randomization designs"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  int threads = 0;
  app.add_option("-c,--config", config_path, "JSON run configuration");
  app.add_option("--threads", threads, "Worker threads (default: RAREXACT_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app.set_version_flag("--version", version());

  // Command-line overrides of configuration keys.
  std::optional<int> n, burn_in;
  std::optional<std::string> policy, test;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* sub, bool with_test) {
    sub->add_option("--n", n, "Trial size");
    sub->add_option("--burn-in", burn_in, "Burn-in participants per arm");
    sub->add_option("--policy", policy, "Policy kind: ea, dbcd, tna, brar");
    if (with_test) sub->add_option("--test", test, "asymptotic, conditional, unconditional or gb");
    sub->add_option("--alpha", alpha, "Two-sided significance level");
  };

  std::string out, design, rule, audit;
  auto* design_cmd = app.add_subcommand("design", "Compute path weights and write a weight-table file");
  add_common(design_cmd, false);
  design_cmd->add_option("-o,--out", out, "Output weight-table file")->required();

  auto* crit_cmd = app.add_subcommand("crit", "Compute a test rule and write it as JSON");
  add_common(crit_cmd, true);
  crit_cmd->add_option("--design", design, "Weight-table file (default: computed from config)");
  crit_cmd->add_option("-o,--out", out, "Output rule file (default: stdout)");

  auto* oc_cmd = app.add_subcommand("oc", "Rejection-rate and patient-benefit profile as CSV");
  add_common(oc_cmd, true);
  oc_cmd->add_option("--design", design, "Weight-table file (default: computed from config)");
  oc_cmd->add_option("--rule", rule, "Rule file (default: computed from config)");
  oc_cmd->add_option("-o,--out", out, "Output CSV (default: stdout)");

  auto* diff_cmd = app.add_subcommand("power-diff", "Operating-characteristic difference against a baseline");
  add_common(diff_cmd, true);
  diff_cmd->add_option("-o,--out", out, "Output CSV (default: stdout)");

  auto* cmdp_cmd = app.add_subcommand("cmdp", "Constrained MDP designs");
  cmdp_cmd->require_subcommand(1);
  auto* solve_cmd = cmdp_cmd->add_subcommand("solve", "Solve the Lagrangian dual and write the policy table");
  solve_cmd->add_option("--n", n, "Trial size");
  solve_cmd->add_option("--burn-in", burn_in, "Burn-in participants per arm");
  solve_cmd->add_option("--alpha", alpha, "Two-sided level of the embedded Wald test");
  solve_cmd->add_option("-o,--out", out, "Output policy-table JSON")->required();
  solve_cmd->add_option("--audit", audit, "Output audit JSON");

  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo");
  mc_cmd->require_subcommand(1);
  auto* rand_cmd = mc_cmd->add_subcommand("randtest", "Randomization-based Wald test rejection rates");
  add_common(rand_cmd, false);
  rand_cmd->add_option("--seed", seed, "Master seed");
  rand_cmd->add_option("-o,--out", out, "Output CSV (default: stdout)");

  auto* paths_cmd = app.add_subcommand("paths", "Simulated running-proportion paths");
  add_common(paths_cmd, false);
  paths_cmd->add_option("--seed", seed, "Master seed");
  paths_cmd->add_option("-o,--out", out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (threads > 0) set_default_threads(threads);
    json raw = load_config(config_path);
    if (n) raw["n"] = *n;
    if (burn_in) raw["burn_in"] = *burn_in;
    if (policy) raw["policy"] = *policy;
    if (test) raw["test"] = *test;
    if (alpha) raw["alpha"] = *alpha;
    if (seed) raw["seed"] = *seed;
    const RunConfig c = parse_config(std::move(raw));

    if (*design_cmd) return cmd_design(c, out);
    if (*crit_cmd) return cmd_crit(c, design, out);
    if (*oc_cmd) return cmd_oc(c, design, rule, out);
    if (*diff_cmd) return cmd_power_diff(c, out);
    if (*solve_cmd) return cmd_cmdp_solve(c, out, audit);
    if (*rand_cmd) return cmd_randtest(c, out);
    if (*paths_cmd) return cmd_paths(c, out);
  } catch (const IoError& e) {
    std::cerr << "rarexact: I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::overflow_error& e) {
    std::cerr << "rarexact: numeric guard: " << e.what() << '\n';
    return kNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "rarexact: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const json::exception& e) {
    std::cerr << "rarexact: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "rarexact: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::domain_error& e) {
    std::cerr << "rarexact: config error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
