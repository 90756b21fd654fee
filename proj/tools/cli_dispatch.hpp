#ifndef LAMPERTI_CLI_DISPATCH_HPP
#define LAMPERTI_CLI_DISPATCH_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lamperti/lamperti.hpp"

namespace lamperti::cli {

using nlohmann::json;

struct Provenance {
  std::string family;
  std::string version = kVersion;
  std::optional<std::uint64_t> seed;
};

inline void to_json(json& j, const Provenance& p) {
  j = json{{"family", p.family}, {"version", p.version}};
  j["seed"] = p.seed ? json(*p.seed) : json(nullptr);
}
inline void from_json(const json& j, Provenance& p) {
  j.at("family").get_to(p.family);
  j.at("version").get_to(p.version);
  p.seed.reset();
  if (j.contains("seed") && !j.at("seed").is_null()) p.seed = j.at("seed").get<std::uint64_t>();
}

struct ExactRecord {
  json query;
  double value = 0.0;
  double truncation_bound = 0.0;
  Provenance provenance;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ExactRecord, query, value, truncation_bound, provenance)

struct EnvRow {
  std::int64_t n = 0;
  double p_n = 0.0;
  double rho_n = 0.0;
  double d = 0.0;
  double criterion_partial_sum = 0.0;
};
inline void to_json(json& j, const EnvRow& r) {
  j = json{{"n", r.n}, {"p_n", r.p_n}, {"rho_n", r.rho_n}, {"D(n)", r.d},
           {"criterion_partial_sum", r.criterion_partial_sum}};
}
inline void from_json(const json& j, EnvRow& r) {
  j.at("n").get_to(r.n);
  j.at("p_n").get_to(r.p_n);
  j.at("rho_n").get_to(r.rho_n);
  j.at("D(n)").get_to(r.d);
  j.at("criterion_partial_sum").get_to(r.criterion_partial_sum);
}

struct EnvTable {
  std::vector<EnvRow> rows;
  Provenance provenance;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EnvTable, rows, provenance)

struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  std::optional<double> sigma;
  bool passed = false;
  std::string provenance;
  std::vector<std::string> depends_on;
};
inline void to_json(json& j, const CheckRecord& c) {
  j = json{{"name", c.name},         {"lhs", c.lhs},           {"rhs", c.rhs},
           {"tolerance", c.tolerance}, {"passed", c.passed},   {"provenance", c.provenance},
           {"depends_on", c.depends_on}};
  j["sigma"] = c.sigma ? json(*c.sigma) : json(nullptr);
}
inline void from_json(const json& j, CheckRecord& c) {
  j.at("name").get_to(c.name);
  j.at("lhs").get_to(c.lhs);
  j.at("rhs").get_to(c.rhs);
  j.at("tolerance").get_to(c.tolerance);
  j.at("passed").get_to(c.passed);
  j.at("provenance").get_to(c.provenance);
  j.at("depends_on").get_to(c.depends_on);
  c.sigma.reset();
  if (!j.at("sigma").is_null()) c.sigma = j.at("sigma").get<double>();
}

struct ReportRecord {
  std::string suite;
  bool overall = true;
  std::vector<CheckRecord> checks;
  Provenance provenance;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReportRecord, suite, overall, checks, provenance)

struct LimitLawRecord {
  std::vector<LimitLawRow> rows;
  Provenance provenance;
};

}  // namespace lamperti::cli

namespace lamperti {
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LimitLawRow, n, kind, replicas, moment1, moment1_se, moment2, moment2_se, ks,
                                   exact_mean)
}

namespace lamperti::cli {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(LimitLawRecord, rows, provenance)

inline constexpr const char* kWorkersEnv = "LAMPERTI_WORKERS";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline unsigned default_workers() {
  const char* v = std::getenv(kWorkersEnv);
  if (v == nullptr || *v == '\0') return 1;
  try {
    const long w = std::stol(v);
    return w >= 1 ? static_cast<unsigned>(w) : 1u;
  } catch (const std::exception&) {
    return 1;
  }
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string csv_header(const Provenance& p) {
  std::string h = "# lamperti version=" + p.version + " family=" + p.family;
  if (p.seed) h += " seed=" + std::to_string(*p.seed) + " rng=" + Xoshiro256::kName;
  return h + "\n";
}

// Writes to path, or to out when path is empty.
inline void emit(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty()) {
    out << body;
    return;
  }
  std::ofstream f(path);
  if (!f) throw UsageError("cannot open output file: " + path);
  f << body;
}

inline FormulaPerturbation parse_perturbation(const std::string& text) {
  FormulaPerturbation p;
  if (text.empty()) return p;
  const auto parts = detail::split(text, ':');
  if (parts.size() != 2) throw std::invalid_argument("perturbation must be TARGET:RELATIVE");
  using T = FormulaPerturbation::Target;
  const std::vector<std::pair<std::string, T>> names{{"exit", T::exit},           {"forward_loop", T::forward_loop},
                                                     {"site_law", T::site_law},   {"upcross_law", T::upcross_law},
                                                     {"weak_prob", T::weak_prob}, {"weak_joint", T::weak_joint}};
  bool found = false;
  for (const auto& [name, t] : names) {
    if (parts[0] == name) {
      p.target = t;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("unknown perturbation target: " + parts[0]);
  p.relative = std::stod(parts[1]);
  return p;
}

struct Options {
  std::string family = "harmonic";
  unsigned workers = 1;
  std::uint64_t seed = 0;
  // env
  std::int64_t max = 10;
  bool as_json = false;
  bool as_csv = false;
  // exact
  std::int64_t x = 0, y = 0, a = 0, b = 0, m = 0, n_joint = 0, n = 0;
  std::string kind = "cw";
  double tol = 1e-14;
  // simulate / limit-law
  std::int64_t replicas = 0;
  double eps = 0.01;
  std::string kinds = "cw";
  std::string n_list;
  std::string out;
  // verify
  std::string suite = "all";
  std::string json_path;
  std::string perturb;
  std::int64_t walker_replicas = 2000;
  std::int64_t branching_replicas = 200000;
};

inline int run_env_show(const Options& o, std::ostream& out) {
  if (o.max < 1) throw UsageError("--max must be >= 1");
  if (o.as_json && o.as_csv) throw UsageError("choose one of --json and --csv");
  const DriftSpec spec = parse_family(o.family);
  const PotentialKernel kernel(Environment(spec), o.max);
  const Environment& env = kernel.environment();
  EnvTable t;
  t.provenance.family = spec.label();
  detail::CompensatedSum crit;
  for (std::int64_t k = 1; k <= o.max; ++k) {
    if (k >= 2) crit += 1.0 / (kernel.d_of(k) * std::log(static_cast<double>(k)));
    t.rows.push_back({k, env.p_at(k), env.rho_at(k), kernel.d_of(k), crit.value()});
  }
  if (o.as_json) {
    out << json(t).dump(2) << "\n";
    return 0;
  }
  std::string body = csv_header(t.provenance) + "n,p_n,rho_n,D(n),criterion_partial_sum\n";
  for (const auto& r : t.rows) {
    body += std::to_string(r.n) + "," + fmt(r.p_n) + "," + fmt(r.rho_n) + "," + fmt(r.d) + "," +
            fmt(r.criterion_partial_sum) + "\n";
  }
  out << body;
  return 0;
}

inline int print_exact(const DriftSpec& spec, json query, double value, double bound, std::ostream& out) {
  ExactRecord r;
  r.query = std::move(query);
  r.value = value;
  r.truncation_bound = bound;
  r.provenance.family = spec.label();
  out << json(r).dump(2) << "\n";
  return 0;
}

inline int run_exact(const std::string& what, const Options& o, std::ostream& out) {
  const DriftSpec spec = parse_family(o.family);
  const std::int64_t top = std::max<std::int64_t>({o.x, o.y, o.n, 1}) + 2;
  const PotentialKernel kernel(Environment(spec), top);
  const Analytics an(kernel);
  if (what == "site") {
    if (o.a > 0) {
      return print_exact(spec, {{"kind", "site"}, {"x", o.x}, {"a", o.a}, {"b", o.b}}, an.site_law(o.x, o.a, o.b), 0.0,
                         out);
    }
    const SeriesValue s = an.site_law_marginal(o.x, o.b, o.tol);
    return print_exact(spec, {{"kind", "site"}, {"x", o.x}, {"b", o.b}}, s.value, s.truncation_bound, out);
  }
  if (what == "weak") {
    if (o.y > 0) return print_exact(spec, {{"kind", "weak"}, {"x", o.x}, {"y", o.y}}, an.weak_joint(o.x, o.y), 0.0, out);
    return print_exact(spec, {{"kind", "weak"}, {"x", o.x}}, an.weak_prob(o.x), 0.0, out);
  }
  if (what == "joint") {
    if (o.a > 0 || o.n_joint > 0) {
      if (o.a <= 0 || o.n_joint <= 0 || o.m <= 0) throw UsageError("joint site law needs --a, --b, --local-y and --m");
      return print_exact(spec,
                         {{"kind", "joint_site"}, {"x", o.x}, {"y", o.y}, {"a", o.a}, {"b", o.b}, {"local_y", o.n_joint},
                          {"m", o.m}},
                         an.joint_site_law(o.x, o.y, o.a, o.b, o.n_joint, o.m), 0.0, out);
    }
    if (o.m > 0) {
      return print_exact(spec, {{"kind", "joint_upcross"}, {"x", o.x}, {"y", o.y}, {"b", o.b}, {"m", o.m}},
                         an.joint_upcross_law(o.x, o.y, o.b, o.m), 0.0, out);
    }
    const SeriesValue s = an.joint_upcross_marginal(o.x, o.y, o.b, o.tol);
    return print_exact(spec, {{"kind", "joint_upcross_marginal"}, {"x", o.x}, {"y", o.y}, {"b", o.b}}, s.value,
                       s.truncation_bound, out);
  }
  // expected
  const SetKind kind = parse_set_kind(o.kind);
  return print_exact(spec, {{"kind", "expected"}, {"n", o.n}, {"set", kind.label()}}, an.expected_count(o.n, kind), 0.0,
                     out);
}

inline int run_simulate_branching(const Options& o, std::ostream& out) {
  if (o.n < 1) throw UsageError("--n must be >= 1");
  if (o.replicas < 1) throw UsageError("--replicas must be >= 1");
  const DriftSpec spec = parse_family(o.family);
  const auto kinds = parse_set_kinds(o.kinds);
  const PotentialKernel kernel(Environment(spec), o.n);
  const Analytics an(kernel);
  const BranchingSampler sampler(an, o.n);
  const auto runs = sampler.run_ensemble(o.n, kinds, o.replicas, o.seed, o.workers);
  Provenance p{spec.label(), kVersion, o.seed};
  std::string body = csv_header(p) + "replica,kind,count,scaled\n";
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      body += std::to_string(r) + "," + kinds[i].label() + "," + std::to_string(runs[r].counts[i]) + "," +
              fmt(runs[r].scaled[i]) + "\n";
    }
  }
  emit(o.out, body, out);
  return 0;
}

inline int run_simulate_walk(const Options& o, std::ostream& out) {
  if (o.n < 1) throw UsageError("--n must be >= 1");
  if (o.replicas < 1) throw UsageError("--replicas must be >= 1");
  const DriftSpec spec = parse_family(o.family);
  const PotentialKernel kernel(Environment(spec), o.n + 1);
  const Walker walker(kernel, o.n, o.eps);
  std::vector<PathStats> stats(static_cast<std::size_t>(o.replicas));
  walker.run_ensemble(o.replicas, o.seed, o.workers,
                      [&](std::int64_t r, PathStats st) { stats[static_cast<std::size_t>(r)] = std::move(st); });
  Provenance p{spec.label(), kVersion, o.seed};
  std::string body = csv_header(p) + "# horizon=" + std::to_string(walker.horizon()) + " eps=" + fmt(o.eps) + "\n" +
                     "replica,x,xi,xi_up,xi_down,first_hit,last_visit,weak_cut\n";
  for (std::size_t r = 0; r < stats.size(); ++r) {
    const PathStats& st = stats[r];
    for (std::int64_t x = 1; x <= o.n; ++x) {
      body += std::to_string(r) + "," + std::to_string(x) + "," + std::to_string(st.xi[x]) + "," +
              std::to_string(st.xi_up[x]) + "," + std::to_string(st.xi_down[x]) + "," +
              std::to_string(st.first_hit[x]) + "," + std::to_string(st.last_visit[x]) + "," +
              (weak_cut_indicator(st, x) ? "1" : "0") + "\n";
    }
  }
  emit(o.out, body, out);
  return 0;
}

inline ReportRecord to_record(const std::string& suite, const VerificationReport& rep, const Provenance& p) {
  ReportRecord r;
  r.suite = suite;
  r.overall = rep.overall;
  r.provenance = p;
  for (const auto& c : rep.checks) {
    r.checks.push_back({c.name, c.lhs, c.rhs, c.tolerance, c.sigma, c.passed, c.provenance, c.depends_on});
  }
  return r;
}

inline int run_verify(const Options& o, std::ostream& out) {
  if (!suite_known(o.suite)) throw UsageError("unknown suite: " + o.suite);
  SuiteConfig cfg;
  cfg.suite = o.suite;
  cfg.family = parse_family(o.family);
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  cfg.perturbation = parse_perturbation(o.perturb);
  cfg.walker_replicas = o.walker_replicas;
  cfg.branching_replicas = o.branching_replicas;
  const VerificationReport rep = cross_check_suite(cfg);
  for (const auto& c : rep.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << "  lhs=" << fmt(c.lhs) << " rhs=" << fmt(c.rhs)
        << " tol=" << fmt(c.tolerance) << "\n";
  }
  out << (rep.overall ? "overall: PASS" : "overall: FAIL") << "\n";
  if (!o.json_path.empty()) {
    emit(o.json_path, json(to_record(o.suite, rep, {cfg.family.label(), kVersion, o.seed})).dump(2) + "\n", out);
  }
  return rep.overall ? 0 : 1;
}

inline int run_limit_law(const Options& o, std::ostream& out) {
  if (o.replicas < 1) throw UsageError("--replicas must be >= 1");
  const DriftSpec spec = parse_family(o.family);
  std::vector<std::int64_t> n_list;
  for (const auto& s : detail::split(o.n_list, ',')) n_list.push_back(detail::parse_int(s));
  if (n_list.empty()) throw UsageError("--n-list is empty");
  for (auto n : n_list) {
    if (n < 2) throw UsageError("--n-list entries must be >= 2");
  }
  const auto kinds = parse_set_kinds(o.kinds);
  const PotentialKernel kernel(Environment(spec), *std::max_element(n_list.begin(), n_list.end()));
  const Analytics an(kernel);
  LimitLawRecord rec;
  rec.rows = limit_law_report(an, n_list, kinds, o.replicas, o.seed, o.workers);
  rec.provenance = {spec.label(), kVersion, o.seed};
  emit(o.out, json(rec).dump(2) + "\n", out);
  return 0;
}

inline int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  o.workers = default_workers();
  CLI::App app{"Local times, upcrossings and weak cutpoints of transient birth-death walks", "lamperti-cli"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  auto add_family = [&](CLI::App* c) {
    c->add_option("--family", o.family, "harmonic | loglog:BETA | table:PATH")->capture_default_str();
  };
  auto add_workers = [&](CLI::App* c) {
    c->add_option("--workers", o.workers, std::string("worker threads (default from ") + kWorkersEnv + ")")
        ->check(CLI::PositiveNumber);
  };

  auto* env = app.add_subcommand("env", "inspect the drift environment")->require_subcommand(1);
  auto* env_show = env->add_subcommand("show", "tabulate p_n, rho_n, D(n) and the criterion partial sum");
  add_family(env_show);
  env_show->add_option("--max", o.max, "largest n")->required();
  env_show->add_flag("--json", o.as_json, "emit JSON");
  env_show->add_flag("--csv", o.as_csv, "emit CSV (default)");

  auto* exact = app.add_subcommand("exact", "closed-form probabilities")->require_subcommand(1);
  auto* ex_site = exact->add_subcommand("site", "P(xi(x)=a, xi(x,up)=b); without --a, sum over a");
  auto* ex_weak = exact->add_subcommand("weak", "P(x in C_w), or P(x, y in C_w) with --y");
  auto* ex_joint = exact->add_subcommand("joint", "joint laws at x < y");
  auto* ex_exp = exact->add_subcommand("expected", "E|C cap [1,n]|");
  for (auto* c : {ex_site, ex_weak, ex_joint, ex_exp}) add_family(c);
  ex_site->add_option("--x", o.x)->required();
  ex_site->add_option("--a", o.a);
  ex_site->add_option("--b", o.b)->required();
  ex_site->add_option("--tol", o.tol, "truncation tolerance for the sum over a");
  ex_weak->add_option("--x", o.x)->required();
  ex_weak->add_option("--y", o.y);
  ex_joint->add_option("--x", o.x)->required();
  ex_joint->add_option("--y", o.y)->required();
  ex_joint->add_option("--b", o.b, "xi(x,up)")->required();
  ex_joint->add_option("--m", o.m, "xi(y,up); omitted: sum over m");
  ex_joint->add_option("--a", o.a, "xi(x)");
  ex_joint->add_option("--local-y", o.n_joint, "xi(y)");
  ex_joint->add_option("--tol", o.tol, "truncation tolerance for the sum over m");
  ex_exp->add_option("--n", o.n)->required();
  ex_exp->add_option("--kind", o.kind, "cw | cab:A:B | cstar:A | cAa:A1+A2:a | caB:a:B1+B2")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo samplers")->require_subcommand(1);
  auto* sim_br = sim->add_subcommand("branching", "branching-process sampler of the upcrossing counts");
  auto* sim_walk = sim->add_subcommand("walk", "direct walk simulation, truncated at a horizon");
  for (auto* c : {sim_br, sim_walk}) {
    add_family(c);
    add_workers(c);
    c->add_option("--n", o.n)->required();
    c->add_option("--replicas", o.replicas)->required();
    c->add_option("--seed", o.seed)->required();
    c->add_option("--out", o.out, "CSV path (default stdout)");
  }
  sim_br->add_option("--kinds", o.kinds)->capture_default_str();
  sim_walk->add_option("--eps", o.eps, "return probability allowed past the horizon")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "run the cross-check suites");
  verify->add_option("suite", o.suite, "all | exit | pgf | walker | branching | samplers | combinatorics")
      ->required();
  add_family(verify);
  add_workers(verify);
  o.seed = SuiteConfig{}.seed;
  verify->add_option("--seed", o.seed)->capture_default_str();
  verify->add_option("--json", o.json_path, "write the report as JSON");
  verify->add_option("--walker-replicas", o.walker_replicas)->capture_default_str();
  verify->add_option("--branching-replicas", o.branching_replicas)->capture_default_str();
  verify->add_option("--perturb", o.perturb, "TARGET:RELATIVE, scale one formula (self-test)");

  auto* limit = app.add_subcommand("limit-law", "scaled cardinalities against Exp(1)");
  add_family(limit);
  add_workers(limit);
  limit->add_option("--n-list", o.n_list)->required();
  limit->add_option("--kinds", o.kinds)->capture_default_str();
  limit->add_option("--replicas", o.replicas)->required();
  limit->add_option("--seed", o.seed)->required();
  limit->add_option("--out", o.out, "JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (env_show->parsed()) return run_env_show(o, out);
    if (ex_site->parsed()) return run_exact("site", o, out);
    if (ex_weak->parsed()) return run_exact("weak", o, out);
    if (ex_joint->parsed()) return run_exact("joint", o, out);
    if (ex_exp->parsed()) return run_exact("expected", o, out);
    if (sim_br->parsed()) return run_simulate_branching(o, out);
    if (sim_walk->parsed()) return run_simulate_walk(o, out);
    if (verify->parsed()) return run_verify(o, out);
    if (limit->parsed()) return run_limit_law(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const DivergentError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  err << app.help();
  return 2;
}

}  // namespace lamperti::cli

#endif  // LAMPERTI_CLI_DISPATCH_HPP
