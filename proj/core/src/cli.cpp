#include "natfx/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "natfx/assumptions.hpp"
#include "natfx/cfexpr.hpp"
#include "natfx/dataset.hpp"
#include "natfx/decomp.hpp"
#include "natfx/errors.hpp"
#include "natfx/estimate.hpp"
#include "natfx/infer.hpp"
#include "natfx/report.hpp"
#include "natfx/scm.hpp"

namespace natfx::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write file '" + path + "'");
  f << text;
}

double parse_real(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw InvalidArgument(what + ": '" + text + "' is not a finite number");
  }
  return v;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::vector<std::pair<std::string, double>> parse_cov(const std::string& text) {
  std::vector<std::pair<std::string, double>> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("--cov expects name=value pairs, got '" + item + "'");
    }
    out.emplace_back(item.substr(0, eq), parse_real(item.substr(eq + 1), "--cov " + item.substr(0, eq)));
  }
  return out;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("NATFX_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || errno == ERANGE || env[0] == '-') {
      throw InvalidArgument(std::string("NATFX_SEED: '") + env + "' is not an unsigned integer");
    }
    return v;
  }
  return 0;
}

// Options shared by several subcommands; unused fields stay at defaults.
struct RunConfig {
  std::string scenario;
  std::string model_path;
  std::string data_path;
  std::string roles_path;
  std::string params_path;
  std::string a = "1";
  std::string aref = "0";
  std::string m1star;
  std::string m2star;
  std::vector<std::string> bind;
  std::string cov;
  bool log_m2 = false;
  std::vector<std::string> log_cols;
  std::string format = "table";
  bool ack = false;
  std::string out_path;
  std::string formula;
  // simulate
  std::size_t n = 0;
  std::string pa;
  double noise_sd = 1.0;
  // bootstrap
  std::string estimator = "plugin";
  std::size_t boot = 1000;
  double level = 0.95;
  double max_fail = 0.01;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
};

Query discrete_query(const RunConfig& c) {
  Query q;
  q.a = c.a;
  q.a_star = c.aref;
  if (!c.m1star.empty()) q.m1_star = c.m1star;
  if (!c.m2star.empty()) q.m2_star = c.m2star;
  if (q.m1_star == std::string("mean") || q.m2_star == std::string("mean")) {
    throw InvalidArgument("'mean' reference levels need a linear model; categorical mediators take a level label");
  }
  for (const auto& b : c.bind) {
    auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0) throw InvalidArgument("--bind expects symbol=level, got '" + b + "'");
    q.named[b.substr(0, eq)] = b.substr(eq + 1);
  }
  return q;
}

std::vector<Transform> transforms_of(const RunConfig& c, const Roles& roles) {
  std::vector<Transform> t;
  if (c.log_m2) {
    if (!roles.m2) throw InvalidArgument("--log-m2 needs an m2 role");
    t.push_back({*roles.m2, Transform::Kind::Log});
  }
  for (const auto& col : c.log_cols) {
    bool dup = std::any_of(t.begin(), t.end(), [&](const Transform& x) { return x.column == col; });
    if (!dup) t.push_back({col, Transform::Kind::Log});
  }
  return t;
}

Roles load_roles(const RunConfig& c) {
  if (c.roles_path.empty()) throw InvalidArgument("--roles is required with --data");
  return Roles::from_json(read_file(c.roles_path));
}

Scenario scenario_for_data(const RunConfig& c, Roles& roles) {
  Scenario s = c.scenario.empty() ? (roles.m2 ? Scenario::chain(2) : Scenario::single())
                                  : Scenario::parse(c.scenario);
  if (s.mediators() > 2) throw InvalidArgument("at most two mediators are supported");
  if (s.kind() == ScenarioKind::SingleMediator) {
    roles.m2.reset();
  } else if (!roles.m2) {
    throw InvalidArgument("scenario " + s.name() + " needs an m2 role");
  }
  return s;
}

void echo_query(Report& r, const RunConfig& c, const std::string& m1, const std::string& m2) {
  r.config.emplace_back("a", c.a);
  r.config.emplace_back("aref", c.aref);
  if (!m1.empty()) r.config.emplace_back("m1star", m1);
  if (!m2.empty()) r.config.emplace_back("m2star", m2);
  for (const auto& b : c.bind) r.config.emplace_back("bind", b);
}

void emit(const Report& r, const RunConfig& c, std::ostream& out) {
  if (c.format == "json") {
    write_output(c.out_path, render_json(r), out);
  } else if (c.format == "table") {
    write_output(c.out_path, render_table(r), out);
  } else {
    throw InvalidArgument("--format must be 'table' or 'json'");
  }
}

// ---------------------------------------------------------------------------

int cmd_check(const RunConfig& c, std::ostream& out) {
  Scenario s = Scenario::parse(c.scenario.empty() ? "seq2" : c.scenario);
  CfExpr e = parse_cf(c.formula, s);
  validate_cf(e, s);
  auto v = check_identifiability(e, s);
  json j;
  j["formula"] = format_cf(e);
  j["scenario"] = s.name();
  j["status"] = v.identifiable() ? "Identifiable" : "Problematic";
  json conflicts = json::array();
  for (const auto& mc : v.conflicts) {
    json specs = json::array();
    for (const auto& sp : mc.specs) specs.push_back(format_spec(sp));
    conflicts.push_back({{"mediator", "M" + std::to_string(mc.mediator)}, {"specs", specs}});
  }
  j["conflicts"] = conflicts;
  out << j.dump(2) << "\n";
  return v.identifiable() ? 0 : 2;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  if (c.model_path.empty()) throw InvalidArgument("--model is required");
  DiscreteScm model = DiscreteScm::from_json(read_file(c.model_path));
  if (!c.scenario.empty() && !(Scenario::parse(c.scenario) == model.scenario())) {
    throw InvalidArgument("--scenario " + c.scenario + " does not match the model (" + model.scenario().name() + ")");
  }
  CfExpr e = parse_cf(c.formula, model.scenario());
  out << fmt12(eval_expectation(model, e, discrete_query(c))) << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& c, std::ostream& out) {
  if (c.model_path.empty()) throw InvalidArgument("--model is required");
  DiscreteScm model = DiscreteScm::from_json(read_file(c.model_path));
  SimulationOptions o;
  o.n = c.n;
  o.seed = resolve_seed(c.seed);
  o.noise_sd = c.noise_sd;
  if (!c.pa.empty()) {
    std::stringstream ss(c.pa);
    std::string item;
    while (std::getline(ss, item, ',')) o.exposure_probs.push_back(parse_real(item, "--pa"));
  }
  if (model.scenario().kind() == ScenarioKind::SingleMediator) o.roles.m2.reset();
  write_output(c.out_path, simulate(model, o).to_csv(), out);
  return 0;
}

int cmd_decompose(const RunConfig& c, std::ostream& out) {
  Report r;
  r.command = "decompose";
  Query q = discrete_query(c);
  DecompositionResult result;
  if (!c.model_path.empty()) {
    DiscreteScm model = DiscreteScm::from_json(read_file(c.model_path));
    if (!c.scenario.empty() && !(Scenario::parse(c.scenario) == model.scenario())) {
      throw InvalidArgument("--scenario " + c.scenario + " does not match the model (" +
                            model.scenario().name() + ")");
    }
    r.scenario = model.scenario().name();
    r.config.emplace_back("model", c.model_path);
    result = decompose(model, q);
  } else if (!c.data_path.empty()) {
    Roles roles = load_roles(c);
    Scenario s = scenario_for_data(c, roles);
    Dataset data = load_dataset(c.data_path, roles, {});
    DiscreteScm model = from_dataset(data, s, roles);
    r.scenario = s.name();
    r.n_used = data.rows();
    r.n_dropped = data.dropped();
    r.config.emplace_back("data", c.data_path);
    r.config.emplace_back("roles", roles.to_json());
    result = s.nests() ? plugin_seq2(model, q) : decompose(model, q);
  } else {
    throw InvalidArgument("decompose needs --model or --data");
  }
  r.config.emplace_back("scenario", r.scenario);
  echo_query(r, c, c.m1star, c.m2star);
  r.result = std::move(result);
  r.ledger = assumption_ledger(Scenario::parse(r.scenario), c.ack);
  emit(r, c, out);
  return 0;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  if (c.data_path.empty()) throw InvalidArgument("--data is required");
  Roles roles = load_roles(c);
  auto t = transforms_of(c, roles);
  Dataset data = load_dataset(c.data_path, roles, t, LoadOptions{true});
  LinearFit fit = fit_linear_system(data, roles, t);
  write_output(c.out_path, linear_fit_json(fit), out);
  return 0;
}

double resolve_star(const std::string& text, const char* flag, std::optional<double> mean) {
  if (text.empty()) throw InvalidArgument(std::string(flag) + " is required");
  if (text == "mean") {
    if (!mean) throw InvalidArgument(std::string(flag) + " mean needs sample means (pass a fit document)");
    return *mean;
  }
  return parse_real(text, flag);
}

int cmd_decompose_linear(const RunConfig& c, std::ostream& out) {
  if (c.params_path.empty()) throw InvalidArgument("--params is required");
  std::string text = read_file(c.params_path);
  LinearParams p = params_from_json(text);
  auto means = fit_means_from_json(text);
  LinearQuery q;
  q.a = parse_real(c.a, "--a");
  q.a_star = parse_real(c.aref, "--aref");
  q.m1_star = resolve_star(c.m1star, "--m1star", means ? std::optional(means->first) : std::nullopt);
  q.m2_star = resolve_star(c.m2star, "--m2star", means ? std::optional(means->second) : std::nullopt);
  CovariateProfile prof = make_profile(p, parse_cov(c.cov));

  Report r;
  r.command = "decompose-linear";
  r.scenario = "seq2";
  r.result = linear_components(p, q, prof);
  r.ledger = assumption_ledger(Scenario::chain(2), c.ack);
  r.config.emplace_back("params", c.params_path);
  echo_query(r, c, fmt12(q.m1_star), fmt12(q.m2_star));
  if (!c.cov.empty()) r.config.emplace_back("cov", c.cov);
  emit(r, c, out);
  return 0;
}

int cmd_bootstrap(const RunConfig& c, std::ostream& out) {
  if (c.data_path.empty()) throw InvalidArgument("--data is required");
  Roles roles = load_roles(c);
  BootstrapConfig cfg;
  cfg.replicates = c.boot;
  cfg.level = c.level;
  cfg.seed = resolve_seed(c.seed);
  cfg.max_fail = c.max_fail;
  cfg.workers = c.workers;
  cfg.validate();

  Report r;
  r.command = "bootstrap-report";
  r.config.emplace_back("estimator", c.estimator);
  r.config.emplace_back("data", c.data_path);
  BootstrapResult boot;

  if (c.estimator == "plugin") {
    Scenario s = scenario_for_data(c, roles);
    Query q = discrete_query(c);
    Dataset data = load_dataset(c.data_path, roles, {});
    // Supports come from the full sample so every replicate sees the same levels.
    ScmLevels levels = from_dataset(data, s, roles).levels();
    Estimator est = [&](const Dataset& d) {
      DiscreteScm m = from_dataset(d, s, roles, levels);
      return s.nests() ? plugin_seq2(m, q) : decompose(m, q);
    };
    boot = bootstrap(data, est, cfg);
    r.scenario = s.name();
    r.n_used = data.rows();
    r.n_dropped = data.dropped();
    r.config.emplace_back("roles", roles.to_json());
    r.config.emplace_back("scenario", s.name());
    echo_query(r, c, c.m1star, c.m2star);
  } else if (c.estimator == "linear") {
    if (!roles.m2) throw InvalidArgument("the linear estimator needs an m2 role");
    if (!c.scenario.empty() && Scenario::parse(c.scenario) != Scenario::chain(2)) {
      throw InvalidArgument("the linear estimator implements the seq2 model only");
    }
    auto t = transforms_of(c, roles);
    Dataset data = load_dataset(c.data_path, roles, t, LoadOptions{true});
    LinearFit full = fit_linear_system(data, roles, t);
    LinearQuery q;
    q.a = parse_real(c.a, "--a");
    q.a_star = parse_real(c.aref, "--aref");
    // Reference levels are resolved once on the full analysis sample.
    q.m1_star = resolve_star(c.m1star, "--m1star", full.m1_mean);
    q.m2_star = resolve_star(c.m2star, "--m2star", full.m2_mean);
    auto cov = parse_cov(c.cov);
    CovariateProfile prof = make_profile(full.params, cov);
    Estimator est = [&](const Dataset& d) {
      LinearFit f = fit_linear_system(d, roles, t);
      return linear_components(f.params, q, prof);
    };
    boot = bootstrap(data, est, cfg);
    r.scenario = "seq2";
    r.n_used = full.n_used;
    r.n_dropped = full.n_dropped;
    r.fits.push_back(coefficient_table("Y", full.y_fit));
    r.fits.push_back(coefficient_table("M2", full.m2_fit));
    r.fits.push_back(coefficient_table("M1", full.m1_fit));
    r.config.emplace_back("roles", roles.to_json());
    std::string ts;
    for (const auto& x : full.transforms) ts += (ts.empty() ? "" : ",") + x;
    r.config.emplace_back("transforms", ts);
    echo_query(r, c, fmt12(q.m1_star), fmt12(q.m2_star));
    if (!c.cov.empty()) r.config.emplace_back("cov", c.cov);
  } else {
    throw InvalidArgument("--estimator must be 'plugin' or 'linear'");
  }

  r.result = std::move(boot.result);
  r.ledger = assumption_ledger(Scenario::parse(r.scenario), c.ack);
  r.bootstrap = BootstrapSummary{boot.replicates, boot.failed, cfg.level, cfg.max_fail, cfg.seed};
  r.config.emplace_back("seed", std::to_string(cfg.seed));
  r.config.emplace_back("boot", std::to_string(cfg.replicates));
  r.config.emplace_back("level", fmt12(cfg.level));
  r.config.emplace_back("max_fail", fmt12(cfg.max_fail));
  emit(r, c, out);
  return 0;
}

}  // namespace

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"natural counterfactual interaction effects", "natfx"};
  app.require_subcommand(1);

  auto query_opts = [&](CLI::App* s) {
    s->add_option("--a", c.a, "exposure level a")->capture_default_str();
    s->add_option("--aref", c.aref, "reference exposure level a*")->capture_default_str();
    s->add_option("--m1star", c.m1star, "fixed level m1* ('mean' for linear models)");
    s->add_option("--m2star", c.m2star, "fixed level m2* ('mean' for linear models)");
  };
  auto seed_opt = [&](CLI::App* s) {
    s->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { c.seed = v; },
                                          "RNG seed (falls back to NATFX_SEED)");
  };

  auto* check = app.add_subcommand("check", "identifiability verdict for one formula");
  check->add_option("--scenario", c.scenario, "single, nonseq2, seq2, ...");
  check->add_option("formula", c.formula)->required();

  auto* eval = app.add_subcommand("eval", "expectation of a formula under a model");
  eval->add_option("--model", c.model_path)->required();
  eval->add_option("--scenario", c.scenario);
  query_opts(eval);
  eval->add_option("--bind", c.bind, "extra symbol=level bindings");
  eval->add_option("formula", c.formula)->required();

  auto* sim = app.add_subcommand("simulate", "draw a CSV sample from a model");
  sim->add_option("--model", c.model_path)->required();
  sim->add_option("--n", c.n)->required();
  seed_opt(sim);
  sim->add_option("--pa", c.pa, "exposure probabilities, comma separated");
  sim->add_option("--noise-sd", c.noise_sd)->capture_default_str();
  sim->add_option("--out", c.out_path);

  auto* dec = app.add_subcommand("decompose", "effect decomposition from a model or categorical data");
  dec->add_option("--scenario", c.scenario);
  dec->add_option("--model", c.model_path);
  dec->add_option("--data", c.data_path);
  dec->add_option("--roles", c.roles_path);
  query_opts(dec);
  dec->add_option("--format", c.format)->capture_default_str();
  dec->add_flag("--ack-assumptions", c.ack);
  dec->add_option("--out", c.out_path);

  auto* fit = app.add_subcommand("fit", "fit the three linear models");
  fit->add_option("--data", c.data_path)->required();
  fit->add_option("--roles", c.roles_path)->required();
  fit->add_flag("--log-m2", c.log_m2);
  fit->add_option("--log", c.log_cols, "log-transform a column (repeatable)");
  fit->add_option("--out", c.out_path);

  auto* dl = app.add_subcommand("decompose-linear", "closed-form components from fitted parameters");
  dl->add_option("--params", c.params_path)->required();
  query_opts(dl);
  dl->add_option("--cov", c.cov, "covariate profile, e.g. sex=1,age=48.3");
  dl->add_option("--format", c.format)->capture_default_str();
  dl->add_flag("--ack-assumptions", c.ack);
  dl->add_option("--out", c.out_path);

  auto* br = app.add_subcommand("bootstrap-report", "estimates with percentile bootstrap intervals");
  br->add_option("--estimator", c.estimator, "plugin or linear")->capture_default_str();
  br->add_option("--data", c.data_path)->required();
  br->add_option("--roles", c.roles_path)->required();
  br->add_option("--scenario", c.scenario);
  query_opts(br);
  br->add_option("--cov", c.cov);
  br->add_flag("--log-m2", c.log_m2);
  br->add_option("--log", c.log_cols);
  br->add_option("--boot", c.boot)->capture_default_str();
  br->add_option("--level", c.level)->capture_default_str();
  seed_opt(br);
  br->add_option("--max-fail", c.max_fail)->capture_default_str();
  br->add_option("--workers", c.workers, "threads, 0 = all cores")->capture_default_str();
  br->add_option("--format", c.format)->capture_default_str();
  br->add_flag("--ack-assumptions", c.ack);
  br->add_option("--out", c.out_path);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "natfx: " << e.what() << "\n";
    return 1;
  }

  try {
    if (check->parsed()) return cmd_check(c, out);
    if (eval->parsed()) return cmd_eval(c, out);
    if (sim->parsed()) return cmd_simulate(c, out);
    if (dec->parsed()) return cmd_decompose(c, out);
    if (fit->parsed()) return cmd_fit(c, out);
    if (dl->parsed()) return cmd_decompose_linear(c, out);
    if (br->parsed()) return cmd_bootstrap(c, out);
  } catch (const NotIdentifiable& e) {
    err << "natfx: " << e.what() << "\n";
    return 2;
  } catch (const EvaluationOfProblematicSpec& e) {
    err << "natfx: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "natfx: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace natfx::cli
