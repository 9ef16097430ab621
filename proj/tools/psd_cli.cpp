// psd_cli: goodness-of-fit tests, discrepancy values and experiment runs
// from the command line.
//
//   psd_cli test samples.csv --method psd-r2          exit 0 keep, 1 reject, 2 error
//   psd_cli compute samples.csv --target mixture
//   psd_cli experiment power-variance --d 5 --repeats 50 --out results/
//   psd_cli bench --n-grid 500 1000 2000 --d 10

#include "psd/experiments.hpp"
#include "psd/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace psd;
using namespace psd::experiments;

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> methods;
  int order = 0;
  long long n = 0;
  int d = 0;
  int repeats = 0;
  std::size_t m = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string out;
  bool no_interactions = false;
  std::string test;
  std::string target;
  int threads = -1;
  std::vector<long long> n_grid;
  std::string samples;
  std::string kind;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("config " + path + ": " + e.what());
  }
}

// Options given on the command line, as a JSON overlay on the config file.
json flag_overlay(const CLI::App& app, const Flags& f) {
  json j = json::object();
  auto given = [&](const char* name) {
    const CLI::Option* opt = app.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--method")) j["methods"] = f.methods;
  if (given("--order")) j["order"] = f.order;
  if (given("--n")) j["n"] = f.n;
  if (given("--d")) j["d"] = f.d;
  if (given("--repeats")) j["repeats"] = f.repeats;
  if (given("--m")) j["m"] = f.m;
  if (given("--alpha")) j["alpha"] = f.alpha;
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--out")) j["out"] = f.out;
  if (given("--test")) j["test"] = f.test;
  if (given("--threads")) j["threads"] = f.threads;
  if (given("--n-grid")) j["n_grid"] = f.n_grid;
  return j;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; command-line flags take precedence");
  sub->add_option("--method", f.methods, "psd-r1..psd-r4, psd, psd-no-interaction, ksd-imq, ksd-gauss");
  sub->add_option("--order", f.order, "polynomial order for psd and psd-no-interaction")->check(CLI::PositiveNumber);
  sub->add_option("--m", f.m, "bootstrap or null draws")->check(CLI::PositiveNumber);
  sub->add_option("--alpha", f.alpha, "significance level");
  sub->add_option("--seed", f.seed, "master seed");
  sub->add_flag("--no-interactions", f.no_interactions, "drop cross terms from the polynomial basis");
  sub->add_option("--test", f.test, "PSD test: rademacher, multinomial or asymptotic");
}

void add_sizes(CLI::App* sub, Flags& f) {
  sub->add_option("--n", f.n, "sample size")->check(CLI::PositiveNumber);
  sub->add_option("--d", f.d, "dimension")->check(CLI::PositiveNumber);
  sub->add_option("--repeats", f.repeats, "number of repeats")->check(CLI::PositiveNumber);
  sub->add_option("--out", f.out, "output directory for CSV records and JSON summary");
  sub->add_option("--threads", f.threads, "worker threads, 0 for all cores");
}

// Rewrites PSD methods to drop interactions, keeping their order.
void strip_interactions(json& cfg) {
  if (!cfg.contains("methods")) cfg["methods"] = {"psd-r2"};
  std::vector<std::string> names;
  for (const auto& name : cfg["methods"].get<std::vector<std::string>>()) {
    const Method m = parse_method(name, cfg.value("order", 2));
    if (m.family == Family::Psd && m.interactions) {
      if (!cfg.contains("order")) cfg["order"] = m.order;
      names.push_back("psd-no-interaction");
    } else {
      names.push_back(name);
    }
  }
  cfg["methods"] = names;
}

json merged(const CLI::App& app, const Flags& f) {
  json cfg = load_config(f.config);
  cfg.merge_patch(flag_overlay(app, f));
  if (f.no_interactions) strip_interactions(cfg);
  return cfg;
}

Method single_method(const json& cfg) {
  std::string name = "psd-r2";
  if (cfg.contains("method")) name = cfg["method"].get<std::string>();
  if (cfg.contains("methods")) {
    const auto names = cfg["methods"].get<std::vector<std::string>>();
    require(names.size() == 1, "exactly one --method is expected here");
    name = names.front();
  }
  Method m = parse_method(name, cfg.value("order", 2));
  if (m.family == Family::Psd && cfg.contains("order")) m.order = cfg["order"].get<int>();
  return m;
}

AnyScoreModel target_for(const json& cfg, const Flags& f, int d) {
  json spec = cfg.value("target", json::object());
  if (spec.is_string()) spec = json{{"kind", spec.get<std::string>()}};
  if (!f.target.empty()) spec = json{{"kind", f.target}};
  AnyScoreModel model = make_target(spec, d);
  if (model.dimension() != d)
    throw Error("samples have " + std::to_string(d) + " columns but the target has dimension " +
                std::to_string(model.dimension()));
  return model;
}

int run_test_command(const CLI::App& app, const Flags& f) {
  const json cfg = merged(app, f);
  const Samples x = read_samples_csv(f.samples);
  const AnyScoreModel model = target_for(cfg, f, static_cast<int>(x.cols()));
  const Method method = single_method(cfg);
  const TestSettings settings{cfg.value("m", std::size_t{500}), cfg.value("alpha", 0.05),
                              parse_psd_test(cfg.value("test", std::string("rademacher")))};
  require(settings.alpha > 0.0 && settings.alpha < 1.0, "alpha must lie in (0, 1)");
  const TestOutcome t = run_test(method, x, model, settings, cfg.value("seed", std::uint64_t{0}));
  std::cout << "method " << method.name << (method.family == Family::Psd ? " r=" + std::to_string(method.order) : "")
            << "\nn " << x.rows() << "\nd " << x.cols() << "\ntest " << to_string(t.method) << "\nstatistic "
            << format_double(t.statistic) << "\nthreshold " << format_double(t.threshold) << "\np_value "
            << format_double(t.p_value) << "\nalpha " << t.alpha << "\ndecision "
            << (t.reject ? "reject" : "fail to reject") << '\n';
  return t.reject ? 1 : 0;
}

int run_compute_command(const CLI::App& app, const Flags& f) {
  const json cfg = merged(app, f);
  const Samples x = read_samples_csv(f.samples);
  const AnyScoreModel model = target_for(cfg, f, static_cast<int>(x.cols()));
  const Method method = single_method(cfg);
  const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
  double u = 0.0, v = 0.0;
  switch (method.family) {
    case Family::Psd: {
      const auto feats = stein_features(x, model, PolynomialBasis(model.dimension(), method.order, method.interactions));
      u = psd_u_statistic(feats).value;
      v = psd_v_statistic(feats).value;
      break;
    }
    case Family::KsdImq:
      u = ksd_u_statistic(x, model, ImqKernel{}).value;
      v = ksd_v_statistic(x, model, ImqKernel{}).value;
      break;
    case Family::KsdGauss: {
      const GaussianKernel k{median_heuristic(x, seed)};
      u = ksd_u_statistic(x, model, k).value;
      v = ksd_v_statistic(x, model, k).value;
      break;
    }
  }
  std::cout << "method " << method.name << "\nn " << x.rows() << "\nd " << x.cols() << "\nu_statistic "
            << format_double(u) << "\nv_statistic " << format_double(v) << '\n';
  return 0;
}

int run_experiment_command(const CLI::App& app, const Flags& f, bool bench) {
  json cfg = merged(app, f);
  std::string kind = bench ? "runtime-bench" : f.kind;
  if (kind.empty()) kind = cfg.value("experiment", std::string());
  require(!kind.empty(), "no experiment kind given");
  ExperimentConfig c = defaults_for(parse_kind(kind));
  cfg["experiment"] = kind;
  apply_json(c, cfg);
  const auto result = run_experiment(c);
  std::cout << result.summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polynomial and kernel Stein discrepancies: goodness-of-fit tests and experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* test = app.add_subcommand("test", "test whether samples fit a target; exit 0 keep, 1 reject, 2 error");
  test->add_option("samples", f.samples, "headerless CSV, one sample per row")->required();
  test->add_option("--target", f.target, "gaussian (standard), rbm or mixture; parameters via --config");
  add_common(test, f);

  auto* compute = app.add_subcommand("compute", "print the squared discrepancy of a samples file");
  compute->add_option("samples", f.samples, "headerless CSV, one sample per row")->required();
  compute->add_option("--target", f.target, "gaussian (standard), rbm or mixture; parameters via --config");
  add_common(compute, f);

  auto* experiment = app.add_subcommand("experiment", "run a study and write CSV records and a JSON summary");
  experiment->add_option("kind", f.kind,
                         "type1, power-variance, power-student-t, power-laplace, rbm-table, sgld-tuning, runtime-bench");
  add_common(experiment, f);
  add_sizes(experiment, f);

  auto* bench = app.add_subcommand("bench", "time discrepancy computation against sample size");
  bench->add_option("--n-grid", f.n_grid, "ascending sample sizes");
  add_common(bench, f);
  add_sizes(bench, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*test) return run_test_command(*test, f);
    if (*compute) return run_compute_command(*compute, f);
    if (*experiment) return run_experiment_command(*experiment, f, false);
    if (*bench) return run_experiment_command(*bench, f, true);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
