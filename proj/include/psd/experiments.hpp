#pragma once

// Experiment runner: goodness-of-fit power studies, the RBM perturbation
// table, SGLD step-size selection and runtime scaling. Every repeat draws
// from streams derived from (master seed, repeat), so outputs are
// reproducible regardless of thread scheduling.

#include "psd/gof_tests.hpp"
#include "psd/ksd.hpp"
#include "psd/mcmc.hpp"
#include "psd/stein.hpp"
#include "psd/targets.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace psd::experiments {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Methods

enum class Family { Psd, KsdImq, KsdGauss };

struct Method {
  std::string name;
  Family family = Family::Psd;
  int order = 2;
  bool interactions = true;
};

/// psd-r<k>, psd (uses `default_order`), psd-no-interaction, ksd-imq, ksd-gauss.
inline Method parse_method(const std::string& name, int default_order = 2) {
  if (name == "ksd-imq") return {name, Family::KsdImq, 0, true};
  if (name == "ksd-gauss") return {name, Family::KsdGauss, 0, true};
  if (name == "psd") return {name, Family::Psd, default_order, true};
  if (name == "psd-no-interaction") return {name, Family::Psd, default_order, false};
  if (name.rfind("psd-r", 0) == 0 && name.size() > 5) {
    const std::string digits = name.substr(5);
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) && digits.size() < 3) {
      const int r = std::stoi(digits);
      if (r >= 1) return {name, Family::Psd, r, true};
    }
  }
  throw Error("unknown method '" + name + "'");
}

enum class PsdTest { Rademacher, Multinomial, Asymptotic };

inline PsdTest parse_psd_test(const std::string& s) {
  if (s == "rademacher") return PsdTest::Rademacher;
  if (s == "multinomial") return PsdTest::Multinomial;
  if (s == "asymptotic") return PsdTest::Asymptotic;
  throw Error("unknown test '" + s + "' (expected rademacher, multinomial or asymptotic)");
}

struct TestSettings {
  std::size_t m = 500;
  double alpha = 0.05;
  PsdTest psd_test = PsdTest::Rademacher;
};

/// Runs the goodness-of-fit test of `method` on `samples` against `model`.
template <ScoreModel M>
TestOutcome run_test(const Method& method, const Samples& samples, const M& model, const TestSettings& settings,
                     std::uint64_t seed) {
  switch (method.family) {
    case Family::Psd: {
      const auto f = stein_features(samples, model, PolynomialBasis(model.dimension(), method.order, method.interactions));
      switch (settings.psd_test) {
        case PsdTest::Rademacher: return rademacher_bootstrap_test(f, settings.m, settings.alpha, seed);
        case PsdTest::Multinomial: return multinomial_bootstrap_test(f, settings.m, settings.alpha, seed);
        case PsdTest::Asymptotic: return asymptotic_test(f, settings.m, settings.alpha, seed);
      }
      break;
    }
    case Family::KsdImq: return ksd_bootstrap_test(samples, model, ImqKernel{1.0, -0.5}, settings.m, settings.alpha, seed);
    case Family::KsdGauss:
      return ksd_bootstrap_test(samples, model, GaussianKernel{median_heuristic(samples, seed)}, settings.m,
                                settings.alpha, seed);
  }
  throw Error("run_test: unhandled method");
}

/// Squared discrepancy (unbiased U-statistic form) of `method`.
template <ScoreModel M>
double discrepancy(const Method& method, const Samples& samples, const M& model, std::uint64_t seed = 0) {
  switch (method.family) {
    case Family::Psd:
      return psd_u_statistic(stein_features(samples, model, PolynomialBasis(model.dimension(), method.order, method.interactions)))
          .value;
    case Family::KsdImq: return ksd_u_statistic(samples, model, ImqKernel{1.0, -0.5}).value;
    case Family::KsdGauss:
      return ksd_u_statistic(samples, model, GaussianKernel{median_heuristic(samples, seed)}).value;
  }
  throw Error("discrepancy: unhandled method");
}

// ---------------------------------------------------------------------------
// Built-in targets by name

/// Builds a target from a JSON spec such as {"kind": "gaussian", "mean": [...],
/// "cov": [[...]]}, {"kind": "rbm", "hidden": 15, "seed": 2021} or
/// {"kind": "mixture"}. `d` fills in unspecified dimensions.
inline AnyScoreModel make_target(const json& spec, int d) {
  const std::string kind = spec.value("kind", std::string("gaussian"));
  if (kind == "gaussian" || kind == "standard-gaussian") {
    Vector mean = Vector::Zero(d);
    Matrix cov = Matrix::Identity(d, d);
    if (spec.contains("mean")) {
      const auto m = spec.at("mean").get<std::vector<double>>();
      mean = Eigen::Map<const Vector>(m.data(), static_cast<Eigen::Index>(m.size()));
    }
    if (spec.contains("cov")) {
      const auto rows = spec.at("cov").get<std::vector<std::vector<double>>>();
      cov.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == rows.size(), "target: covariance must be square");
        for (std::size_t j = 0; j < rows.size(); ++j) cov(i, j) = rows[i][j];
      }
    }
    require(mean.size() == cov.rows(), "target: mean and covariance dimensions differ");
    return AnyScoreModel(GaussianTarget(mean, cov));
  }
  if (kind == "rbm") {
    const int visible = spec.value("visible", d);
    GbRbmTarget p = GbRbmTarget::random(visible, spec.value("hidden", 15), spec.value("seed", std::uint64_t{2021}));
    const double sigma = spec.value("perturbation", 0.0);
    if (sigma > 0.0) p = perturb_rbm(p, sigma, spec.value("perturbation_seed", std::uint64_t{0}));
    return AnyScoreModel(std::move(p));
  }
  if (kind == "mixture") return AnyScoreModel(MixturePosteriorTarget::standard());
  throw Error("unknown target kind '" + kind + "' (expected gaussian, rbm or mixture)");
}

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind { Type1, PowerVariance, PowerStudentT, PowerLaplace, RbmTable, SgldTuning, RuntimeBench };

inline ExperimentKind parse_kind(const std::string& s) {
  static const std::map<std::string, ExperimentKind> kinds{
      {"type1", ExperimentKind::Type1},           {"power-variance", ExperimentKind::PowerVariance},
      {"power-student-t", ExperimentKind::PowerStudentT}, {"power-laplace", ExperimentKind::PowerLaplace},
      {"rbm-table", ExperimentKind::RbmTable},    {"sgld-tuning", ExperimentKind::SgldTuning},
      {"runtime-bench", ExperimentKind::RuntimeBench}};
  const auto it = kinds.find(s);
  if (it == kinds.end()) throw Error("unknown experiment kind '" + s + "'");
  return it->second;
}

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Type1: return "type1";
    case ExperimentKind::PowerVariance: return "power-variance";
    case ExperimentKind::PowerStudentT: return "power-student-t";
    case ExperimentKind::PowerLaplace: return "power-laplace";
    case ExperimentKind::RbmTable: return "rbm-table";
    case ExperimentKind::SgldTuning: return "sgld-tuning";
    case ExperimentKind::RuntimeBench: return "runtime-bench";
  }
  return "?";
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Type1;
  std::vector<std::string> methods{"psd-r2"};
  Eigen::Index n = 1000;
  int d = 5;
  int repeats = 500;
  std::size_t m = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: keep results in memory only
  int order = 2;        // for "psd" and "psd-no-interaction"
  std::string test = "rademacher";
  int threads = 1;      // 0: hardware concurrency

  double variance = 1.7;  // power-variance: Sigma_11
  double dof = 5.0;       // power-student-t

  std::vector<double> perturbations{0.0, 0.02, 0.04, 0.06};
  int rbm_hidden = 15;
  std::uint64_t rbm_seed = 2021;
  Eigen::Index rbm_sweeps = 200;

  std::vector<double> steps{0.0005, 0.005, 0.05};
  int chains = 5;
  std::size_t batch_size = 10;
  Eigen::Index ksd_thin = 2000;

  std::vector<Eigen::Index> n_grid{500, 1000, 2000, 4000, 8000};
  double min_time = 0.02;  // seconds accumulated per timing measurement
};

/// Default sizes and repeat counts per experiment.
inline ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::Type1: c.repeats = 500; break;
    case ExperimentKind::PowerVariance: c.repeats = 200; break;
    case ExperimentKind::PowerStudentT:
      c.repeats = 250;
      c.n = 2000;
      break;
    case ExperimentKind::PowerLaplace: c.repeats = 500; break;
    case ExperimentKind::RbmTable:
      c.repeats = 100;
      c.d = 20;
      break;
    case ExperimentKind::SgldTuning:
      c.repeats = 5;
      c.n = 10000;
      c.d = 2;
      c.methods = {"psd-r2", "ksd-imq"};
      break;
    case ExperimentKind::RuntimeBench:
      c.repeats = 3;
      c.d = 10;
      c.methods = {"psd-r2", "ksd-imq"};
      break;
  }
  return c;
}

/// Overlays fields present in `j` onto `c`.
inline void apply_json(ExperimentConfig& c, const json& j) {
  if (j.contains("experiment")) c.kind = parse_kind(j.at("experiment").get<std::string>());
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("methods", c.methods);
  get("n", c.n);
  get("d", c.d);
  get("repeats", c.repeats);
  get("m", c.m);
  get("alpha", c.alpha);
  get("seed", c.seed);
  get("out", c.out_dir);
  get("order", c.order);
  get("test", c.test);
  get("threads", c.threads);
  get("variance", c.variance);
  get("dof", c.dof);
  get("perturbations", c.perturbations);
  get("rbm_hidden", c.rbm_hidden);
  get("rbm_seed", c.rbm_seed);
  get("rbm_sweeps", c.rbm_sweeps);
  get("steps", c.steps);
  get("chains", c.chains);
  get("batch_size", c.batch_size);
  get("ksd_thin", c.ksd_thin);
  get("n_grid", c.n_grid);
  get("min_time", c.min_time);
}

inline void validate(const ExperimentConfig& c) {
  require(c.repeats >= 1, "config: repeats must be >= 1");
  require(c.alpha > 0.0 && c.alpha < 1.0, "config: alpha must lie in (0, 1)");
  require(c.n >= 2, "config: n must be >= 2");
  require(c.d >= 1, "config: d must be >= 1");
  require(c.m >= 1, "config: m must be >= 1");
  require(!c.methods.empty(), "config: at least one method is required");
  for (const auto& name : c.methods) (void)parse_method(name, c.order);
  (void)parse_psd_test(c.test);
  require(c.order >= 1, "config: order must be >= 1");
  if (c.kind == ExperimentKind::SgldTuning) {
    require(c.d == 2, "config: sgld-tuning works on the two-dimensional mixture posterior");
    require(!c.steps.empty() && c.chains >= 1, "config: sgld-tuning needs steps and chains");
  }
  if (c.kind == ExperimentKind::RuntimeBench) {
    require(!c.n_grid.empty(), "config: runtime-bench needs an n grid");
    require(std::is_sorted(c.n_grid.begin(), c.n_grid.end()), "config: n grid must be ascending");
  }
  if (c.kind == ExperimentKind::RbmTable) require(!c.perturbations.empty(), "config: rbm-table needs perturbations");
}

// ---------------------------------------------------------------------------
// Records

struct ResultRecord {
  std::string experiment;
  std::string method;
  int d = 0;
  Eigen::Index n = 0;
  int r = 0;  // polynomial order, 0 for KSD
  int repeat = 0;
  double param = 0.0;  // perturbation, step size, or 0
  int chain = 0;
  double statistic = 0.0;
  bool reject = false;
  double wall_time = 0.0;  // seconds
  std::uint64_t seed = 0;
};

inline const char* kCsvHeader = "experiment,method,d,n,r,repeat,param,chain,statistic,reject,wall_time_s,seed";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv_row(const ResultRecord& r) {
  std::ostringstream os;
  os << r.experiment << ',' << r.method << ',' << r.d << ',' << r.n << ',' << r.r << ',' << r.repeat << ','
     << format_double(r.param) << ',' << r.chain << ',' << format_double(r.statistic) << ',' << (r.reject ? 1 : 0)
     << ',' << format_double(r.wall_time) << ',' << r.seed;
  return os.str();
}

struct ExperimentResult {
  std::vector<ResultRecord> records;
  json summary;
};

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Items are
/// independent; the first exception stops dispatch and is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(count, threads > 0 ? static_cast<unsigned>(threads) : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline double median(std::vector<double> v) {
  require(!v.empty(), "median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
  return m;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = x.size();
  require(k >= 2 && y.size() == k, "loglog_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

// Rejection rate and binomial standard error per (method, param).
inline json rejection_summary(const std::vector<ResultRecord>& records) {
  std::map<std::pair<std::string, double>, std::pair<int, int>> counts;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.method, r.param);
    if (!counts.contains(key)) order.push_back(key);
    auto& [rejects, total] = counts[key];
    rejects += r.reject;
    ++total;
  }
  json rows = json::array();
  for (const auto& key : order) {
    const auto [rejects, total] = counts[key];
    const double rate = static_cast<double>(rejects) / total;
    rows.push_back({{"method", key.first},
                    {"param", key.second},
                    {"repeats", total},
                    {"rejection_rate", rate},
                    {"standard_error", std::sqrt(rate * (1.0 - rate) / total)}});
  }
  return rows;
}

inline Samples thin_to(const Samples& x, Eigen::Index target) {
  if (x.rows() <= target) return x;
  const Eigen::Index stride = x.rows() / target;
  Samples out(target, x.cols());
  for (Eigen::Index i = 0; i < target; ++i) out.row(i) = x.row(i * stride);
  return out;
}

inline void write_outputs(const ExperimentConfig& c, const ExperimentResult& result) {
  if (c.out_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);
  const std::string stem = to_string(c.kind);
  std::ofstream csv(fs::path(c.out_dir) / (stem + ".csv"));
  csv << kCsvHeader << '\n';
  for (const auto& r : result.records) csv << to_csv_row(r) << '\n';
  std::ofstream js(fs::path(c.out_dir) / (stem + ".json"));
  js << result.summary.dump(2) << '\n';
  if (!csv || !js) throw Error("failed to write results to " + c.out_dir);
}

// One goodness-of-fit work item: draws samples and runs each method.
template <ScoreModel M, class Draw>
std::vector<ResultRecord> gof_item(const ExperimentConfig& c, const std::vector<Method>& methods, const M& model,
                                   const Draw& draw, int repeat, double param, std::uint64_t item_seed) {
  const TestSettings settings{c.m, c.alpha, parse_psd_test(c.test)};
  const Samples x = draw(derive_seed(item_seed, 0));
  std::vector<ResultRecord> out;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    const auto& method = methods[k];
    const std::uint64_t test_seed = derive_seed(item_seed, 1 + k);
    const auto start = Clock::now();
    const TestOutcome t = run_test(method, x, model, settings, test_seed);
    const double elapsed = seconds_since(start);
    out.push_back({to_string(c.kind), method.name, model.dimension(), x.rows(),
                   method.family == Family::Psd ? method.order : 0, repeat, param, 0, t.statistic, t.reject,
                   std::max(elapsed, 1e-9), test_seed});
  }
  return out;
}

}  // namespace detail

/// Runs one configured experiment. Records come back ordered by work item
/// (repeat, then parameter) regardless of completion order. On failure any
/// completed records are still written together with a failure marker.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  validate(c);
  std::vector<Method> methods;
  for (const auto& name : c.methods) methods.push_back(parse_method(name, c.order));

  std::size_t items = static_cast<std::size_t>(c.repeats);
  if (c.kind == ExperimentKind::RbmTable) items *= c.perturbations.size();
  if (c.kind == ExperimentKind::RuntimeBench) items = c.n_grid.size() * static_cast<std::size_t>(c.repeats);
  std::vector<std::vector<ResultRecord>> per_item(items);

  const std::string kind = to_string(c.kind);
  const int d = c.d;
  std::optional<GbRbmTarget> rbm;
  if (c.kind == ExperimentKind::RbmTable) rbm = GbRbmTarget::random(d, c.rbm_hidden, c.rbm_seed);
  const auto mixture = MixturePosteriorTarget::standard();

  auto run_item = [&](std::size_t item) {
    switch (c.kind) {
      case ExperimentKind::Type1:
      case ExperimentKind::PowerVariance:
      case ExperimentKind::PowerStudentT:
      case ExperimentKind::PowerLaplace: {
        const int rep = static_cast<int>(item);
        const auto p = GaussianTarget::standard(d);
        QFamily q = GaussianFamily{Vector::Zero(d), Matrix::Identity(d, d)};
        if (c.kind == ExperimentKind::PowerVariance) q = variance_perturbed_gaussian(d, c.variance);
        if (c.kind == ExperimentKind::PowerStudentT) q = StudentTFamily{c.dof};
        if (c.kind == ExperimentKind::PowerLaplace) q = LaplaceProductFamily{};
        const auto draw = [&](std::uint64_t s) { return sample_q_family(q, c.n, d, s); };
        per_item[item] = detail::gof_item(c, methods, p, draw, rep, 0.0, derive_seed(c.seed, item));
        break;
      }
      case ExperimentKind::RbmTable: {
        const int rep = static_cast<int>(item / c.perturbations.size());
        const double sigma = c.perturbations[item % c.perturbations.size()];
        const std::uint64_t item_seed = derive_seed(c.seed, item);
        const GbRbmTarget q = perturb_rbm(*rbm, sigma, derive_seed(item_seed, 100));
        const auto draw = [&](std::uint64_t s) { return rbm_gibbs_sample_chains(q, c.n, c.rbm_sweeps, s); };
        per_item[item] = detail::gof_item(c, methods, *rbm, draw, rep, sigma, item_seed);
        break;
      }
      case ExperimentKind::SgldTuning: {
        const int rep = static_cast<int>(item);
        const std::uint64_t rep_seed = derive_seed(c.seed, item);
        std::vector<ResultRecord> out;
        for (int chain = 0; chain < c.chains; ++chain) {
          // every step size starts from the same prior draw
          Engine init_rng = make_engine(rep_seed, 1000 + static_cast<std::uint64_t>(chain));
          std::normal_distribution<double> normal;
          Vector init(2);
          init << std::sqrt(mixture.params().prior_var1) * normal(init_rng),
              std::sqrt(mixture.params().prior_var2) * normal(init_rng);
          for (std::size_t si = 0; si < c.steps.size(); ++si) {
            SgldConfig sc;
            sc.step = c.steps[si];
            sc.batch_size = c.batch_size;
            sc.samples = c.n;
            sc.seed = derive_seed(rep_seed, 2000 + static_cast<std::uint64_t>(chain) * c.steps.size() + si);
            sc.init = init;
            const Samples x = sgld_sample(mixture, sc).samples;
            for (const auto& method : methods) {
              const Samples used = method.family == Family::Psd ? x : detail::thin_to(x, c.ksd_thin);
              const auto start = detail::Clock::now();
              const double value = discrepancy(method, used, mixture, sc.seed);
              const double elapsed = detail::seconds_since(start);
              out.push_back({kind, method.name, 2, used.rows(), method.family == Family::Psd ? method.order : 0, rep,
                             c.steps[si], chain, value, false, std::max(elapsed, 1e-9), sc.seed});
            }
          }
        }
        per_item[item] = std::move(out);
        break;
      }
      case ExperimentKind::RuntimeBench: {
        const std::size_t ni = item / static_cast<std::size_t>(c.repeats);
        const int rep = static_cast<int>(item % static_cast<std::size_t>(c.repeats));
        const Eigen::Index n = c.n_grid[ni];
        const std::uint64_t item_seed = derive_seed(c.seed, item);
        const auto p = GaussianTarget::standard(d);
        const Samples x = sample_q_family(GaussianFamily{Vector::Zero(d), Matrix::Identity(d, d)}, n, d, item_seed);
        std::vector<ResultRecord> out;
        for (const auto& method : methods) {
          int calls = 0;
          double value = 0.0;
          const auto start = detail::Clock::now();
          do {
            value = discrepancy(method, x, p, item_seed);
            ++calls;
          } while (detail::seconds_since(start) < c.min_time);
          const double per_call = detail::seconds_since(start) / calls;
          out.push_back({kind, method.name, d, n, method.family == Family::Psd ? method.order : 0, rep, 0.0, 0, value,
                         false, std::max(per_call, 1e-12), item_seed});
        }
        per_item[item] = std::move(out);
        break;
      }
    }
  };

  ExperimentResult result;
  auto collect = [&] {
    result.records.clear();
    for (auto& v : per_item) result.records.insert(result.records.end(), v.begin(), v.end());
  };

  try {
    // Runtime measurements stay sequential so timings do not compete for cores.
    parallel_for(items, c.kind == ExperimentKind::RuntimeBench ? 1 : c.threads, run_item);
  } catch (const std::exception& e) {
    collect();
    result.summary = {{"experiment", kind}, {"status", "failed"}, {"error", e.what()}};
    detail::write_outputs(c, result);
    throw;
  }
  collect();

  json summary{{"experiment", kind}, {"status", "ok"},     {"n", c.n},
               {"d", c.d},           {"repeats", c.repeats}, {"alpha", c.alpha},
               {"m", c.m},           {"seed", c.seed},       {"test", c.test}};
  switch (c.kind) {
    case ExperimentKind::SgldTuning: {
      json per_method = json::object();
      for (const auto& method : methods) {
        json medians = json::array();
        json selected = json::array();
        std::map<std::string, int> counts;
        for (int rep = 0; rep < c.repeats; ++rep) {
          json row = json::object();
          double best = std::numeric_limits<double>::infinity();
          double best_step = 0.0;
          for (double step : c.steps) {
            std::vector<double> values;
            for (const auto& r : result.records)
              if (r.method == method.name && r.repeat == rep && r.param == step) values.push_back(r.statistic);
            const double med = detail::median(values);
            row[format_double(step)] = med;
            if (med < best) {
              best = med;
              best_step = step;
            }
          }
          medians.push_back(row);
          selected.push_back(best_step);
          ++counts[format_double(best_step)];
        }
        per_method[method.name] = {{"median_discrepancy", medians}, {"selected_step", selected}, {"selection_counts", counts}};
      }
      summary["steps"] = c.steps;
      summary["chains"] = c.chains;
      summary["batch_size"] = c.batch_size;
      summary["methods"] = per_method;
      break;
    }
    case ExperimentKind::RuntimeBench: {
      json per_method = json::object();
      for (const auto& method : methods) {
        std::vector<double> ns, times;
        json table = json::array();
        for (Eigen::Index n : c.n_grid) {
          std::vector<double> t;
          for (const auto& r : result.records)
            if (r.method == method.name && r.n == n) t.push_back(r.wall_time);
          const double med = detail::median(t);
          ns.push_back(static_cast<double>(n));
          times.push_back(med);
          table.push_back({{"n", n}, {"median_seconds", med}});
        }
        per_method[method.name] = {{"times", table},
                                   {"loglog_slope", ns.size() >= 2 ? detail::loglog_slope(ns, times) : 0.0}};
      }
      summary["methods"] = per_method;
      break;
    }
    default:
      summary["rejection"] = detail::rejection_summary(result.records);
      if (c.kind == ExperimentKind::RbmTable) {
        summary["perturbations"] = c.perturbations;
        summary["rbm_hidden"] = c.rbm_hidden;
      }
      break;
  }
  result.summary = std::move(summary);
  detail::write_outputs(c, result);
  return result;
}

}  // namespace psd::experiments
