// Acceptance gate: runs each criterion, prints one PASS/FAIL line per
// criterion and exits nonzero if any fails. Repeat counts and tolerances are
// fixed here; `--only N` runs a single criterion.

#include "psd/experiments.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace psd;
using namespace psd::experiments;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double rejection_rate(const ExperimentResult& res, const std::string& method, double param = 0.0) {
  for (const auto& row : res.summary["rejection"])
    if (row["method"] == method && row["param"].get<double>() == param) return row["rejection_rate"].get<double>();
  throw Error("no summary row for " + method);
}

ExperimentConfig config(ExperimentKind kind, std::vector<std::string> methods, int d, int repeats, std::uint64_t seed) {
  auto c = defaults_for(kind);
  c.methods = std::move(methods);
  c.d = d;
  c.repeats = repeats;
  c.seed = seed;
  c.threads = 0;
  return c;
}

// 1: PSD statistics against brute-force pairwise sums of the Stein kernel.
void exact_oracles(Verdict& v) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_d(1, 3), pick_r(1, 3), pick_n(2, 200);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = pick_d(rng), r = pick_r(rng);
    const Eigen::Index n = pick_n(rng);
    const GaussianTarget p(Vector::Random(d), oracle::random_spd(d, rng));
    const Samples x = sample_q_family(variance_perturbed_gaussian(d, 1.3), n, d, derive_seed(7, trial));
    const PolynomialBasis basis(d, r);
    Matrix tau(n, basis.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector xi = x.row(i).transpose();
      Vector ui(d);
      p.score({xi.data(), static_cast<std::size_t>(d)}, {ui.data(), static_cast<std::size_t>(d)});
      for (std::size_t k = 0; k < basis.size(); ++k)
        tau(i, static_cast<Eigen::Index>(k)) = oracle::stein_feature(basis[k], xi, ui);
    }
    const auto f = stein_features(x, p, basis);
    const double nn = static_cast<double>(n);
    const double v_ref = oracle::brute_force_delta_sum(tau, true) / (nn * nn);
    const double u_ref = oracle::brute_force_delta_sum(tau, false) / (nn * (nn - 1.0));
    worst = std::max(worst, std::abs(psd_v_statistic(f).value - v_ref) / std::abs(v_ref));
    worst = std::max(worst, std::abs(psd_u_statistic(f).value - u_ref) / std::max(std::abs(u_ref), std::abs(v_ref)));
  }
  v.detail << "50 instances, worst relative error " << fmt(worst);
  v.check(worst <= 1e-9, "relative error above 1e-9");
}

// 2: population PSD zero set for Gaussian targets, and its invariance under
// invertible linear maps.
void zero_set(Verdict& v) {
  std::mt19937_64 rng(99);
  double max_zero = 0.0, min_positive = std::numeric_limits<double>::infinity();
  int perturbations = 0;
  for (int d = 1; d <= 3; ++d) {
    for (int trial = 0; trial < 5; ++trial) {
      const GaussianTarget p(Vector::Random(d), oracle::random_spd(d, rng));
      const PolynomialBasis r2(d, 2), r1(d, 1);
      max_zero = std::max(max_zero, std::abs(population_psd_gaussian(p.mean(), p.covariance(), p, r2).value));
      // r = 1 sees only the mean, so a covariance change keeps it at zero
      Matrix wider = p.covariance();
      wider.diagonal().array() += 0.3;
      max_zero = std::max(max_zero, std::abs(population_psd_gaussian(p.mean(), wider, p, r1).value));
      for (int i = 0; i < d; ++i) {
        Vector m = p.mean();
        m[i] += 0.1;
        min_positive = std::min({min_positive, population_psd_gaussian(m, p.covariance(), p, r2).value,
                                 population_psd_gaussian(m, p.covariance(), p, r1).value});
        perturbations += 2;
        for (int j = 0; j <= i; ++j) {
          Matrix c = p.covariance();
          c(i, j) += 0.1;
          c(j, i) = c(i, j);
          if (jacobi_eigen(c).values.minCoeff() <= 0.0) continue;
          min_positive = std::min(min_positive, population_psd_gaussian(p.mean(), c, p, r2).value);
          ++perturbations;
        }
      }
    }
  }
  int transforms = 0;
  double transformed_zero = 0.0, transformed_positive = std::numeric_limits<double>::infinity();
  while (transforms < 20) {
    const int d = 1 + transforms % 3;
    const Matrix w = Matrix::Random(d, d);
    if (condition_number(w) >= 100.0) continue;
    ++transforms;
    const GaussianTarget p(Vector::Random(d), oracle::random_spd(d, rng));
    const GaussianTarget py(w * p.mean(), w * p.covariance() * w.transpose());
    const PolynomialBasis basis(d, 2);
    transformed_zero = std::max(transformed_zero, std::abs(population_psd_gaussian(py.mean(), py.covariance(), py, basis).value));
    Matrix qc = p.covariance();
    qc(0, 0) += 0.1;
    const Matrix qy = w * qc * w.transpose();
    transformed_positive =
        std::min(transformed_positive, population_psd_gaussian(py.mean(), 0.5 * (qy + qy.transpose()), py, basis).value);
    // the sample statistic of transformed features agrees with the push-forward target
    const Samples x = sample_q_family(GaussianFamily{p.mean(), p.covariance()}, 200, d, derive_seed(5, transforms));
    const auto a = transformed_features(x, p, basis, w);
    const auto b = stein_features(Samples(x * w.transpose()), py, basis);
    v.check((a.values - b.values).norm() <= 1e-8 * b.values.norm(), "transformed features differ from push-forward");
  }
  v.detail << "matched max " << fmt(max_zero) << ", perturbed min " << fmt(min_positive) << " over " << perturbations
           << " perturbations; 20 transforms: matched max " << fmt(transformed_zero) << ", perturbed min "
           << fmt(transformed_positive);
  v.check(max_zero <= 1e-10 && transformed_zero <= 1e-8, "matched moments not zero");
  v.check(min_positive > 1e-6 && transformed_positive > 1e-6, "perturbation not detected");
}

// 3: type I error of the Rademacher bootstrap test.
void type_one(Verdict& v) {
  for (int d : {1, 5, 10}) {
    auto c = config(ExperimentKind::Type1, {"psd-r2"}, d, 200, 300 + d);
    c.m = 300;
    const double rate = rejection_rate(run_experiment(c), "psd-r2");
    v.detail << "d=" << d << ": " << fmt(rate) << "  ";
    v.check(rate >= 0.02 && rate <= 0.09, "d=" + std::to_string(d) + " outside [0.02, 0.09]");
  }
}

// 4: power against a variance perturbation, and blindness of r = 1.
void variance_power(Verdict& v) {
  for (int d : {1, 5, 15}) {
    const auto res = run_experiment(config(ExperimentKind::PowerVariance, {"psd-r2", "psd-r1"}, d, 50, 400 + d));
    const double r2 = rejection_rate(res, "psd-r2"), r1 = rejection_rate(res, "psd-r1");
    v.detail << "d=" << d << ": r2 " << fmt(r2) << ", r1 " << fmt(r1) << "  ";
    v.check(r2 >= 0.95, "r=2 power below 0.95 at d=" + std::to_string(d));
    v.check(r1 <= 0.15, "r=1 rejection above 0.15 at d=" + std::to_string(d));
  }
}

// 5: heavy tails need fourth-order features.
void tail_power(Verdict& v) {
  const auto laplace = run_experiment(config(ExperimentKind::PowerLaplace, {"psd-r4", "psd-r2"}, 5, 50, 501));
  const double l4 = rejection_rate(laplace, "psd-r4"), l2 = rejection_rate(laplace, "psd-r2");
  auto tc = config(ExperimentKind::PowerStudentT, {"psd-r4"}, 5, 50, 502);
  tc.n = 2000;
  const double t4 = rejection_rate(run_experiment(tc), "psd-r4");
  v.detail << "Laplace r4 " << fmt(l4) << ", r2 " << fmt(l2) << "; Student-t r4 " << fmt(t4);
  v.check(l4 >= 0.9, "Laplace r=4 below 0.9");
  v.check(l2 <= 0.2, "Laplace r=2 above 0.2");
  v.check(t4 >= 0.9, "Student-t r=4 below 0.9");
}

// 6: RBM rejection rates grow with the perturbation.
void rbm_trend(Verdict& v) {
  auto c = config(ExperimentKind::RbmTable, {"psd-r2"}, 20, 50, 600);
  c.rbm_hidden = 15;
  const auto res = run_experiment(c);
  std::vector<double> rates;
  for (double s : c.perturbations) {
    rates.push_back(rejection_rate(res, "psd-r2", s));
    v.detail << "sigma " << s << ": " << fmt(rates.back()) << "  ";
  }
  int inversions = 0;
  bool large_inversion = false;
  for (std::size_t i = 1; i < rates.size(); ++i)
    if (rates[i] < rates[i - 1]) {
      ++inversions;
      large_inversion |= rates[i - 1] - rates[i] > 0.05;
    }
  v.check(rates.front() <= 0.12, "null rejection above 0.12");
  v.check(rates.back() >= 0.9, "rejection at 0.06 below 0.9");
  v.check(inversions <= 1 && !large_inversion, "not monotone");
}

// 7: step-size selection for SGLD on the mixture posterior.
void sgld_selection(Verdict& v) {
  auto c = config(ExperimentKind::SgldTuning, {"psd-r2", "ksd-imq"}, 2, 5, 700);
  const auto res = run_experiment(c);
  for (const auto& name : c.methods) {
    int hits = 0;
    for (const auto& s : res.summary["methods"][name]["selected_step"]) hits += s.get<double>() == 0.005;
    v.detail << name << " picks 0.005 in " << hits << "/5  ";
    v.check(hits >= 4, name + " selected 0.005 in fewer than 4 of 5 repeats");
  }
}

// 8: linear against quadratic cost in n.
void runtime_scaling(Verdict& v) {
  auto c = config(ExperimentKind::RuntimeBench, {"psd-r2", "ksd-imq"}, 10, 3, 800);
  c.n_grid = {500, 1000, 2000, 4000, 8000};
  c.min_time = 0.05;
  const auto res = run_experiment(c);
  const auto& m = res.summary["methods"];
  const double ps = m["psd-r2"]["loglog_slope"].get<double>(), ks = m["ksd-imq"]["loglog_slope"].get<double>();
  const double pt = m["psd-r2"]["times"].back()["median_seconds"].get<double>();
  const double kt = m["ksd-imq"]["times"].back()["median_seconds"].get<double>();
  v.detail << "PSD slope " << fmt(ps) << ", KSD slope " << fmt(ks) << ", speedup at n=8000 " << fmt(kt / pt);
  v.check(std::abs(ps - 1.0) <= 0.25, "PSD slope outside 1 +/- 0.25");
  v.check(std::abs(ks - 2.0) <= 0.3, "KSD slope outside 2 +/- 0.3");
  v.check(kt / pt >= 10.0, "PSD less than 10x faster");
}

// 9: weighted chi-square null and the end-to-end asymptotic test.
void asymptotic(Verdict& v) {
  auto draws = simulate_weighted_chi2(Vector::Ones(1), 1000000, 900);
  const std::size_t k = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(draws.size()))) - 1;
  std::nth_element(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(k), draws.end());
  const double q = draws[k];
  auto c = config(ExperimentKind::Type1, {"psd-r2"}, 5, 100, 901);
  c.test = "asymptotic";
  c.m = 2000;
  const double rate = rejection_rate(run_experiment(c), "psd-r2");
  v.detail << "95% quantile " << fmt(q, 5) << " (exact 2.841), type I " << fmt(rate);
  v.check(std::abs(q - 2.841) <= 0.03, "quantile off by more than 0.03");
  v.check(rate >= 0.01 && rate <= 0.15, "type I outside [0.01, 0.15]");
}

template <class M>
double worst_score_error(const M& model, std::mt19937_64& rng, double spread) {
  std::normal_distribution<double> normal(0.0, spread);
  const int d = model.dimension();
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Vector x(d);
    for (auto& e : x) e = normal(rng);
    const auto logp = [&](const Vector& y) { return model.log_density({y.data(), static_cast<std::size_t>(d)}); };
    const Vector fd = oracle::fd_gradient(logp, x, 1e-5);
    Vector u(d);
    model.score({x.data(), static_cast<std::size_t>(d)}, {u.data(), static_cast<std::size_t>(d)});
    for (int i = 0; i < d; ++i) worst = std::max(worst, std::abs(u[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
  }
  return worst;
}

// 10: scores against finite differences; Stein identity for exact samplers.
void score_models(Verdict& v) {
  std::mt19937_64 rng(1000);
  const GaussianTarget g(Vector::Random(4), oracle::random_spd(4, rng));
  const double eg = worst_score_error(g, rng, 2.0);
  const double er = worst_score_error(GbRbmTarget::random(20, 15, 2021), rng, 1.5);
  const double em = worst_score_error(MixturePosteriorTarget::standard(), rng, 1.5);
  v.detail << "FD worst rel: gaussian " << fmt(eg) << ", rbm " << fmt(er) << ", mixture " << fmt(em);
  v.check(std::max({eg, er, em}) <= 1e-5, "finite-difference mismatch");

  const GaussianTarget targets[] = {GaussianTarget::standard(3), g};
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& p = targets[t];
    const PolynomialBasis basis(p.dimension(), 2);
    std::vector<double> u(200);
    for (std::size_t rep = 0; rep < u.size(); ++rep) {
      Engine e = make_engine(derive_seed(1001, t), rep);
      u[rep] = psd_u_statistic(stein_features(p.sample(1000, e), p, basis)).value;
    }
    const double mean = std::accumulate(u.begin(), u.end(), 0.0) / 200.0;
    double ss = 0.0;
    for (double x : u) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / 199.0 / 200.0);
    v.detail << "; Stein identity " << (t ? "general" : "standard") << " gaussian " << fmt(mean / se) << " SE";
    v.check(std::abs(mean) <= 4.0 * se, "mean U-statistic beyond 4 SE");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, void (*)(Verdict&)> criteria[] = {
      {"exact-arithmetic oracles", exact_oracles},
      {"population zero set and transform invariance", zero_set},
      {"type I calibration", type_one},
      {"power, variance-perturbed Gaussian", variance_power},
      {"power, Laplace and Student-t", tail_power},
      {"RBM perturbation trend", rbm_trend},
      {"SGLD step-size selection", sgld_selection},
      {"runtime scaling", runtime_scaling},
      {"asymptotic test", asymptotic},
      {"score models and Stein identity", score_models},
  };
  int only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--only") == 0) only = std::atoi(argv[2]);

  int failures = 0;
  for (int i = 0; i < 10; ++i) {
    if (only && only != i + 1) continue;
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [error: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << v.detail.str()
              << " (" << fmt(secs) << " s)" << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
