#include <benchmark/benchmark.h>

#include <random>

#include "natfx/decomp.hpp"
#include "natfx/estimate.hpp"
#include "natfx/infer.hpp"
#include "natfx/scm.hpp"

namespace {

using namespace natfx;

DiscreteScm chain_model(std::size_t k) {
  std::mt19937_64 g(k);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  auto row = [&](std::size_t n) {
    std::vector<double> r(n);
    double s = 0;
    for (auto& x : r) s += (x = u(g));
    for (auto& x : r) x /= s;
    return r;
  };
  ScmLevels lv;
  for (std::size_t i = 0; i < 2; ++i) lv.exposure.push_back(std::to_string(i));
  for (std::size_t i = 0; i < k; ++i) {
    lv.m1.push_back(std::to_string(i));
    lv.m2.push_back(std::to_string(i));
  }
  DiscreteScm::Mat pm1;
  DiscreteScm::Cube pm2(2), y(2);
  for (std::size_t a = 0; a < 2; ++a) {
    pm1.push_back(row(k));
    for (std::size_t m1 = 0; m1 < k; ++m1) {
      pm2[a].push_back(row(k));
      y[a].push_back(row(k));
    }
  }
  return DiscreteScm::sequential(lv, pm1, pm2, y);
}

Query query() {
  Query q;
  q.a = "1";
  q.a_star = "0";
  q.m1_star = "0";
  q.m2_star = "0";
  return q;
}

void BM_eval_expectation(benchmark::State& st) {
  auto m = chain_model(static_cast<std::size_t>(st.range(0)));
  auto e = parse_cf("Y(a, M1(a*), M2(a, M1(a*)))", Scenario::chain(2));
  auto q = query();
  for (auto _ : st) benchmark::DoNotOptimize(eval_expectation(m, e, q));
}
BENCHMARK(BM_eval_expectation)->Arg(2)->Arg(8)->Arg(32);

void BM_decompose_seq2(benchmark::State& st) {
  auto m = chain_model(static_cast<std::size_t>(st.range(0)));
  auto q = query();
  for (auto _ : st) benchmark::DoNotOptimize(decompose(m, q));
}
BENCHMARK(BM_decompose_seq2)->Arg(2)->Arg(8)->Arg(32);

void BM_plugin_seq2(benchmark::State& st) {
  auto m = chain_model(static_cast<std::size_t>(st.range(0)));
  auto q = query();
  for (auto _ : st) benchmark::DoNotOptimize(plugin_seq2(m, q));
}
BENCHMARK(BM_plugin_seq2)->Arg(2)->Arg(8)->Arg(32);

void BM_fit_ols(benchmark::State& st) {
  const auto n = static_cast<Eigen::Index>(st.range(0));
  std::mt19937_64 g(1);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd X(n, 10);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X(i, 0) = 1;
    for (int j = 1; j < 10; ++j) X(i, j) = z(g);
    y(i) = X.row(i).sum() + z(g);
  }
  for (auto _ : st) benchmark::DoNotOptimize(fit_ols(X, y));
}
BENCHMARK(BM_fit_ols)->Arg(1000)->Arg(100000);

void BM_linear_components(benchmark::State& st) {
  LinearParams p;
  p.theta = {1, 0.5, 0.3, 0.2, 0.1, -0.1, 0.05, 0.01};
  p.beta = {2, 0.4, 0.02, 0.01};
  p.gamma = {25, 1};
  p.sigma2_m1 = 16;
  LinearQuery q{1, 0, 29.5, 3.05};
  for (auto _ : st) benchmark::DoNotOptimize(linear_components(p, q, {}));
}
BENCHMARK(BM_linear_components);

void BM_bootstrap_plugin(benchmark::State& st) {
  auto m = chain_model(2);
  SimulationOptions so;
  so.n = 5000;
  so.seed = 1;
  auto data = simulate(m, so);
  auto q = query();
  auto levels = m.levels();
  Estimator est = [&](const Dataset& d) {
    return plugin_seq2(from_dataset(d, Scenario::chain(2), so.roles, levels), q);
  };
  BootstrapConfig cfg;
  cfg.replicates = static_cast<std::size_t>(st.range(0));
  cfg.seed = 3;
  for (auto _ : st) benchmark::DoNotOptimize(bootstrap(data, est, cfg));
}
BENCHMARK(BM_bootstrap_plugin)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
