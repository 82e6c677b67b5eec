#include "natfx/infer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>

#include "natfx/errors.hpp"
#include "natfx/rng.hpp"

namespace natfx {

void BootstrapConfig::validate() const {
  if (replicates < 2) throw InvalidArgument("bootstrap needs at least 2 replicates");
  if (!(level > 0 && level < 1)) throw InvalidArgument("confidence level must be in (0, 1)");
  if (!(max_fail >= 0 && max_fail <= 1)) throw InvalidArgument("max-fail must be in [0, 1]");
}

std::vector<std::size_t> resample_indices(std::uint64_t seed, std::size_t replicate, std::size_t n) {
  Rng rng(stream_seed(seed, replicate));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.below(n);
  return idx;
}

double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

struct Outcome {
  std::optional<std::vector<double>> values;
  std::string error;
};

}  // namespace

BootstrapResult bootstrap(const Dataset& data, const Estimator& estimator,
                          const BootstrapConfig& cfg) {
  cfg.validate();
  BootstrapResult out;
  out.result = estimator(data);
  const auto& ref = out.result.components;
  const std::size_t n = data.rows();
  const std::size_t B = cfg.replicates;

  std::vector<Outcome> results(B);
  auto run_one = [&](std::size_t r) {
    try {
      auto idx = resample_indices(cfg.seed, r, n);
      auto res = estimator(data.take(idx));
      if (res.components.size() != ref.size()) throw InvalidArgument("component set changed");
      std::vector<double> v;
      v.reserve(ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k) {
        if (res.components[k].name != ref[k].name) throw InvalidArgument("component set changed");
        v.push_back(res.components[k].estimate);
      }
      results[r].values = std::move(v);
    } catch (const std::exception& e) {
      results[r].error = e.what();
    }
  };

  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, B));
  if (workers <= 1) {
    for (std::size_t r = 0; r < B; ++r) run_one(r);
  } else {
    // Work is handed out by counter, but each result lands in its own slot,
    // so output does not depend on scheduling.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < B; r = next++) run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::size_t failed = 0;
  std::string first_error;
  for (const auto& r : results) {
    if (!r.values) {
      if (failed == 0) first_error = r.error;
      ++failed;
    }
  }
  const auto allowed = static_cast<std::size_t>(std::floor(cfg.max_fail * static_cast<double>(B) + 1e-9));
  if (failed > allowed || failed == B) throw TooManyFailedReplicates(failed, B, first_error);

  out.replicates = B;
  out.failed = failed;
  out.draws.assign(ref.size(), {});
  for (const auto& r : results) {
    if (!r.values) continue;
    for (std::size_t k = 0; k < ref.size(); ++k) out.draws[k].push_back((*r.values)[k]);
  }
  const double tail = (1 - cfg.level) / 2;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    auto sorted = out.draws[k];
    std::sort(sorted.begin(), sorted.end());
    out.result.components[k].ci = Interval{quantile_sorted(sorted, tail), quantile_sorted(sorted, 1 - tail)};
  }
  return out;
}

}  // namespace natfx
