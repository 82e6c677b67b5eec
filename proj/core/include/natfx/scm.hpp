#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "natfx/cfexpr.hpp"
#include "natfx/dataset.hpp"

namespace natfx {

/// Binds formula symbols to model levels: `a`, `a*`, `m1*`, `m2*`, plus any
/// named symbols (e.g. `a**`). Unlisted named symbols are looked up directly
/// as level labels.
struct Query {
  std::string a;
  std::string a_star;
  std::optional<std::string> m1_star;
  std::optional<std::string> m2_star;
  std::map<std::string, std::string, std::less<>> named;
};

struct ScmLevels {
  std::vector<std::string> exposure;
  std::vector<std::string> m1;
  std::vector<std::string> m2;  // empty for a single mediator
};

/// Discrete structural causal model over A -> M1 (-> M2) -> Y with at most two
/// mediators.
///
/// Tables are dense and total over the declared supports. A non-sequential
/// model stores Pr(M2 | A) broadcast across m1, so the evaluator treats every
/// two-mediator model the same way.
class DiscreteScm {
 public:
  using Vec = std::vector<double>;
  using Mat = std::vector<Vec>;
  using Cube = std::vector<Mat>;

  /// pm1[a][m1]; ymean[a][m1]. Scenario SingleMediator.
  static DiscreteScm single(ScmLevels levels, const Mat& pm1, const Mat& ymean);
  /// pm1[a][m1]; pm2[a][m1][m2]; ymean[a][m1][m2]. Scenario OnePathChain(2).
  static DiscreteScm sequential(ScmLevels levels, const Mat& pm1, const Cube& pm2,
                                const Cube& ymean);
  /// pm1[a][m1]; pm2[a][m2]; ymean[a][m1][m2]. Scenario NonSequential(2).
  static DiscreteScm non_sequential(ScmLevels levels, const Mat& pm1, const Mat& pm2,
                                    const Cube& ymean);

  const Scenario& scenario() const noexcept { return scenario_; }
  const ScmLevels& levels() const noexcept { return levels_; }

  std::size_t exposures() const noexcept { return levels_.exposure.size(); }
  std::size_t m1_size() const noexcept { return levels_.m1.size(); }
  /// 1 for a single-mediator model (a dummy M2 with certain value).
  std::size_t m2_size() const noexcept { return n2_; }

  double pm1(std::size_t a, std::size_t m1) const { return pm1_[a * n1_ + m1]; }
  double pm2(std::size_t a, std::size_t m1, std::size_t m2) const {
    return pm2_[(a * n1_ + m1) * n2_ + m2];
  }
  double ymean(std::size_t a, std::size_t m1, std::size_t m2) const {
    return y_[(a * n1_ + m1) * n2_ + m2];
  }

  std::optional<std::size_t> find_exposure(std::string_view label) const;
  std::optional<std::size_t> find_m1(std::string_view label) const;
  std::optional<std::size_t> find_m2(std::string_view label) const;

  /// Same structure, cell means replaced by f(cell mean).
  template <typename F>
  DiscreteScm map_outcome(F&& f) const {
    DiscreteScm copy = *this;
    for (auto& v : copy.y_) v = f(v);
    return copy;
  }

  /// JSON model document; see README for the schema.
  static DiscreteScm from_json(std::string_view text);
  std::string to_json() const;

 private:
  DiscreteScm() = default;
  void validate_and_normalize();

  Scenario scenario_ = Scenario::single();
  ScmLevels levels_;
  std::size_t n1_ = 0;
  std::size_t n2_ = 1;
  std::vector<double> pm1_;
  std::vector<double> pm2_;
  std::vector<double> y_;
};

/// Resolved level indices for a query against one model.
struct BoundQuery {
  std::size_t a = 0;
  std::size_t a_star = 0;
  std::optional<std::size_t> m1_star;
  std::optional<std::size_t> m2_star;
};

/// Looks up query levels in the model. Throws UnboundLevel or
/// UnknownSupportValue.
BoundQuery bind(const DiscreteScm& model, const Query& q);

/// Index of an exposure symbol under `q`. Throws UnboundLevel.
std::size_t resolve_exposure(const DiscreteScm& model, const ExposureLevel& e, const Query& q);

/// Index of a fixed mediator level under `q`. Throws UnboundLevel or
/// UnknownSupportValue.
std::size_t resolve_fixed(const DiscreteScm& model, const MediatorSpec& spec, const Query& q);

/// Population expectation of an identifiable formula by exhaustive
/// enumeration over the mediator supports.
///
/// Throws NotIdentifiable, UnboundLevel, UnknownSupportValue, and the
/// shape errors of validate_cf.
double eval_expectation(const DiscreteScm& model, const CfExpr& expr, const Query& q);

struct SimulationOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  /// Probability per exposure level (same order as the model); empty = uniform.
  std::vector<double> exposure_probs;
  double noise_sd = 1.0;
  /// Output column names.
  Roles roles{"A", "M1", std::string("M2"), "Y", {}};
};

/// Draws n i.i.d. rows A -> M1 -> M2 -> Y; Y is the cell mean plus Gaussian
/// noise. Identical options give identical output.
Dataset simulate(const DiscreteScm& model, const SimulationOptions& options);

/// Plug-in model: empirical conditional frequencies and outcome cell means.
/// `declared` fixes the supports; otherwise they are read from the data.
/// Throws EmptyCell listing every empty cell, or NonCategoricalColumn.
DiscreteScm from_dataset(const Dataset& data, const Scenario& scenario, const Roles& roles,
                         const std::optional<ScmLevels>& declared = std::nullopt);

}  // namespace natfx
