#include <cmath>

#include "natfx/errors.hpp"
#include "natfx/estimate.hpp"

namespace natfx {

// Direct transcription of the empirical formulas for two sequential
// categorical mediators. Kept independent of the decomp catalog on purpose:
// the two code paths are compared against each other in the tests.
DecompositionResult plugin_seq2(const DiscreteScm& model, const Query& q) {
  if (model.scenario().mediators() != 2) {
    throw InvalidArgument("plug-in sequential estimator needs a two-mediator model");
  }
  if (!q.m1_star) throw MissingFixedLevel("plug-in estimator needs m1*");
  if (!q.m2_star) throw MissingFixedLevel("plug-in estimator needs m2*");
  const auto b = bind(model, q);
  const std::size_t a = b.a, as = b.a_star, f1 = *b.m1_star, f2 = *b.m2_star;
  const std::size_t n1 = model.m1_size(), n2 = model.m2_size();

  auto p = [&](std::size_t e, std::size_t m1, std::size_t m2) { return model.ymean(e, m1, m2); };
  auto P1 = [&](std::size_t e, std::size_t m1) { return model.pm1(e, m1); };
  auto P2 = [&](std::size_t e, std::size_t m1, std::size_t m2) { return model.pm2(e, m1, m2); };

  double cde = p(a, f1, f2) - p(as, f1, f2);

  double int_ref_am1 = 0;
  for (std::size_t m1 = 0; m1 < n1; ++m1) {
    int_ref_am1 += (p(a, m1, f2) - p(a, f1, f2) - p(as, m1, f2) + p(as, f1, f2)) * P1(as, m1);
  }

  double int_ref_am2_am1m2 = 0, nat_am1 = 0, nat_am2 = 0, nat_am1m2 = 0, nat_m1m2 = 0;
  double pie_m1 = 0, pie_m2 = 0, pde = 0, y_treat = 0, y_ref = 0;
  for (std::size_t m2 = 0; m2 < n2; ++m2) {
    for (std::size_t m1 = 0; m1 < n1; ++m1) {
      const double dp = p(a, m1, m2) - p(as, m1, m2);
      const double d1 = P1(a, m1) - P1(as, m1);
      const double d2 = P2(a, m1, m2) - P2(as, m1, m2);
      int_ref_am2_am1m2 += (p(a, m1, m2) - p(a, m1, f2) - p(as, m1, m2) + p(as, m1, f2)) *
                           P1(as, m1) * P2(as, m1, m2);
      nat_am1 += dp * P2(as, m1, m2) * d1;
      nat_am2 += dp * P1(as, m1) * d2;
      nat_am1m2 += dp * d1 * d2;
      nat_m1m2 += p(as, m1, m2) * d1 * d2;
      pie_m1 += p(as, m1, m2) * P2(as, m1, m2) * d1;
      pie_m2 += p(as, m1, m2) * P1(as, m1) * d2;
      pde += dp * P1(as, m1) * P2(as, m1, m2);
      y_treat += p(a, m1, m2) * P1(a, m1) * P2(a, m1, m2);
      y_ref += p(as, m1, m2) * P1(as, m1) * P2(as, m1, m2);
    }
  }

  const auto A = ComponentRole::Additive;
  DecompositionResult r;
  r.components = {
      {"CDE", A, cde, std::nullopt},
      {"INT_ref-AM1", A, int_ref_am1, std::nullopt},
      {"INT_ref-AM2+AM1M2", A, int_ref_am2_am1m2, std::nullopt},
      {"NatINT_AM1", A, nat_am1, std::nullopt},
      {"NatINT_AM2", A, nat_am2, std::nullopt},
      {"NatINT_AM1M2", A, nat_am1m2, std::nullopt},
      {"NatINT_M1M2", A, nat_m1m2, std::nullopt},
      {"PDE", ComponentRole::Auxiliary, pde, std::nullopt},
      {"PIE_M1", A, pie_m1, std::nullopt},
      {"PIE_M2", A, pie_m2, std::nullopt},
      {"TE", ComponentRole::Total, y_treat - y_ref, std::nullopt},
  };
  r.finalize();
  return r;
}

}  // namespace natfx
