#include "natfx/assumptions.hpp"

namespace natfx {

AssumptionLedger assumption_ledger(const Scenario& scenario, bool acknowledged) {
  AssumptionLedger ledger;
  ledger.scenario = scenario.name();
  auto add = [&](const char* id, const char* statement, const char* meaning) {
    ledger.entries.push_back({id, statement, meaning, acknowledged});
  };
  if (scenario.mediators() == 1) {
    add("A'1", "Y(a,m) _||_ A | C", "no unmeasured exposure-outcome confounding");
    add("A'2", "Y(a,m) _||_ M | {A,C}", "no unmeasured mediator-outcome confounding");
    add("A'3", "M(a) _||_ A | C", "no unmeasured exposure-mediator confounding");
    add("A'4", "Y(a,m) _||_ M(a*) | C",
        "no mediator-outcome confounder that is itself affected by the exposure");
    return ledger;
  }
  add("A1", "Y(a,m1,m2) _||_ A | C", "no unmeasured exposure-outcome confounding");
  add("A2", "Y(a,m1,m2) _||_ {M1,M2} | {A,C}",
      "no unmeasured confounding of the mediator set and the outcome");
  add("A3", "{M1(a),M2(a,m1)} _||_ A | C",
      "no unmeasured confounding of the exposure and the mediator set");
  add("A4", "Y(a,m1,m2) _||_ {M1(a*),M2(a*,m1)} | C",
      "no mediator-outcome confounder that is itself affected by the exposure");
  add("A5", "M2(a,m1) _||_ M1 | {A,C}", "no unmeasured M1-M2 confounding");
  add("A6", "M2(a,m1) _||_ M1(a*) | C",
      "no M1-M2 confounder that is itself affected by the exposure");
  return ledger;
}

}  // namespace natfx
