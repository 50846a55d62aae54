#pragma once

#include <string>
#include <vector>

#include "kvn/scenarios.hpp"

namespace kvn {

enum class VerifyLevel { Fast, Full };

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

// The four invariant suites behind `kvn verify`. Fast keeps dense oracles at
// dimension <= 1024; Full raises the cap to <= 4096 and adds the dt-halving
// convergence study.
VerifyReport run_verify(VerifyLevel level);

// The algebra suite takes the structure table as a parameter so tests can
// prove a mutated table is caught.
void verify_algebra(std::vector<CheckResult>& out, const StructureTable& table);
void verify_representation(std::vector<CheckResult>& out, VerifyLevel level);
void verify_propagator(std::vector<CheckResult>& out, VerifyLevel level);
void verify_scenarios(std::vector<CheckResult>& out, VerifyLevel level);

// Realized-commutator battery: max over generator pairs and test states of
// || (XY - YX) psi - assemble([x,y]) psi ||. States are normalized, so this
// is the relative scale of the defect.
double faithfulness_defect(const Basis& basis, const std::vector<Gen>& gens,
                           std::string* worst = nullptr);

}  // namespace kvn
