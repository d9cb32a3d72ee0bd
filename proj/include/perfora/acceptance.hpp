#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace perfora {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // the numbers behind the verdict
};

/// Full verification suite: analytic eigenvalue and condenser oracles,
/// scaling/affine/concentration properties, penalized-scheme behaviour, the
/// hole-modification dichotomy, energy-at-infinity checks, the big-ball
/// search, gradient correctness, and bit-level determinism.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 1);

nlohmann::json acceptance_to_json(const std::vector<CriterionResult>& results,
                                  std::uint64_t seed);

}  // namespace perfora
