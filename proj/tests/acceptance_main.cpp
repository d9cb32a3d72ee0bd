// Verification-suite runner: one pass/fail line per criterion, nonzero exit
// on any failure.
#include <cstdio>

#include "perfora/acceptance.hpp"

int main() {
  std::vector<perfora::CriterionResult> results = perfora::run_acceptance(1);
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("%s  [%2d] %s — %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
  }
  std::printf("%s\n", all ? "ALL PASS" : "FAILURES PRESENT");
  return all ? 0 : 1;
}
