#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dpl {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Structural invariants on a small grid: graph properties, operator
/// identities, conservation, dissipation and the (A3) gate. Randomized
/// samples are drawn from a generator seeded with `seed`.
std::vector<CheckResult> run_invariant_checks(std::uint64_t seed, int nx = 8,
                                              int ny = 5);

}  // namespace dpl
