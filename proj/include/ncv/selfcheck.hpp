#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace ncv::selfcheck {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  /// Packet erasure formula under test; replaceable for mutation smoke tests.
  std::function<double(double p_b, std::size_t bits)> erasure_prob;
};

Options default_options();

/// Fast invariant corpus: field axioms sample, erasure formula probes, RLNC
/// round trip, batch-size minimality, zero-erasure closed form and a small
/// analytic vs Monte Carlo agreement run.
std::vector<CheckResult> run(const Options& options = default_options());

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace ncv::selfcheck
