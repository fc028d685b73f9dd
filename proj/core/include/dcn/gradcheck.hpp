#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dcn {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = false;
};

// Central finite-difference verification (step 1e-5, 64-bit) of every layer
// backward and both losses, plus an end-to-end check through a small
// network. `inject_conv_fault` flips the sign of the analytic conv kernel
// gradient, for validating that the suite actually catches errors.
std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed,
                                                 double tolerance = 1e-4,
                                                 bool inject_conv_fault = false);

}  // namespace dcn
