#pragma once

#include <string>
#include <vector>

namespace cayrec {

struct VerifyCheck {
  std::string name;
  double measured = 0.0;   // worst observed error (or margin, see sense)
  double tolerance = 0.0;  // pass iff measured <= tolerance
  bool pass = false;
};

// Oracle cross-validation suite at n <= 5: finite-difference gradient and
// Hessian-trace checks, regular-representation exactness and the 3n^2
// equality, gauge invariance, isotopy oracle agreement, SVD and rank
// identities, the nuclear-norm variational identity.
std::vector<VerifyCheck> run_verification(uint64_t seed = 12345);

std::string verification_report_json(const std::vector<VerifyCheck>& checks);

}  // namespace cayrec
