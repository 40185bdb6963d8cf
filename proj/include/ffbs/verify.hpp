#pragma once

#include <string>
#include <vector>

namespace ffbs {

struct SuiteResult {
    std::string name;
    bool passed = true;
    long samples = 0;
    std::string counterexample;  // first violating input set, empty when passed
};

// Randomized property suites over the scalar toolkit plus a finite-difference
// check of the estimator gradient. `slack` is the permitted absolute
// violation of each inequality; `grad_tol` is the relative tolerance of the
// gradient comparison. Fixed seed: repeated calls give identical results.
std::vector<SuiteResult> run_verification(long samples, double slack,
                                          double grad_tol = 1e-6);

}  // namespace ffbs
