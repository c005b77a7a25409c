#pragma once

#include <functional>
#include <string>
#include <vector>

#include "douglab/model.hpp"

namespace douglab {

struct PropertyResult {
  std::string id;
  bool pass = false;
  std::string detail;  // counterexample dump on failure
  double seconds = 0;
};

// Every module property from the suite registry whose id contains the
// selector (empty selector runs all). Ids are "<module>.<property>".
std::vector<PropertyResult> run_verify(const std::string& selector = "");
std::vector<std::string> verify_suite_ids();

// Canned problems the suites and the acceptance harness share.
Problem scalar_linear_problem(double j, AdditiveKind add, double sigma_b,
                              MultiplicativeKind mult = MultiplicativeKind::kNone,
                              double a1 = 0.0);
Problem dense_spd_problem(int dim, AdditiveKind add,
                          MultiplicativeKind mult = MultiplicativeKind::kNone,
                          double a1 = 0.0);
Problem logcosh_problem(double h, double eps, AdditiveKind add);
Problem saturating_problem(double j, double r1, double delta, double sat,
                           AdditiveKind add);

}  // namespace douglab
