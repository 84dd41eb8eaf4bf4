#pragma once

#include <string>
#include <vector>

namespace xlab {

struct VerifyRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::string suite;
  std::vector<VerifyRow> rows;
  bool passed() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

// Suites: comparison, energy, supersolution, asymptotics, regularity.
VerifyReport verify_suite(const std::string& suite);

std::vector<std::string> verify_suite_names();

}  // namespace xlab
