#pragma once

#include <string>
#include <vector>

namespace wpt {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Quadrature and identity checks behind `wpt verify`: per-component tempered
// masses for the power / WSGM / weight-preserving constructions, the
// dimensional weight-ratio identity, beta = 1 identities for every
// construction, and analytic-vs-quadrature I(beta). `filter` keeps checks
// whose name contains the substring (empty keeps all).
std::vector<CheckResult> run_verify_checks(const std::string& filter = "");

}  // namespace wpt
