#pragma once

#include <string>
#include <vector>

#include "rhombus/scan.hpp"

namespace rhombus {

struct ClaimCheck {
  std::string id;        ///< "a".."g"
  std::string title;
  bool passed;
  std::string measured;  ///< human-readable measured values
};

struct VerifyOptions {
  /// Grid used for the rectangle item; defaults to 25 x 10 over
  /// [1/sqrt(3), sqrt(3)] x [0, 0.95] with the xi and eta blocks.
  ScanConfig scan;
  bool force = false;
  int index_N = 64;
};

struct VerifyReport {
  std::vector<ClaimCheck> items;
  bool all_passed() const;
};

/// Runs the fixed checklist:
///  (a) critical parameters against reference values,
///  (b) hyperbolicity at e = 0 across a u-grid,
///  (c) script-A(1/sqrt(3), e) against A(27/4, e) at coefficient level,
///  (d) script-B(u3, e) against A(9, e),
///  (e) u <-> 1/u symmetry of the monodromy,
///  (f) positivity of the discretised operators,
///  (g) four essential hyperbolic pairs on every rectangle grid point.
/// Failures become report entries; nothing is thrown for a failed claim.
VerifyReport verify_claims(const VerifyOptions& options = {});

std::string to_json(const VerifyReport& report);
std::string to_text(const VerifyReport& report);

}  // namespace rhombus
