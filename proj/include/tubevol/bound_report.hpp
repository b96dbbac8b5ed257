#pragma once

#include <map>
#include <string>

namespace tubevol {

enum class CheckStatus { Evaluated, PreconditionViolation, Error };

const char* to_string(CheckStatus status);

/// One comparison of a measured quantity against a bound.
///
/// `passed` is defined as slack >= -tolerance; reports whose precondition
/// failed carry status PreconditionViolation and never count as failures.
struct BoundReport {
  std::string scenario;
  std::string check;
  std::string variant;
  double measured = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double tolerance = 0.0;
  double error_estimate = 0.0;
  bool passed = false;
  bool equality = false;
  /// Informational reports are rendered but never count as failures.
  bool enforced = true;
  CheckStatus status = CheckStatus::Evaluated;
  std::map<std::string, double> constants;
  std::string note;

  /// Fills slack/passed from measured, bound and tolerance.
  static BoundReport compare(double measured, double bound, double tolerance);

  /// A report that records an unmet precondition; no comparison is made.
  static BoundReport precondition_violation(std::string check, std::string note);

  bool is_failure() const {
    return status == CheckStatus::Error || (status == CheckStatus::Evaluated && enforced && !passed);
  }
};

}  // namespace tubevol
