#include "tubevol/bound_report.hpp"

#include <limits>
#include <utility>

namespace tubevol {

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Evaluated: return "evaluated";
    case CheckStatus::PreconditionViolation: return "precondition_violation";
    case CheckStatus::Error: return "error";
  }
  return "unknown";
}

BoundReport BoundReport::compare(double measured, double bound, double tolerance) {
  BoundReport r;
  r.measured = measured;
  r.bound = bound;
  r.slack = bound - measured;
  r.tolerance = tolerance;
  r.passed = r.slack >= -tolerance;
  return r;
}

BoundReport BoundReport::precondition_violation(std::string check, std::string note) {
  BoundReport r;
  r.check = std::move(check);
  r.status = CheckStatus::PreconditionViolation;
  r.note = std::move(note);
  r.measured = std::numeric_limits<double>::quiet_NaN();
  r.bound = std::numeric_limits<double>::quiet_NaN();
  r.slack = std::numeric_limits<double>::quiet_NaN();
  return r;
}

}  // namespace tubevol
