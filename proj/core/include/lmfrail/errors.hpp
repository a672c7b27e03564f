// Error types raised by the estimation pipeline. Statistical
// non-convergence is reported through result flags, not exceptions;
// these types cover structural failures only.
#pragma once

#include <stdexcept>
#include <string>

namespace lmfrail {

// The local mixture factor 1 + sum_j lambda_j A_j became nonpositive at
// a record, i.e. lambda left the feasible region for the observed data.
class BoundaryViolation : public std::runtime_error {
 public:
  BoundaryViolation(int record_index, double factor)
      : std::runtime_error("nonpositive local mixture factor " +
                           std::to_string(factor) + " at record " +
                           std::to_string(record_index)),
        record_index_(record_index) {}
  int record_index() const noexcept { return record_index_; }

 private:
  int record_index_;
};

// double_root was asked for on a point whose quartic minimum is not
// within the boundary tolerance.
class NotOnBoundary : public std::runtime_error {
 public:
  explicit NotOnBoundary(double defect)
      : std::runtime_error("point is not on the feasible-region boundary "
                           "(defect " +
                           std::to_string(defect) + ")") {}
};

// The supporting-plane normal evaluated to (numerically) zero.
class DegenerateNormal : public std::runtime_error {
 public:
  explicit DegenerateNormal(double y_star)
      : std::runtime_error("degenerate supporting-plane normal at y* = " +
                           std::to_string(y_star)) {}
};

// The baseline-increment polynomial had no admissible positive root at
// an event; lambda sits too close to the hard boundary for the data.
class NoAdmissibleRoot : public std::runtime_error {
 public:
  explicit NoAdmissibleRoot(int event_index)
      : std::runtime_error("no admissible positive baseline increment at "
                           "event index " +
                           std::to_string(event_index)),
        event_index_(event_index) {}
  int event_index() const noexcept { return event_index_; }

 private:
  int event_index_;
};

// A 1-D solve could not bracket its root, or an optimizer subproblem
// failed structurally.
class SolveFailure : public std::runtime_error {
 public:
  explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lmfrail
