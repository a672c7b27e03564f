// Exact geometry of the feasible local-mixture parameter region: the
// two quartics whose nonnegativity on the positive axis defines it, a
// closed-form (no iteration) sign certificate for such quartics,
// membership, the (y, lambda2) parametrization of the curved boundary
// sheet, supporting-plane normals, double-root extraction, and
// segment/boundary intersection. The region is closed and convex.
#pragma once

#include <Eigen/Core>

#include "lmfrail/survival_data.hpp"

namespace lmfrail::region {

// Coefficients of a x^4 + b x^3 + c x^2 + d x + e.
struct QuarticCoeffs {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
};

// Scale-invariant quantities of the quartic sign test (requires a > 0,
// e > 0). beta_scaled is the scaled quadratic coefficient; it is
// unrelated to the regression coefficient vector. L2 is only defined
// for beta_scaled > 2 and is NaN otherwise.
struct ScaledQuarticInvariants {
  double alpha = 0.0;
  double beta_scaled = 0.0;
  double gamma = 0.0;
  double Delta = 0.0;
  double L1 = 0.0;
  double L2 = 0.0;
};

// Quartic that must stay nonnegative for censored records:
// p(y) = lambda4 y^4 - lambda3 y^3 + lambda2 y^2 + 1.
QuarticCoeffs p_coeffs(const LmmParams& lmm);

// Quartic that must stay nonnegative for event records:
// q(y) = lambda4 y^4 - (4 lambda4 + lambda3) y^3
//        + (3 lambda3 + lambda2) y^2 - 2 lambda2 y + 1.
// Nonnegativity of q on (0, inf) implies that of p when lambda4 > 0,
// so membership only tests q.
QuarticCoeffs q_coeffs(const LmmParams& lmm);

ScaledQuarticInvariants scaled_invariants(const QuarticCoeffs& qc);

// Closed-form test: true iff the quartic is nonnegative on (0, inf).
// Requires a > 0 and e > 0 (throws std::domain_error otherwise); the
// degenerate cases are the business of is_member.
bool nonneg_on_positive_axis(const QuarticCoeffs& qc);

// min over y > 0 of q(y; lmm), computed from the critical points of q
// (closed-form roots of the derivative). Degenerate leading
// coefficients reduce the degree; a negative leading coefficient gives
// a large negative sentinel. Positive inside the region, ~0 on the
// boundary, negative outside. Concave in lmm.
double boundary_defect(const LmmParams& lmm);

// Raw and gradient-normalized minima of q over (0, inf). The raw value
// carries the sign used for membership and root bracketing; the
// normalized one (q divided by the norm of its lambda-gradient, a
// distance estimate) identifies the binding constraint, which can sit
// at a large y where raw values are hugely scaled. Argmins are NaN when
// the minimum is only approached at the y -> 0 end.
struct Defect {
  double value = 0.0;
  double y_min = 0.0;
  double norm_value = 0.0;
  double norm_y = 0.0;
};
Defect boundary_defect_with_argmin(const LmmParams& lmm);

// A point is "on the boundary" when the distance-normalized residual
// (below) is at most kBoundaryTol.
inline constexpr double kBoundaryTol = 1e-8;

// Absolute membership slack (a uniform relaxation of the positivity
// constraints); strictly tighter than the boundary window so that
// bisection points on the membership level set still classify as
// boundary points.
inline constexpr double kMembershipSlack = 1e-9;

// |defect| divided by the defect gradient norm at the minimizing y
// (clamped below by 1): an estimate of the distance to the boundary.
// The raw defect is badly scaled where the minimizing y is large, since
// the quartic's lambda-gradient grows like y^4 there.
double boundary_residual(const LmmParams& lmm);

// Membership in the closed feasible region, with kMembershipSlack of
// normalized slack so that floating-point realizations of boundary
// points are members.
bool is_member(const LmmParams& lmm);

// Boundary sheet parametrization: the (lambda2, lambda3, lambda4) with
// the given lambda2 for which q has a double root at y. The defining
// equations also describe infeasible sheets, so outputs carry a
// validity flag (lambda4 > 0 and membership).
struct BoundaryParamResult {
  LmmParams lambda;
  bool valid = false;
};
BoundaryParamResult boundary_param(double y, double lambda2);

// Unit normal of the supporting plane at a boundary point with double
// root y_star, oriented into the feasible side. Direction
// (y*^2 - 2 y*, -y*^3 + 3 y*^2, y*^4 - 4 y*^3) before normalization.
Eigen::Vector3d supporting_plane_normal(double y_star);

// The positive double root of q for a boundary point. Throws
// NotOnBoundary when the defect exceeds kBoundaryTol in magnitude.
// The result satisfies |q(y*)| <= 1e-8 and |q'(y*)| <= 1e-8.
double double_root(const LmmParams& lmm);

// Bisection on the membership predicate along the segment from a member
// to a non-member; the returned member point is within 1e-10 of a
// non-member point on the segment. Convexity gives a unique crossing.
LmmParams segment_boundary_intersection(const LmmParams& inside,
                                        const LmmParams& outside);

// A validated boundary point bundled with its double root and inward
// unit normal.
struct BoundaryPoint {
  LmmParams lambda;
  double y_star = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};
BoundaryPoint make_boundary_point(const LmmParams& lmm);

}  // namespace lmfrail::region
