#include "lmfrail/region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lmfrail/errors.hpp"
#include "lmfrail/poly_roots.hpp"

namespace lmfrail::region {

namespace {

constexpr double kNegSentinel = -1e300;

double clamp_value(double v) {
  if (std::isnan(v)) return kNegSentinel;
  return std::clamp(v, -1e300, 1e300);
}

std::vector<double> q_ascending(const LmmParams& m) {
  return {1.0, -2.0 * m.lambda2, m.lambda2 + 3.0 * m.lambda3,
          -(m.lambda3 + 4.0 * m.lambda4), m.lambda4};
}

double q_at(const LmmParams& m, double y) {
  return ((((m.lambda4 * y - (m.lambda3 + 4.0 * m.lambda4)) * y +
            (m.lambda2 + 3.0 * m.lambda3)) *
               y -
           2.0 * m.lambda2) *
              y +
          1.0);
}

double q_prime_at(const LmmParams& m, double y) {
  return (((4.0 * m.lambda4 * y - 3.0 * (m.lambda3 + 4.0 * m.lambda4)) * y +
           2.0 * (m.lambda2 + 3.0 * m.lambda3)) *
              y -
          2.0 * m.lambda2);
}

double q_second_at(const LmmParams& m, double y) {
  return (12.0 * m.lambda4 * y - 6.0 * (m.lambda3 + 4.0 * m.lambda4)) * y +
         2.0 * (m.lambda2 + 3.0 * m.lambda3);
}

}  // namespace

QuarticCoeffs p_coeffs(const LmmParams& lmm) {
  return {lmm.lambda4, -lmm.lambda3, lmm.lambda2, 0.0, 1.0};
}

QuarticCoeffs q_coeffs(const LmmParams& lmm) {
  return {lmm.lambda4, -(4.0 * lmm.lambda4 + lmm.lambda3),
          3.0 * lmm.lambda3 + lmm.lambda2, -2.0 * lmm.lambda2, 1.0};
}

ScaledQuarticInvariants scaled_invariants(const QuarticCoeffs& qc) {
  if (!(qc.a > 0.0) || !(qc.e > 0.0)) {
    throw std::domain_error(
        "scaled quartic invariants need a > 0 and e > 0");
  }
  ScaledQuarticInvariants inv;
  const double a4 = std::pow(qc.a, 0.25);
  const double e4 = std::pow(qc.e, 0.25);
  inv.alpha = qc.b / (a4 * a4 * a4 * e4);
  inv.beta_scaled = qc.c / (a4 * a4 * e4 * e4);
  inv.gamma = qc.d / (a4 * e4 * e4 * e4);

  const double t = inv.beta_scaled * inv.beta_scaled -
                   3.0 * inv.alpha * inv.gamma + 12.0;
  const double s = 72.0 * inv.beta_scaled +
                   9.0 * inv.alpha * inv.beta_scaled * inv.gamma -
                   2.0 * inv.beta_scaled * inv.beta_scaled * inv.beta_scaled -
                   27.0 * inv.alpha * inv.alpha -
                   27.0 * inv.gamma * inv.gamma;
  inv.Delta = 4.0 * t * t * t - s * s;

  const double diff = inv.alpha - inv.gamma;
  inv.L1 = diff * diff -
           16.0 * (inv.alpha + inv.beta_scaled + inv.gamma + 2.0);
  if (inv.beta_scaled > 2.0) {
    const double rb = std::sqrt(inv.beta_scaled - 2.0);
    inv.L2 = diff * diff - 4.0 * (inv.beta_scaled + 2.0) / rb *
                               (inv.alpha + inv.gamma + 4.0 * rb);
  } else {
    inv.L2 = std::numeric_limits<double>::quiet_NaN();
  }
  return inv;
}

bool nonneg_on_positive_axis(const QuarticCoeffs& qc) {
  const ScaledQuarticInvariants v = scaled_invariants(qc);
  const bool interior_ok = v.Delta <= 0.0 && v.alpha + v.gamma > 0.0;
  if (v.beta_scaled < -2.0) {
    return interior_ok;
  }
  if (v.beta_scaled <= 6.0) {
    return interior_ok || (v.Delta >= 0.0 && v.L1 <= 0.0);
  }
  // beta_scaled > 6: L2 is well defined here (beta_scaled > 2).
  return interior_ok || (v.alpha > 0.0 && v.gamma > 0.0) ||
         (v.Delta >= 0.0 && v.L2 <= 0.0);
}

namespace {

// Norm of the quartic's lambda-gradient at y; the conversion factor
// between q values and distances in lambda.
double gradient_scale_at(double y) {
  if (!(y > 0.0) || !std::isfinite(y)) return 1.0;
  const double y2 = y * y;
  const double y3 = y2 * y;
  const Eigen::Vector3d v(y2 - 2.0 * y, -y3 + 3.0 * y2, y3 * y - 4.0 * y3);
  return std::max(1.0, v.norm());
}

}  // namespace

Defect boundary_defect_with_argmin(const LmmParams& lmm) {
  std::vector<double> c = q_ascending(lmm);
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();

  Defect out;
  out.y_min = std::numeric_limits<double>::quiet_NaN();
  out.norm_y = std::numeric_limits<double>::quiet_NaN();
  if (c.size() == 1) {  // q is identically 1
    out.value = 1.0;
    out.norm_value = 1.0;
    return out;
  }
  if (c.back() < 0.0) {  // q -> -inf as y -> inf
    out.value = kNegSentinel;
    out.norm_value = kNegSentinel;
    return out;
  }
  if (c.size() == 2) {  // increasing linear part, minimum approached at 0
    out.value = 1.0;
    out.norm_value = 1.0;
    return out;
  }

  // Positive leading coefficient: the infimum over (0, inf) is either
  // q(0+) = 1 or a positive critical point.
  const auto dc = poly::derivative(c);
  std::vector<double> crit;
  if (dc.size() == 4) {
    crit = poly::solve_cubic(dc[3], dc[2], dc[1], dc[0]);
  } else if (dc.size() == 3) {
    crit = poly::solve_quadratic(dc[2], dc[1], dc[0]);
  } else {
    crit = {-dc[0] / dc[1]};
  }

  out.value = 1.0;
  out.norm_value = 1.0;
  for (double y : crit) {
    if (!(y > 0.0) || !std::isfinite(y)) continue;
    const double v = clamp_value(poly::eval(c, y));
    if (v < out.value) {
      out.value = v;
      out.y_min = y;
    }
    const double nv = v / gradient_scale_at(y);
    if (nv < out.norm_value) {
      out.norm_value = nv;
      out.norm_y = y;
    }
  }
  return out;
}

double boundary_defect(const LmmParams& lmm) {
  return boundary_defect_with_argmin(lmm).value;
}

double boundary_residual(const LmmParams& lmm) {
  return std::abs(boundary_defect_with_argmin(lmm).norm_value);
}

bool is_member(const LmmParams& lmm) {
  if (!std::isfinite(lmm.lambda2) || !std::isfinite(lmm.lambda3) ||
      !std::isfinite(lmm.lambda4)) {
    return false;
  }
  if (lmm.lambda4 < 0.0) return false;
  if (lmm.lambda4 > 0.0 && nonneg_on_positive_axis(q_coeffs(lmm))) {
    return true;
  }
  // Degenerate leading coefficient, or a point within floating-point
  // noise of the boundary: decide from the reduced polynomial minimum.
  // The slack is absolute: a uniform -1e-9 relaxation of the positivity
  // constraints.
  return boundary_defect(lmm) >= -kMembershipSlack;
}

BoundaryParamResult boundary_param(double y, double lambda2) {
  if (!(y > 0.0) || !std::isfinite(y) || !std::isfinite(lambda2)) {
    throw std::domain_error("boundary_param needs y > 0 and finite lambda2");
  }
  // y^2 - 6y + 12 has no real roots, so the denominators never vanish.
  const double den = (y - 6.0) * y + 12.0;
  const double y2 = y * y;
  const double y3 = y2 * y;
  BoundaryParamResult out;
  out.lambda.lambda2 = lambda2;
  out.lambda.lambda3 =
      (2.0 * (y3 - 5.0 * y2 + 8.0 * y) * lambda2 + 4.0 * y - 12.0) /
      (y2 * den);
  out.lambda.lambda4 =
      ((y3 - 4.0 * y2 + 6.0 * y) * lambda2 + 3.0 * y - 6.0) / (y3 * den);
  out.valid = out.lambda.lambda4 > 0.0 && is_member(out.lambda);
  return out;
}

Eigen::Vector3d supporting_plane_normal(double y_star) {
  if (!(y_star > 0.0) || !std::isfinite(y_star)) {
    throw std::domain_error("supporting_plane_normal needs y* > 0");
  }
  const double y2 = y_star * y_star;
  const double y3 = y2 * y_star;
  const double y4 = y3 * y_star;
  Eigen::Vector3d n(y2 - 2.0 * y_star, -y3 + 3.0 * y2, y4 - 4.0 * y3);
  const double len = n.norm();
  if (!(len > 1e-14 * (1.0 + y4))) {
    throw DegenerateNormal(y_star);
  }
  return n / len;
}

double double_root(const LmmParams& lmm) {
  const Defect d = boundary_defect_with_argmin(lmm);
  if (!(std::abs(d.norm_value) <= kBoundaryTol) || !(d.norm_y > 0.0)) {
    throw NotOnBoundary(d.norm_value);
  }
  // Refine the critical point; at a double root q'' > 0.
  double y = d.norm_y;
  for (int k = 0; k < 3; ++k) {
    const double d1 = q_prime_at(lmm, y);
    const double d2 = q_second_at(lmm, y);
    if (d2 == 0.0) break;
    const double step = d1 / d2;
    if (!std::isfinite(step)) break;
    y -= step;
    if (!(y > 0.0)) {
      y = d.norm_y;
      break;
    }
  }
  const double scale = gradient_scale_at(y);
  if (std::abs(q_at(lmm, y)) > kBoundaryTol * scale ||
      std::abs(q_prime_at(lmm, y)) > kBoundaryTol * scale) {
    throw NotOnBoundary(d.norm_value);
  }
  return y;
}

LmmParams segment_boundary_intersection(const LmmParams& inside,
                                        const LmmParams& outside) {
  if (!is_member(inside)) {
    throw std::domain_error("segment intersection: 'inside' is not a member");
  }
  if (is_member(outside)) {
    throw std::domain_error("segment intersection: 'outside' is a member");
  }
  const Eigen::Vector3d a = inside.vec();
  const Eigen::Vector3d b = outside.vec();
  const double len = (b - a).norm();
  double lo = 0.0, hi = 1.0;
  while ((hi - lo) * len > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const LmmParams m = LmmParams::from_vec(a + mid * (b - a));
    if (is_member(m)) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-17) break;
  }
  return LmmParams::from_vec(a + lo * (b - a));
}

BoundaryPoint make_boundary_point(const LmmParams& lmm) {
  BoundaryPoint bp;
  bp.lambda = lmm;
  bp.y_star = double_root(lmm);
  bp.normal = supporting_plane_normal(bp.y_star);
  return bp;
}

}  // namespace lmfrail::region
