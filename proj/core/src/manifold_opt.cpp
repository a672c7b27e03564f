#include "lmfrail/manifold_opt.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <stdexcept>

#include "lmfrail/errors.hpp"
#include "lmfrail/likelihood.hpp"
#include "lmfrail/region.hpp"

// Verbose iteration log for debugging, enabled by LMFRAIL_OPT_TRACE=1.
static bool opt_trace_enabled() {
  static const bool on = std::getenv("LMFRAIL_OPT_TRACE") != nullptr;
  return on;
}
#define OPT_TRACE(...)                          \
  do {                                          \
    if (opt_trace_enabled()) {                  \
      std::fprintf(stderr, __VA_ARGS__);        \
      std::fputc('\n', stderr);                 \
    }                                           \
  } while (0)

namespace lmfrail {

namespace {

using Eigen::Matrix2d;
using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

constexpr double kSlack = 1e-12;
constexpr double kFaceTol = 1e-7;  // lambda4 at which the flat face binds
constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascent acceptance slack, relative to the objective scale: at values
// around 1e4 an absolute 1e-12 is below double resolution and rounding
// jitter would veto genuine Newton steps.
double ascent_floor(double value) {
  return value - kSlack * std::max(1.0, std::abs(value));
}

double safe_value(double v) { return std::isnan(v) ? -kInf : v; }

// Damped Newton ascent direction: solve (mu I - H) s = g with mu chosen
// so the curvatures c_i = -eig_i(H) shifted by mu stay positive and the
// condition number stays below 1e12.
template <int N>
Eigen::Matrix<double, N, 1> newton_ascent_step(
    const Eigen::Matrix<double, N, N>& hess,
    const Eigen::Matrix<double, N, 1>& grad) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(hess);
  Eigen::Matrix<double, N, 1> curv = -es.eigenvalues();
  const double cmax = curv.maxCoeff();
  const double cmin = curv.minCoeff();
  const double need = cmax > 0.0 ? cmax * 1e-12 : 1.0;
  double mu = std::max(0.0, need - cmin);
  if (!(cmax > 0.0)) mu = std::max(mu, 1.0);
  Eigen::Matrix<double, N, 1> s = Eigen::Matrix<double, N, 1>::Zero();
  for (int i = 0; i < N; ++i) {
    const auto v = es.eigenvectors().col(i);
    s += (v.dot(grad) / (curv[i] + mu)) * v;
  }
  return s;
}

// The quartic's lambda-gradient at y (the unnormalized sheet normal),
// its derivative in y, and q'' for the curvature correction.
Vector3d sheet_normal_raw(double y) {
  const double y2 = y * y, y3 = y2 * y;
  return {y2 - 2.0 * y, -y3 + 3.0 * y2, y3 * y - 4.0 * y3};
}

Vector3d sheet_normal_raw_dy(double y) {
  const double y2 = y * y;
  return {2.0 * y - 2.0, -3.0 * y2 + 6.0 * y, 4.0 * y2 * y - 12.0 * y2};
}

double q_second(const LmmParams& lam, double y) {
  const auto qc = region::q_coeffs(lam);
  return (12.0 * qc.a * y + 6.0 * qc.b) * y + 2.0 * qc.c;
}

enum class SupportKind { interior, sheet, face, corner };

// Active constraints at a point reached by a crossing or a retraction.
// The region boundary has one curved sheet (a positive double root of
// the event quartic), the flat face {lambda4 = 0}, and the rim where
// they meet.
struct Support {
  SupportKind kind = SupportKind::interior;
  double y_star = std::numeric_limits<double>::quiet_NaN();
  Vector3d sheet_normal = Vector3d::Zero();  // unit, inward, if active
};

Support classify_support(const LmmParams& lam) {
  Support s;
  bool sheet_active = false;
  try {
    s.y_star = region::double_root(lam);
    s.sheet_normal = region::supporting_plane_normal(s.y_star);
    sheet_active = true;
  } catch (const NotOnBoundary&) {
  }
  const bool face_active = lam.lambda4 <= kFaceTol;
  if (sheet_active && face_active) {
    s.kind = SupportKind::corner;
  } else if (sheet_active) {
    s.kind = SupportKind::sheet;
  } else if (face_active) {
    s.kind = SupportKind::face;
  }
  return s;
}

// Orthonormal basis of the plane orthogonal to the unit normal.
Eigen::Matrix<double, 3, 2> tangent_basis(const Vector3d& normal) {
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(normal[i]) < std::abs(normal[k])) k = i;
  }
  Vector3d u = Vector3d::Unit(k) - normal[k] * normal;
  u.normalize();
  const Vector3d v = normal.cross(u);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = u;
  basis.col(1) = v;
  return basis;
}

// Move along `direction` from `from` to the zero of the boundary
// defect. The defect is concave along any line, so the first sign
// change brackets the crossing.
std::optional<LmmParams> retract_along(const Vector3d& from,
                                       const Vector3d& direction,
                                       double radius) {
  const auto defect_at = [&](double t) {
    return region::boundary_defect(
        LmmParams::from_vec(from + t * direction));
  };
  const double f0 = defect_at(0.0);
  if (std::abs(f0) <= 1e-12) return LmmParams::from_vec(from);
  const double dir = f0 < 0.0 ? 1.0 : -1.0;

  double lo = 0.0;
  double hi = 0.0;
  bool bracketed = false;
  for (double t = 1e-12; t <= radius; t *= 2.0) {
    const double f = defect_at(dir * t);
    if ((f0 < 0.0) == (f < 0.0)) {
      lo = t;
    } else {
      hi = t;
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return std::nullopt;

  double mid = hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = defect_at(dir * mid);
    if (std::abs(f) <= 1e-12) break;
    if ((f0 < 0.0) == (f < 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-16 * (1.0 + hi)) {
      mid = f0 < 0.0 ? hi : lo;  // land on the feasible side
      break;
    }
  }
  return LmmParams::from_vec(from + dir * mid * direction);
}

// Rank-one curvature correction of the tangent Hessian on the curved
// sheet: the second fundamental form of the defect level set times the
// normal component of the gradient.
template <int N>
void add_sheet_curvature(const LmmParams& lam, double y_star,
                         const Vector3d& normal, const Vector3d& gradient,
                         const Eigen::Matrix<double, 3, N>& basis,
                         Eigen::Matrix<double, N, N>& hess) {
  const double q2 = q_second(lam, y_star);
  if (std::abs(q2) <= 1e-12) return;
  const Vector3d v = sheet_normal_raw(y_star);
  const Vector3d vp = sheet_normal_raw_dy(y_star);
  const Eigen::Matrix<double, N, 1> bv = basis.transpose() * vp;
  hess += (gradient.dot(normal) / (v.norm() * q2)) * (bv * bv.transpose());
}

}  // namespace

namespace {

// Best first-order ascent available inside the feasible cone at a
// boundary point, together with the kind of move that achieves it. The
// residual is the maximal directional derivative over feasible unit
// directions, which stays well conditioned even where the tail sheet's
// normal degenerates toward the face normal.
struct ConeMove {
  enum Kind { stay, interior, sheet, face, rim };
  Kind kind = stay;
  double residual = 0.0;
  Vector3d direction = Vector3d::Zero();  // unit, realizes the residual
};

ConeMove analyze_cone(const Support& s, const Vector3d& g) {
  ConeMove out;
  if (s.kind == SupportKind::interior) {
    out.kind = ConeMove::interior;
    out.residual = g.norm();
    return out;
  }
  if (s.kind == SupportKind::sheet) {
    if (g.dot(s.sheet_normal) > 0.0) {
      out.kind = ConeMove::interior;
      out.residual = g.norm();
      out.direction = g.normalized();
    } else {
      out.kind = ConeMove::sheet;
      const Vector3d pg = g - s.sheet_normal * g.dot(s.sheet_normal);
      out.residual = pg.norm();
      if (out.residual > 0.0) out.direction = pg.normalized();
    }
    return out;
  }
  if (s.kind == SupportKind::face) {
    if (g[2] > 0.0) {
      out.kind = ConeMove::interior;
      out.residual = g.norm();
      out.direction = g.normalized();
    } else {
      out.kind = ConeMove::face;
      out.residual = std::hypot(g[0], g[1]);
      if (out.residual > 0.0) {
        out.direction = Vector3d(g[0], g[1], 0.0).normalized();
      }
    }
    return out;
  }

  // Corner: feasible directions d satisfy d . n1 >= 0 and d . e3 >= 0.
  const Vector3d n1 = s.sheet_normal;
  constexpr double kFeas = 1e-9;
  Vector3d t = n1.cross(Vector3d::UnitZ());
  double best = 0.0;
  if (t.norm() >= 1e-14) {
    t.normalize();
    best = std::abs(g.dot(t));  // +/- t are always feasible
    out.kind = ConeMove::rim;
    out.direction = g.dot(t) >= 0.0 ? t : Vector3d(-t);
  }
  const Vector3d p1 = g - n1 * g.dot(n1);
  if (p1.norm() > best && p1[2] >= -kFeas * p1.norm()) {
    best = p1.norm();
    out.kind = ConeMove::sheet;
    out.direction = p1.normalized();
  }
  const Vector3d p2(g[0], g[1], 0.0);
  if (p2.norm() > best && p2.dot(n1) >= -kFeas * p2.norm()) {
    best = p2.norm();
    out.kind = ConeMove::face;
    out.direction = p2.normalized();
  }
  if (g.norm() > best && g.dot(n1) >= -kFeas * g.norm() &&
      g[2] >= -kFeas * g.norm()) {
    best = g.norm();
    out.kind = ConeMove::interior;
    out.direction = g.normalized();
  }
  out.residual = best;
  return out;
}

}  // namespace

double stationarity_residual(const LmmParams& lambda,
                             const Eigen::Vector3d& gradient) {
  return analyze_cone(classify_support(lambda), gradient).residual;
}

LambdaFit maximize(const LambdaObjective& objective,
                   const OptimizerConfig& config) {
  if (!(config.tol_grad > 0.0)) {
    throw std::invalid_argument("tol_grad must be positive");
  }

  LmmParams lam = config.init;
  for (int k = 0; k < 80 && !region::is_member(lam); ++k) {
    lam = LmmParams::from_vec(0.5 * lam.vec());
  }
  if (!region::is_member(lam)) {
    throw std::invalid_argument("optimizer init is not a region member");
  }

  const auto eval = [&](const LmmParams& l) {
    ObjectiveEval e = objective(l);
    e.value = safe_value(e.value);
    return e;
  };

  LambdaFit fit;
  ObjectiveEval ev = eval(lam);
  if (!std::isfinite(ev.value)) {
    throw std::invalid_argument("objective not finite at the initial point");
  }

  bool boundary_phase = false;
  Support support;
  int switches = 0;
  int escapes = 0;

  const auto record = [&]() {
    const double gn = boundary_phase
                          ? stationarity_residual(lam, ev.gradient)
                          : ev.gradient.norm();
    fit.trace.push_back({lam, ev.value, gn, boundary_phase});
  };
  record();

  // Step inward from a boundary point and continue with interior
  // Newton; used when the gradient ascends into the interior.
  const auto resume_interior = [&](const Vector3d& inward) -> bool {
    for (double t = 1e-4 * (1.0 + lam.vec().norm()); t > 1e-18; t *= 0.5) {
      const LmmParams cand = LmmParams::from_vec(lam.vec() + t * inward);
      if (!region::is_member(cand)) continue;
      const ObjectiveEval ec = eval(cand);
      if (ec.value >= ascent_floor(ev.value)) {
        lam = cand;
        ev = ec;
        boundary_phase = false;
        record();
        return true;
      }
    }
    return false;
  };

  // Ray escапe for stalls near the lambda4 ~ 0 cusp: the feasible set
  // is not locally polyhedral there and ascent can require directions
  // whose lambda4 component grows in proportion to the lambda3 one.
  const auto try_ray_escape = [&]() -> bool {
    const Vector3d g = ev.gradient;
    const double in_plane = std::hypot(g[0], g[1]);
    if (g.norm() > 0.0 && resume_interior(g.normalized())) return true;
    for (double bias : {0.01, 0.03, 0.1, 0.3, 1.0}) {
      Vector3d d = g;
      d[2] = std::max(d[2], bias * in_plane);
      if (d.norm() > 0.0 && resume_interior(d.normalized())) return true;
    }
    return false;
  };

  while (true) {
    if (!boundary_phase) {
      if (ev.gradient.norm() < config.tol_grad) {
        fit.converged = true;
        break;
      }
      if (fit.interior_iterations >= config.max_interior_iters) break;
      ++fit.interior_iterations;

      const Vector3d step = newton_ascent_step<3>(ev.hessian, ev.gradient);
      const LmmParams full = LmmParams::from_vec(lam.vec() + step);

      if (!region::is_member(full)) {
        const LmmParams star =
            region::segment_boundary_intersection(lam, full);
        const ObjectiveEval estar = eval(star);
        if (estar.value >= ascent_floor(ev.value)) {
          lam = star;
          ev = estar;
          support = classify_support(lam);
          boundary_phase = support.kind != SupportKind::interior;
          record();
          continue;
        }
        // The in-segment maximum is interior: fall back to a damped
        // interior step along the same direction.
        const double t_cross = (star.vec() - lam.vec()).norm() /
                               std::max(step.norm(), 1e-300);
        double t = 0.5 * t_cross;
        bool ok = false;
        for (int h = 0; h < 30 && !ok; ++h, t *= 0.5) {
          const LmmParams cand = LmmParams::from_vec(lam.vec() + t * step);
          const ObjectiveEval ec = eval(cand);
          if (ec.value >= ascent_floor(ev.value)) {
            lam = cand;
            ev = ec;
            ok = true;
          }
        }
        if (!ok) {
          if (escapes < 40 && ++escapes && try_ray_escape()) continue;
          break;  // no ascent available: stop, not converged
        }
        record();
        continue;
      }

      ObjectiveEval ec = eval(full);
      if (ec.value >= ascent_floor(ev.value)) {
        lam = full;
        ev = ec;
      } else {
        double t = 0.5;
        bool ok = false;
        for (int h = 0; h < 30 && !ok; ++h, t *= 0.5) {
          const LmmParams cand = LmmParams::from_vec(lam.vec() + t * step);
          ec = eval(cand);
          if (ec.value >= ascent_floor(ev.value)) {
            lam = cand;
            ev = ec;
            ok = true;
          }
        }
        if (!ok) {
          if (escapes < 40 && ++escapes && try_ray_escape()) continue;
          break;
        }
      }
      record();
      continue;
    }

    // ---------------- boundary phase ----------------
    if (support.kind == SupportKind::interior) {
      boundary_phase = false;
      continue;
    }
    const ConeMove move = analyze_cone(support, ev.gradient);
    OPT_TRACE("b-iter %d kind=%d move=%d res=%.3e lam=(%.8f,%.8f,%.3e) f=%.9f",
              fit.boundary_iterations, (int)support.kind, (int)move.kind,
              move.residual, lam.lambda2, lam.lambda3, lam.lambda4, ev.value);
    if (move.residual < config.tol_grad) {
      fit.converged = true;
      break;
    }
    if (move.kind == ConeMove::interior) {
      // The gradient ascends into the feasible cone: the maximum is not
      // on this part of the boundary after all.
      if (switches < 5) {
        ++switches;
        Vector3d inward = ev.gradient.normalized();
        if (support.kind == SupportKind::sheet) {
          inward = support.sheet_normal;
        } else if (support.kind == SupportKind::face) {
          inward = Vector3d::UnitZ();
        }
        if (resume_interior(inward)) continue;
      }
      // Could not leave the boundary; fall through to a face/sheet step
      // so progress is still possible.
    }
    if (fit.boundary_iterations >= config.max_boundary_iters) break;
    ++fit.boundary_iterations;

    // Tangent Newton step and retraction for one supporting-set move.
    enum class StepKind { sheet, face, rim };
    LmmParams next;
    ObjectiveEval enext;

    const auto attempt_step = [&](StepKind step_kind) -> bool {
      Vector3d tangent_step = Vector3d::Zero();
      if (step_kind == StepKind::sheet) {
        const Eigen::Matrix<double, 3, 2> basis =
            tangent_basis(support.sheet_normal);
        const Vector2d g2 = basis.transpose() * ev.gradient;
        Matrix2d h2 = basis.transpose() * ev.hessian * basis;
        add_sheet_curvature<2>(lam, support.y_star, support.sheet_normal,
                               ev.gradient, basis, h2);
        tangent_step = basis * newton_ascent_step<2>(h2, g2);
      } else if (step_kind == StepKind::face) {
        Eigen::Matrix<double, 3, 2> basis;
        basis.setZero();
        basis(0, 0) = 1.0;
        basis(1, 1) = 1.0;
        const Vector2d g2 = basis.transpose() * ev.gradient;
        const Matrix2d h2 = basis.transpose() * ev.hessian * basis;
        tangent_step = basis * newton_ascent_step<2>(h2, g2);
      } else {  // walk the rim where the sheet meets the face
        Vector3d t = support.sheet_normal.cross(Vector3d::UnitZ());
        if (t.norm() < 1e-14) return false;
        t.normalize();
        Eigen::Matrix<double, 3, 1> basis = t;
        const Eigen::Matrix<double, 1, 1> g1 =
            basis.transpose() * ev.gradient;
        Eigen::Matrix<double, 1, 1> h1 =
            basis.transpose() * ev.hessian * basis;
        // The rim bends inside the face plane, so its curvature
        // correction uses the in-plane part of the constraint gradient.
        const double y = support.y_star;
        const double q2 = q_second(lam, y);
        if (std::abs(q2) > 1e-12) {
          Vector3d m = sheet_normal_raw(y);
          m[2] = 0.0;
          Vector3d vp = sheet_normal_raw_dy(y);
          vp[2] = 0.0;
          const double mn = m.norm();
          if (mn > 1e-12) {
            const double tv = t.dot(vp);
            h1(0, 0) +=
                ev.gradient.dot(m / mn) / (mn * q2) * (tv * tv);
          }
        }
        tangent_step = basis * newton_ascent_step<1>(h1, g1);
      }
      OPT_TRACE("  step_kind=%d tangent_step=(%.3e,%.3e,%.3e)",
                (int)step_kind, tangent_step[0], tangent_step[1],
                tangent_step[2]);

      bool accepted = false;
      for (double radius = 1.0; radius >= 1e-10 && !accepted;
           radius *= 0.5) {
        Vector3d s = tangent_step;
        if (s.norm() > radius) s *= radius / s.norm();
        bool retraction_failed = false;
        double scale = 1.0;
        for (int h = 0; h < 30 && !accepted; ++h, scale *= 0.5) {
          Vector3d stepped = lam.vec() + scale * s;
          LmmParams cand;
          if (step_kind == StepKind::face) {
            cand = LmmParams::from_vec(stepped);
            if (cand.lambda4 < 0.0) cand.lambda4 = 0.0;
            if (!region::is_member(cand)) {
              cand = region::segment_boundary_intersection(lam, cand);
            }
          } else if (step_kind == StepKind::sheet) {
            auto r = retract_along(stepped, support.sheet_normal, radius);
            if (!r) {
              retraction_failed = true;
              break;
            }
            cand = *r;
            if (cand.lambda4 < 0.0) {
              cand.lambda4 = 0.0;
              if (!region::is_member(cand)) {
                retraction_failed = true;
                break;
              }
            }
          } else {
            // Rim: retract within the face plane along the in-plane
            // part of the sheet normal.
            if (stepped[2] < 0.0) stepped[2] = 0.0;
            Vector3d dir = support.sheet_normal;
            dir[2] = 0.0;
            if (dir.norm() < 1e-14) {
              retraction_failed = true;
              break;
            }
            dir.normalize();
            auto r = retract_along(stepped, dir, radius);
            if (!r) {
              retraction_failed = true;
              break;
            }
            cand = *r;
          }
          const ObjectiveEval ec = eval(cand);
          OPT_TRACE("    r=%.2e h=%d moved=%.3e dv=%+.3e", radius, h,
                    (cand.vec() - lam.vec()).norm(), ec.value - ev.value);
          if (ec.value >= ascent_floor(ev.value) &&
              (cand.vec() - lam.vec()).norm() > 0.0) {
            next = cand;
            enext = ec;
            accepted = true;
          }
        }
        if (!accepted && !retraction_failed) break;  // ascent exhausted
      }
      return accepted;
    };

    StepKind step_kind = StepKind::sheet;
    if (support.kind == SupportKind::face || move.kind == ConeMove::face) {
      step_kind = StepKind::face;
    } else if (support.kind == SupportKind::corner &&
               move.kind != ConeMove::sheet) {
      step_kind = StepKind::rim;
    }

    bool accepted = attempt_step(step_kind);
    if (!accepted && support.kind == SupportKind::corner) {
      // Corners join three walks; when the preferred one is blocked the
      // others can still ascend (the sheet walk in particular climbs
      // the cusp channel, since its retraction lifts lambda4).
      for (StepKind alt : {StepKind::sheet, StepKind::rim, StepKind::face}) {
        if (alt == step_kind) continue;
        accepted = attempt_step(alt);
        if (accepted) break;
      }
    }
    if (!accepted) {
      // No ascent along the chosen tangent move. Try a straight ray
      // along the best feasible-cone direction, then a direction curved
      // into lambda4 > 0 (the feasible set is not locally polyhedral
      // near that edge, so such rays can ascend even when every
      // in-plane move is blocked).
      if (escapes < 40) {
        ++escapes;
        if (move.direction.norm() > 0.5 &&
            resume_interior(move.direction)) {
          continue;
        }
        if (try_ray_escape()) continue;
      }
      break;  // not converged
    }

    lam = next;
    ev = enext;
    support = classify_support(lam);
    if (support.kind == SupportKind::interior) {
      boundary_phase = false;
    }
    record();
  }

  fit.lambda_hat = lam;
  fit.on_boundary = boundary_phase;
  fit.loglik = ev.value;
  return fit;
}

LambdaFit maximize_lambda(const SurvivalDataset& data,
                          const RegressionParams& params,
                          const OptimizerConfig& config) {
  const LikelihoodParts parts = prepare_likelihood(data, params);
  const LambdaObjective obj = [&parts](const LmmParams& l) -> ObjectiveEval {
    ObjectiveEval e;
    try {
      e.value = mixture_loglik(parts, l);
      auto [g, h] = mixture_derivatives(parts, l);
      e.gradient = g;
      e.hessian = h;
    } catch (const BoundaryViolation&) {
      e.value = -kInf;
    }
    return e;
  };
  return maximize(obj, config);
}

}  // namespace lmfrail
