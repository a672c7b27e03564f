#include "lmfrail/poly_roots.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmfrail::poly {

namespace {

constexpr double kTinyRel = 1e-14;

// One-sided Newton polish; keeps the root where the closed form put it
// when the derivative is too small to trust.
void polish(const std::vector<double>& c, const std::vector<double>& dc,
            double& x) {
  for (int k = 0; k < 3; ++k) {
    const double f = eval(c, x);
    const double df = eval(dc, x);
    if (df == 0.0 || !std::isfinite(f) || !std::isfinite(df)) return;
    const double step = f / df;
    if (!std::isfinite(step)) return;
    x -= step;
  }
}

}  // namespace

double eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  if (c.size() <= 1) return d;
  d.resize(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) {
    d[k - 1] = static_cast<double>(k) * c[k];
  }
  return d;
}

std::vector<double> solve_quadratic(double a, double b, double c) {
  const double scale = std::max(std::abs(b), std::abs(c));
  if (std::abs(a) <= kTinyRel * scale || a == 0.0) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  // Avoid cancellation: compute the larger-magnitude root first.
  const double qq = -0.5 * (b + std::copysign(s, b));
  std::vector<double> roots;
  if (qq != 0.0) {
    roots.push_back(qq / a);
    roots.push_back(c / qq);
  } else {
    roots.push_back(0.0);
    roots.push_back(-b / a);
  }
  if (roots[0] > roots[1]) std::swap(roots[0], roots[1]);
  if (roots[0] == roots[1]) roots.pop_back();
  return roots;
}

std::vector<double> solve_cubic(double a, double b, double c, double d) {
  const double scale =
      std::max({std::abs(b), std::abs(c), std::abs(d)});
  // Below this the depressed-cubic shift cancels catastrophically; the
  // escaped root sits near -b/a and the rest solve the quadratic part.
  if (std::abs(a) <= 1e-8 * scale || a == 0.0) {
    auto roots = solve_quadratic(b, c, d);
    if (a != 0.0 && b != 0.0) {
      // The third root escaped to -b/a; recover and polish it.
      double big = -b / a;
      const std::vector<double> cf{d, c, b, a};
      const auto dcf = derivative(cf);
      polish(cf, dcf, big);
      roots.push_back(big);
      std::sort(roots.begin(), roots.end());
    }
    return roots;
  }

  const double bn = b / a, cn = c / a, dn = d / a;
  // Depressed form t^3 + p t + q with x = t - bn / 3.
  const double shift = bn / 3.0;
  const double p = cn - bn * bn / 3.0;
  const double q = 2.0 * bn * bn * bn / 27.0 - bn * cn / 3.0 + dn;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    const double r = -0.5 * q - std::copysign(s, q);
    const double u = std::cbrt(r);
    const double v = (u != 0.0) ? -p / (3.0 * u) : 0.0;
    roots.push_back(u + v - shift);
  } else if (p == 0.0 && q == 0.0) {
    roots.push_back(-shift);
  } else {
    // Three real roots (p < 0 here).
    const double m = 2.0 * std::sqrt(std::max(0.0, -p / 3.0));
    double arg = 3.0 * q / (p * m);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    constexpr double kTwoPiOver3 = 2.0943951023931953;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(m * std::cos(theta - kTwoPiOver3 * k) - shift);
    }
  }

  const std::vector<double> cf{d, c, b, a};
  const auto dcf = derivative(cf);
  for (auto& r : roots) polish(cf, dcf, r);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

std::vector<double> real_roots(std::vector<double> coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0.0) coeffs.pop_back();
  if (coeffs.size() <= 1) return {};
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg == 1) return {-coeffs[0] / coeffs[1]};
  if (deg == 2) return solve_quadratic(coeffs[2], coeffs[1], coeffs[0]);
  if (deg == 3) {
    return solve_cubic(coeffs[3], coeffs[2], coeffs[1], coeffs[0]);
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) {
    companion(i, deg - 1) = -coeffs[i] / coeffs[deg];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);

  const auto dc = derivative(coeffs);
  std::vector<double> roots;
  for (int i = 0; i < deg; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z.real()))) continue;
    double r = z.real();
    polish(coeffs, dc, r);
    roots.push_back(r);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace lmfrail::poly
