// Real-root extraction for low-degree polynomials: closed-form
// quadratic/cubic solvers and a companion-matrix fallback for higher
// degree. Coefficients are ascending: c[k] multiplies x^k.
#pragma once

#include <vector>

namespace lmfrail::poly {

double eval(const std::vector<double>& c, double x);
std::vector<double> derivative(const std::vector<double>& c);

// Roots of a x^2 + b x + c, ascending order. Near-zero leading
// coefficients degrade gracefully to the linear case.
std::vector<double> solve_quadratic(double a, double b, double c);

// Roots of a x^3 + b x^2 + c x + d by the depressed-cubic discriminant
// method (trigonometric branch for three real roots), with a fixed
// Newton polish. A relatively tiny leading coefficient is handled by
// solving the quadratic part and appending the large root -b/a.
std::vector<double> solve_cubic(double a, double b, double c, double d);

// All real roots, ascending. Exact leading zeros are stripped; degree
// <= 3 uses the closed forms above, higher degrees a balanced
// companion-matrix eigensolve followed by Newton polishing.
std::vector<double> real_roots(std::vector<double> coeffs);

}  // namespace lmfrail::poly
