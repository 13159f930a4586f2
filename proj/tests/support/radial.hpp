#pragma once

// Self-contained 1-D integration helpers used as independent oracles in the
// tests. Deliberately not built on the library's quadrature module.

#include <cmath>
#include <functional>

namespace oracle {

/// Adaptive Simpson on [a,b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 0) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth > 28 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, m, tol / 2, depth + 1) + simpson(f, m, b, tol / 2, depth + 1);
}

/// Integral over [0, inf) via the substitution r = t/(1-t).
inline double simpson_halfline(const std::function<double(double)>& f, double tol) {
    return simpson(
        [&](double t) {
            double r = t / (1.0 - t);
            double jac = 1.0 / ((1.0 - t) * (1.0 - t));
            return f(r) * jac;
        },
        0.0, 1.0 - 1e-12, tol);
}

}  // namespace oracle
