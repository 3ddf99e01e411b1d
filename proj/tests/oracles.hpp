#pragma once

// Independent oracles for the test suite. Everything here is deliberately
// written from scratch (brute force, quadrature, ODE shooting) and must stay
// independent of the library code paths it checks.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "monofield/grid.hpp"

namespace oracle {

struct WindowViolation {
    int i0, j0, i1, j1;
    bool is_max;
};

// Brute-force scan of every axis-aligned window of masked nodes: interior
// extremum vs window-boundary extremum. O(n^6); keep the grids small.
inline std::optional<WindowViolation> naive_window_scan(const monofield::ScalarField& u,
                                                        double tol, bool strict) {
    const monofield::DomainGrid& g = u.grid();
    for (int j0 = 0; j0 < g.ny(); ++j0)
        for (int j1 = j0 + 2; j1 < g.ny(); ++j1)
            for (int i0 = 0; i0 < g.nx(); ++i0)
                for (int i1 = i0 + 2; i1 < g.nx(); ++i1) {
                    bool ok = true;
                    double bmax = -1e300, bmin = 1e300, imax = -1e300, imin = 1e300;
                    for (int j = j0; j <= j1 && ok; ++j)
                        for (int i = i0; i <= i1; ++i) {
                            if (!g.node_in(i, j)) {
                                ok = false;
                                break;
                            }
                            const double v = u.at(i, j);
                            if (i > i0 && i < i1 && j > j0 && j < j1) {
                                imax = std::max(imax, v);
                                imin = std::min(imin, v);
                            } else {
                                bmax = std::max(bmax, v);
                                bmin = std::min(bmin, v);
                            }
                        }
                    if (!ok) continue;
                    if (!strict) {
                        if (imax > bmax + tol) return WindowViolation{i0, j0, i1, j1, true};
                        if (imin < bmin - tol) return WindowViolation{i0, j0, i1, j1, false};
                    } else {
                        if (imax >= std::max(imax, bmax) - tol)
                            return WindowViolation{i0, j0, i1, j1, true};
                        if (imin <= std::min(imin, bmin) + tol)
                            return WindowViolation{i0, j0, i1, j1, false};
                    }
                }
    return std::nullopt;
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int k = 1; k < n; ++k) sum += f(a + k * h) * (k % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

inline double simpson2d(const std::function<double(double, double)>& f, double ax, double bx,
                        double ay, double by, int n) {
    return simpson([&](double y) { return simpson([&](double x) { return f(x, y); }, ax, bx, n); },
                   ay, by, n);
}

// Arclength of one branch of x^2 - y^2 = t (t > 0) clipped to [-1,1]^2,
// parametrized by y: x = sqrt(t + y^2), |y| <= sqrt(1 - t).
inline double saddle_branch_arclength(double t) {
    const double ymax = std::sqrt(1.0 - t);
    return simpson(
        [&](double y) {
            const double x = std::sqrt(t + y * y);
            const double dxdy = y / x;
            return std::sqrt(1.0 + dxdy * dxdy);
        },
        -ymax, ymax, 4000);
}

// Radial p-harmonic profile on the annulus r_in <= r <= r_out with values
// u(r_in) = 0, u(r_out) = 1, by shooting on u'(r) = C r^(-1/(p-1)) with RK4
// and bisection on C.
struct RadialShooting {
    double p, r_in, r_out;

    double integrate(double C, double r) const {
        const int n = 4000;
        const double dr = (r - r_in) / n;
        double u = 0.0, x = r_in;
        auto f = [&](double rr) { return C * std::pow(rr, -1.0 / (p - 1.0)); };
        for (int k = 0; k < n; ++k) {
            const double k1 = f(x);
            const double k2 = f(x + 0.5 * dr);
            const double k3 = f(x + 0.5 * dr);
            const double k4 = f(x + dr);
            u += dr / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            x += dr;
        }
        return u;
    }

    double solve_constant() const {
        double lo = 0.0, hi = 10.0;
        while (integrate(hi, r_out) < 1.0) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (integrate(mid, r_out) < 1.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    // profile u(r) with the shot constant
    std::function<double(double)> profile() const {
        const double C = solve_constant();
        const RadialShooting self = *this;
        return [C, self](double r) { return self.integrate(C, r); };
    }
};

}  // namespace oracle
