// Brute-force reference computations shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <vector>

#include "polariton/bistability.hpp"

namespace oracle {

/// Roots in u = g n of u((u - D)^2 + gamma^2/4) = target by a dense scan for
/// sign changes on [0, u_max], each refined by bisection.
inline std::vector<double> cubic_roots_scan(double delta, double gamma, double target, double u_max,
                                            std::size_t n_scan = 200000) {
    auto f = [&](double u) {
        const double d = u - delta;
        return u * (d * d + 0.25 * gamma * gamma) - target;
    };
    std::vector<double> out;
    double a = 0.0;
    double fa = f(a);
    if (fa == 0.0) out.push_back(0.0);
    for (std::size_t i = 1; i <= n_scan; ++i) {
        const double b = u_max * static_cast<double>(i) / static_cast<double>(n_scan);
        const double fb = f(b);
        if (fb == 0.0) {
            out.push_back(b);
        } else if ((fa < 0.0) != (fb < 0.0) && fa != 0.0) {
            double lo = a, hi = b, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    return out;
}

/// Local extrema of |F|^2(n) located on a dense density grid and refined by
/// golden-section search: returns {F at the local max, F at the local min}.
inline std::vector<double> intensity_extrema(double delta, const polariton::CavityParams& p, double n_max,
                                             std::size_t n_scan = 200000) {
    auto F2 = [&](double n) { return polariton::pump_intensity(n, delta, p); };
    std::vector<double> out;
    const double h = n_max / static_cast<double>(n_scan);
    for (std::size_t i = 1; i + 1 < n_scan; ++i) {
        const double a = F2(h * (i - 1)), b = F2(h * i), c = F2(h * (i + 1));
        const bool is_max = b > a && b >= c;
        const bool is_min = b < a && b <= c;
        if (!is_max && !is_min) continue;
        double lo = h * (i - 1), hi = h * (i + 1);
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 200; ++it) {
            const double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
            const bool left = is_max ? F2(x1) > F2(x2) : F2(x1) < F2(x2);
            if (left) hi = x2;
            else lo = x1;
        }
        out.push_back(std::sqrt(F2(0.5 * (lo + hi))));
    }
    return out;
}

}  // namespace oracle
