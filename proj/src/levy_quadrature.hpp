// SPDX-License-Identifier: MIT
// Panelled Gauss-Kronrod integration against the power weight z^(-1-alpha).
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace levy_multiscale::detail {

struct QuadratureSum {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;

    QuadratureSum& operator+=(const QuadratureSum& other) {
        value += other.value;
        error += other.error;
        l1 += other.l1;
        return *this;
    }
};

// Bisection driver around the fixed 31-point Kronrod rule. The rule's own
// adaptive mode reports leaf errors on the reference interval [-1, 1] rather
// than on the leaf, so errors are rescaled here. Splitting stops once the
// error reaches the relative or absolute tolerance or the round-off floor of
// the integrand.
template <class F>
QuadratureSum gauss_kronrod_adaptive(const F& f, double lo, double hi, double rel_tolerance, int depth,
                                     double abs_tolerance = 0.0) {
    using boost::math::quadrature::gauss_kronrod;
    double error = 0.0;
    double l1 = 0.0;
    const double value = gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0, &error, &l1);
    error *= 0.5 * (hi - lo);
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * l1;
    if (depth == 0 || error <= std::max({rel_tolerance * std::abs(value), abs_tolerance, floor})) {
        return {value, error, l1};
    }
    const double mid = 0.5 * (lo + hi);
    QuadratureSum out = gauss_kronrod_adaptive(f, lo, mid, rel_tolerance, depth - 1, 0.5 * abs_tolerance);
    out += gauss_kronrod_adaptive(f, mid, hi, rel_tolerance, depth - 1, 0.5 * abs_tolerance);
    return out;
}

/**
 * int_a^b g(z) z^(-1-alpha) dz for 0 < a < b.
 *
 * The range is cut into geometric panels of ratio at most 2 (so the weight is
 * smooth on each) and further into pieces no longer than max_piece, which
 * keeps oscillatory integrands resolved. Panels run outwards, where the
 * weight decays, so each piece only needs accuracy relative to the mass
 * already accumulated.
 */
template <class G>
QuadratureSum integrate_power_weighted(const G& g, double alpha, double a, double b,
                                       double rel_tolerance, double max_piece) {
    QuadratureSum total;
    const auto weighted = [&](double z) { return g(z) * std::pow(z, -1.0 - alpha); };
    double lo = a;
    while (lo < b) {
        double hi = std::min(b, 2.0 * lo);
        if (b - hi < 1e-12 * b) hi = b;
        const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_piece)));
        const double width = (hi - lo) / pieces;
        for (int k = 0; k < pieces; ++k) {
            const double p0 = lo + k * width;
            const double p1 = (k + 1 == pieces) ? hi : p0 + width;
            total += gauss_kronrod_adaptive(weighted, p0, p1, rel_tolerance, 12, 1e-2 * rel_tolerance * total.l1);
        }
        lo = hi;
    }
    return total;
}

}  // namespace levy_multiscale::detail
