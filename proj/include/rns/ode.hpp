#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

#include <Eigen/Dense>

namespace rns {

struct OdeOptions {
    double rtol = 1e-6;
    double atol = 1e-8;
    double h_initial = 0.0; // 0 selects a starting step automatically
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 1000000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    bool success = false;
    double x_reached = 0.0;
};

enum class StepAction { proceed, stop, state_modified };

/// Dormand-Prince 5(4) with max-norm error control. Integrates from x0 to x1
/// (either direction). `post_step(x, y, dydx)` runs after every accepted step;
/// returning `state_modified` tells the integrator y was altered in place.
template <typename Vector, typename Rhs, typename PostStep>
OdeStats integrate_dp45(Rhs&& rhs, double x0, double x1, Vector& y,
                        const OdeOptions& opt, PostStep&& post_step)
{
    // Butcher tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeStats stats;
    stats.x_reached = x0;
    const double dir = x1 >= x0 ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    if (span == 0.0) {
        stats.success = true;
        return stats;
    }

    auto err_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
        double m = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double sc =
                opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            m = std::max(m, std::abs(err[i]) / sc);
        }
        return m;
    };

    double x = x0;
    Vector k1 = rhs(x, y);
    ++stats.rhs_evaluations;

    double h = opt.h_initial;
    if (!(h > 0.0)) {
        double d0 = 0.0, d1 = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opt.atol + opt.rtol * std::abs(y[i]);
            d0 = std::max(d0, std::abs(y[i]) / sc);
            d1 = std::max(d1, std::abs(k1[i]) / sc);
        }
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * std::max(1.0, span)
                                     : 0.01 * d0 / d1;
        h = std::min(h, 0.1 * span);
    }
    h = std::min(h, opt.h_max);

    Vector k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
    while (stats.accepted + stats.rejected < opt.max_steps) {
        const double remaining = std::abs(x1 - x);
        if (remaining <= 1e-14 * std::max(1.0, std::abs(x1))) {
            stats.success = true;
            stats.x_reached = x1;
            return stats;
        }
        bool last = false;
        if (h >= remaining) {
            h = remaining;
            last = true;
        }
        const double hs = dir * h;

        ytmp = y + hs * (a21 * k1);
        k2 = rhs(x + c2 * hs, ytmp);
        ytmp = y + hs * (a31 * k1 + a32 * k2);
        k3 = rhs(x + c3 * hs, ytmp);
        ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
        k4 = rhs(x + c4 * hs, ytmp);
        ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        k5 = rhs(x + c5 * hs, ytmp);
        ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        k6 = rhs(x + hs, ytmp);
        ynew = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double xnew = last ? x1 : x + hs;
        k7 = rhs(xnew, ynew);
        stats.rhs_evaluations += 6;
        err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = err_norm(err, y, ynew);
        if (!std::isfinite(en))
            en = 1e10;
        if (en <= 1.0) {
            ++stats.accepted;
            x = xnew;
            y.swap(ynew);
            k1.swap(k7);
            stats.x_reached = x;
            const StepAction act = post_step(x, y, k1);
            if (act == StepAction::stop) {
                stats.success = true;
                return stats;
            }
            if (act == StepAction::state_modified) {
                k1 = rhs(x, y);
                ++stats.rhs_evaluations;
            }
            const double fac =
                en == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
            h = std::min(opt.h_max, h * std::max(0.2, fac));
        }
        else {
            ++stats.rejected;
            h *= std::max(0.1, 0.9 * std::pow(en, -0.2));
        }
        if (h < 1e-14 * std::max(1.0, std::abs(x)))
            return stats;
    }
    return stats;
}

template <typename Vector, typename Rhs>
OdeStats integrate_dp45(Rhs&& rhs, double x0, double x1, Vector& y,
                        const OdeOptions& opt)
{
    return integrate_dp45(std::forward<Rhs>(rhs), x0, x1, y, opt,
                          [](double, const Vector&, const Vector&) {
                              return StepAction::proceed;
                          });
}

} // namespace rns
