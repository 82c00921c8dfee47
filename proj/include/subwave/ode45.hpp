#pragma once

// Embedded Dormand-Prince 5(4) integrator with FSAL, PI-free classic step
// control, and per-step cubic Hermite dense output.  Header-only template
// over the state dimension; both profile and stationary solvers drive it
// through an observer that sees every accepted step (and can stop the run,
// e.g. on a blow-up threshold).
//
// Error control: per-component scale sc_i = atol + rtol*max(|y0_i|,|y1_i|),
// rms norm, accept when err <= 1, step factor 0.9*err^(-1/5) clamped to
// [0.2, 5].  Non-finite trial states are treated as failed steps (halve h);
// if h collapses below ~32 ulps of x a numerical_error is thrown.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>

#include "subwave/errors.hpp"

namespace subwave::ode {

struct Options {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;          // 0 = choose automatically
    double h_max = 0.0;           // 0 = |x1 - x0|
    std::size_t max_steps = 50'000'000;
};

enum class Flow { Continue, Stop };

// One accepted step [x0, x1] together with endpoint derivatives; eval()
// interpolates with the cubic Hermite (O(h^4), well below the 5th-order
// step error at the tolerances used here).
template <std::size_t N>
struct Step {
    double x0 = 0.0, x1 = 0.0;
    std::array<double, N> y0{}, y1{}, f0{}, f1{};

    std::array<double, N> eval(double x) const {
        const double h = x1 - x0;
        const double th = (x - x0) / h;
        const double h00 = (2.0 * th - 3.0) * th * th + 1.0;
        const double h10 = ((th - 2.0) * th + 1.0) * th;
        const double h01 = (3.0 - 2.0 * th) * th * th;
        const double h11 = (th - 1.0) * th * th;
        std::array<double, N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = h00 * y0[i] + h * h10 * f0[i] + h01 * y1[i] + h * h11 * f1[i];
        return y;
    }

    std::array<double, N> eval_derivative(double x) const {
        const double h = x1 - x0;
        const double th = (x - x0) / h;
        const double d00 = 6.0 * th * (th - 1.0) / h;
        const double d10 = (3.0 * th - 4.0) * th + 1.0;
        const double d01 = -6.0 * th * (th - 1.0) / h;
        const double d11 = (3.0 * th - 2.0) * th;
        std::array<double, N> d;
        for (std::size_t i = 0; i < N; ++i)
            d[i] = d00 * y0[i] + d10 * f0[i] + d01 * y1[i] + d11 * f1[i];
        return d;
    }
};

template <std::size_t N>
struct Result {
    double x = 0.0;
    std::array<double, N> y{};
    std::size_t n_steps = 0;   // accepted steps
    bool stopped = false;      // observer requested stop before reaching x1
};

namespace detail {
// Dormand-Prince coefficients (RK5(4)7M).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
} // namespace detail

// Integrates y' = rhs(x, y) from x0 to x1 (either direction).  The observer
// is called once per accepted step; return Flow::Stop to end the run early.
template <std::size_t N, class RHS, class Observer>
Result<N> integrate(RHS&& rhs, double x0, double x1, std::array<double, N> y0,
                    const Options& opt, Observer&& observe) {
    using namespace detail;
    static_assert(N >= 1);

    Result<N> res;
    res.x = x0;
    res.y = y0;
    if (x1 == x0) return res;

    const double dir = (x1 > x0) ? 1.0 : -1.0;
    const double span = std::abs(x1 - x0);
    const double hmax = (opt.h_max > 0.0) ? opt.h_max : span;

    std::array<double, N> f0 = rhs(x0, y0);

    auto scaled_norm = [&](const std::array<double, N>& v,
                           const std::array<double, N>& ya,
                           const std::array<double, N>& yb) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double q = v[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(N));
    };

    // Initial step: balance |y|/|y'| against the span.
    double h;
    if (opt.h_init > 0.0) {
        h = std::min(opt.h_init, hmax);
    } else {
        double ny = 0.0, nf = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            ny = std::max(ny, std::abs(y0[i]));
            nf = std::max(nf, std::abs(f0[i]));
        }
        h = (nf > 0.0) ? 0.01 * (ny + opt.atol) / nf : 1e-3 * span;
        h = std::min(std::max(h, 1e-10 * span), 1e-2 * span);
    }

    double x = x0;
    std::array<double, N> y = y0;
    std::array<double, N> k2, k3, k4, k5, k6, ynew, f_new, yerr;

    for (std::size_t iter = 0; iter < opt.max_steps; ++iter) {
        if (std::abs(h) > hmax) h = hmax;
        if ((x + dir * h - x1) * dir > 0.0) h = std::abs(x1 - x);
        const double hs = dir * h;

        const double ulp = std::abs(x) * std::numeric_limits<double>::epsilon();
        if (!(h > 32.0 * ulp) || !(h > 0.0)) {
            std::ostringstream os;
            os << "ode45: step size collapse at x = " << x << " (h = " << h << ")";
            throw numerical_error(os.str());
        }

        std::array<double, N> yt;
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * a21 * f0[i];
        k2 = rhs(x + c2 * hs, yt);
        for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (a31 * f0[i] + a32 * k2[i]);
        k3 = rhs(x + c3 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(x + c4 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(x + c5 * hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            yt[i] = y[i] + hs * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(x + hs, yt);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hs * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f_new = rhs(x + hs, ynew); // FSAL stage, also the error stage k7
        for (std::size_t i = 0; i < N; ++i)
            yerr[i] = hs * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * f_new[i]);

        bool finite = true;
        for (std::size_t i = 0; i < N; ++i)
            finite = finite && std::isfinite(ynew[i]) && std::isfinite(f_new[i]);
        const double err = finite ? scaled_norm(yerr, y, ynew)
                                  : std::numeric_limits<double>::infinity();

        if (err <= 1.0) {
            Step<N> step;
            step.x0 = x;
            step.x1 = x + hs;
            step.y0 = y;
            step.y1 = ynew;
            step.f0 = f0;
            step.f1 = f_new;

            x += hs;
            y = ynew;
            f0 = f_new;
            res.n_steps++;

            if (observe(step) == Flow::Stop) {
                res.x = x;
                res.y = y;
                res.stopped = true;
                return res;
            }
            if ((x - x1) * dir >= 0.0) {
                res.x = x;
                res.y = y;
                return res;
            }
            const double fac = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
            h = std::abs(hs) * fac;
        } else {
            const double fac = std::isfinite(err)
                                   ? std::max(0.1, 0.9 * std::pow(err, -0.2))
                                   : 0.5;
            h = std::abs(hs) * fac;
        }
    }
    throw numerical_error("ode45: max_steps exceeded");
}

template <std::size_t N, class RHS>
Result<N> integrate(RHS&& rhs, double x0, double x1, std::array<double, N> y0,
                    const Options& opt = {}) {
    return integrate<N>(static_cast<RHS&&>(rhs), x0, x1, y0, opt,
                        [](const Step<N>&) { return Flow::Continue; });
}

} // namespace subwave::ode
