#include "subwave/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

#include "subwave/errors.hpp"

namespace subwave {

namespace {

// Odd power |w|^(p-1) w with fast paths for integer and half-integer p-1
// (the hot loop runs ~1e10 node updates on the acceptance fixtures; a
// library pow() there would dominate the runtime).
struct OddPower {
    enum Kind { Int, HalfInt, Generic } kind = Generic;
    int m = 0;    // integer part of p-1
    double q = 0; // p-1

    explicit OddPower(double p) {
        q = p - 1.0;
        const double r = std::round(q);
        if (std::abs(q - r) < 1e-12) {
            kind = Int;
            m = static_cast<int>(r);
        } else if (std::abs(q - (std::floor(q) + 0.5)) < 1e-12) {
            kind = HalfInt;
            m = static_cast<int>(std::floor(q));
        }
    }

    double operator()(double w) const {
        const double t = std::abs(w);
        switch (kind) {
        case Int: {
            double a = 1.0;
            for (int i = 0; i < m; ++i) a *= t;
            return a * w;
        }
        case HalfInt: {
            double a = std::sqrt(t);
            for (int i = 0; i < m; ++i) a *= t;
            return a * w;
        }
        default:
            return (w == 0.0) ? 0.0 : std::pow(t, q) * w;
        }
    }
};

struct StepContext {
    double dr = 0.0, dt = 0.0, lam2 = 0.0, dt2 = 0.0, R0 = 0.0;
    bool forcing = true;
    OuterBoundary outer = OuterBoundary::OutgoingExtrapolation;
    const std::function<double(double)>* boundary_w = nullptr;
    std::vector<double> zeta_inv_rp; // zeta * r_j^{-(p-1)}
    OddPower op;
    double lambda = 1.0;

    StepContext(const WaveConfig& cfg, const Grid1D& grid) : op(cfg.params.p) {
        dr = grid.step();
        dt = cfg.lambda * dr;
        lam2 = cfg.lambda * cfg.lambda;
        dt2 = dt * dt;
        R0 = cfg.R0;
        forcing = cfg.forcing;
        outer = cfg.outer;
        boundary_w = &cfg.boundary_w;
        lambda = cfg.lambda;
        const double pm1 = cfg.params.p - 1.0;
        zeta_inv_rp.assign(grid.size(), 0.0);
        for (std::size_t j = 1; j < grid.size(); ++j)
            zeta_inv_rp[j] = static_cast<double>(cfg.params.zeta) * std::pow(grid[j], -pm1);
    }

    // First forced index at time t: smallest j with r_j > |t| + R0 (strict).
    std::size_t chi_start(double t, std::size_t J) const {
        if (!forcing) return J + 1;
        const double edge = (std::abs(t) + R0) / dr;
        if (edge >= static_cast<double>(J)) return J + 1;
        const std::size_t j = static_cast<std::size_t>(std::floor(edge + 1e-12)) + 1;
        return std::max<std::size_t>(j, 1);
    }
};

// One leapfrog level: wn <- step(wm, wc) at current time t (level of wc).
void step_core(const std::vector<double>& wm, const std::vector<double>& wc,
               std::vector<double>& wn, double t, const StepContext& cx) {
    const std::size_t J = wc.size() - 1;
    const std::size_t jf = std::min(cx.chi_start(t, J), J);
    const double lam2 = cx.lam2, dt2 = cx.dt2;

    wn[0] = 0.0;
    for (std::size_t j = 1; j < jf; ++j)
        wn[j] = 2.0 * wc[j] - wm[j] + lam2 * (wc[j + 1] - 2.0 * wc[j] + wc[j - 1]);
    for (std::size_t j = jf; j < J; ++j) {
        const double w = wc[j];
        wn[j] = 2.0 * w - wm[j] + lam2 * (wc[j + 1] - 2.0 * w + wc[j - 1]) +
                dt2 * cx.zeta_inv_rp[j] * cx.op(w);
    }

    switch (cx.outer) {
    case OuterBoundary::OutgoingExtrapolation:
        // Exact advection at lambda = 1, first-order upwind otherwise.
        wn[J] = (cx.lambda == 1.0) ? wc[J - 1]
                                   : wc[J] - cx.lambda * (wc[J] - wc[J - 1]);
        break;
    case OuterBoundary::DirichletSampler:
        wn[J] = (*cx.boundary_w)(t + cx.dt);
        break;
    }
}

void validate_config(const WaveConfig& cfg) {
    if (!(cfg.R0 > 0.0))
        throw std::invalid_argument("wave: R0 must be positive");
    if (!(cfg.dr > 0.0))
        throw std::invalid_argument("wave: dr must be positive");
    if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0))
        throw std::invalid_argument("wave: lambda must lie in (0, 1]");
    if (!(cfg.r_max > cfg.R0 + 8.0 * cfg.dr))
        throw std::invalid_argument("wave: r_max too small for the truncation radius");
    if (cfg.outer == OuterBoundary::DirichletSampler && !cfg.boundary_w)
        throw std::invalid_argument("wave: DirichletSampler requires boundary_w");
    if (cfg.data_support && cfg.outer == OuterBoundary::OutgoingExtrapolation &&
        cfg.t_max > 0.0) {
        const double need = cfg.R0 + cfg.t_max + *cfg.data_support + 2.0 * cfg.dr;
        if (cfg.r_max < need) {
            std::ostringstream os;
            os << "wave: causal budget violated: r_max = " << cfg.r_max
               << " < R0 + t_max + support + 2 dr = " << need;
            throw std::invalid_argument(os.str());
        }
    }
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x) || std::abs(x) > 1e150) return false;
    return true;
}

} // namespace

WaveState make_initial_state(const std::function<double(double)>& u0,
                             const std::function<double(double)>& u1,
                             const WaveConfig& cfg) {
    validate_config(cfg);
    if (!u0 || !u1)
        throw std::invalid_argument("make_initial_state: u0 and u1 must be callable");

    const std::size_t J = static_cast<std::size_t>(std::llround(cfg.r_max / cfg.dr));
    if (J < 16)
        throw std::invalid_argument("make_initial_state: fewer than 16 cells");
    auto grid = std::make_shared<Grid1D>(
        Grid1D::uniform(0.0, static_cast<double>(J) * cfg.dr, J + 1));

    WaveState st;
    st.t = 0.0;
    st.grid = grid;
    st.R0 = cfg.R0;
    st.lambda = cfg.lambda;
    st.w.assign(J + 1, 0.0);
    st.w_t.assign(J + 1, 0.0);
    st.w_prev.assign(J + 1, 0.0);

    for (std::size_t j = 0; j <= J; ++j) {
        const double r = (*grid)[j];
        const double rc = std::max(r, cfg.R0); // interior clamp
        const double v0 = u0(rc), v1 = u1(rc);
        if (!std::isfinite(v0) || !std::isfinite(v1)) {
            std::ostringstream os;
            os << "make_initial_state: non-finite data sample at r = " << rc;
            throw std::invalid_argument(os.str());
        }
        st.w[j] = r * v0;
        st.w_t[j] = r * v1;
    }

    // Backward Taylor level w(-dt) = w0 - dt w_t + dt^2/2 (w0_rr + F(w0)).
    StepContext cx(cfg, *grid);
    const double dt = cx.dt, dr = cx.dr;
    const std::size_t jf = cx.chi_start(0.0, J);
    std::vector<double> acc(J + 1, 0.0);
    for (std::size_t j = 1; j < J; ++j)
        acc[j] = (st.w[j + 1] - 2.0 * st.w[j] + st.w[j - 1]) / (dr * dr);
    acc[J] = (J >= 2) ? (st.w[J] - 2.0 * st.w[J - 1] + st.w[J - 2]) / (dr * dr) : 0.0;
    for (std::size_t j = jf; j <= J; ++j)
        acc[j] += cx.zeta_inv_rp[j] * cx.op(st.w[j]);
    for (std::size_t j = 1; j <= J; ++j)
        st.w_prev[j] = st.w[j] - dt * st.w_t[j] + 0.5 * dt * dt * acc[j];
    st.w_prev[0] = 0.0;
    return st;
}

WaveState step(const WaveState& state, const WaveConfig& cfg) {
    if (state.w_prev.size() != state.w.size())
        throw std::invalid_argument("step: state lacks the previous level (diagnostic snapshot?)");
    StepContext cx(cfg, *state.grid);
    WaveState next;
    next.t = state.t + cx.dt;
    next.grid = state.grid;
    next.R0 = state.R0;
    next.lambda = state.lambda;
    next.w.assign(state.w.size(), 0.0);
    step_core(state.w_prev, state.w, next.w, state.t, cx);
    next.w_prev = state.w;
    return next;
}

Trajectory evolve(const WaveState& state, double T, std::size_t record_every,
                  const WaveConfig& cfg) {
    validate_config(cfg);
    if (state.w_prev.size() != state.w.size())
        throw std::invalid_argument("evolve: state lacks the previous level");
    if (record_every < 1)
        throw std::invalid_argument("evolve: record_every must be >= 1");

    StepContext cx(cfg, *state.grid);
    const double dt = cx.dt;
    const long long N = std::llround(T / dt);
    if (N < 0 || std::abs(static_cast<double>(N) * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument(
            "evolve: T must be a nonnegative whole number of steps");
    if (cfg.t_max > 0.0 && T > cfg.t_max * (1.0 + 1e-12))
        throw std::invalid_argument("evolve: T exceeds the causal budget t_max");

    const std::size_t J = state.w.size() - 1;

    // Probe bookkeeping: probes ride lattice characteristics, which only
    // exist at lambda = 1 and grid-aligned anchors.
    struct ProbeRun {
        std::size_t j0 = 0;
        long long n0 = 0;
        CharacteristicProbe rec;
    };
    std::vector<ProbeRun> probes;
    if (!cfg.probes.empty()) {
        if (cfg.lambda != 1.0)
            throw std::invalid_argument("evolve: characteristic probes require lambda = 1");
        for (auto [r0, t0] : cfg.probes) {
            ProbeRun pr;
            pr.j0 = static_cast<std::size_t>(std::llround(r0 / cx.dr));
            pr.n0 = std::llround((t0 - state.t) / dt);
            if (std::abs(static_cast<double>(pr.j0) * cx.dr - r0) > 1e-9 ||
                std::abs(state.t + static_cast<double>(pr.n0) * dt - t0) > 1e-9)
                throw std::invalid_argument("evolve: probe anchor not grid-aligned");
            if (pr.j0 < 1 || pr.j0 >= J || pr.n0 < 0 || pr.n0 > N)
                throw std::invalid_argument("evolve: probe anchor outside the run");
            pr.rec.r0 = r0;
            pr.rec.t0 = t0;
            probes.push_back(std::move(pr));
        }
    }

    Trajectory traj;
    traj.config = cfg;
    traj.status = RunStatus::Completed;

    std::vector<double> wm = state.w_prev, wc = state.w, wn(J + 1, 0.0);

    auto push_snapshot = [&](double t_n) {
        WaveState snap;
        snap.t = t_n;
        snap.grid = state.grid;
        snap.R0 = state.R0;
        snap.lambda = state.lambda;
        snap.w = wc;
        snap.w_t.resize(J + 1);
        for (std::size_t j = 0; j <= J; ++j)
            snap.w_t[j] = (wn[j] - wm[j]) / (2.0 * dt);
        traj.times.push_back(t_n);
        traj.snapshots.push_back(std::move(snap));
    };

    const std::size_t check_every = std::max<std::size_t>(cfg.check_finite_every, 1);
    double t_good = state.t;

    // March one level past N so level-N snapshots and probes get centered
    // time derivatives.
    for (long long n = 0; n <= N; ++n) {
        const double t_n = state.t + static_cast<double>(n) * dt;
        step_core(wm, wc, wn, t_n, cx);

        const bool record = (n % static_cast<long long>(record_every) == 0) || n == N;
        if (record || (n % static_cast<long long>(check_every) == 0)) {
            if (!all_finite(wn)) {
                traj.status = RunStatus::BlewUp;
                traj.end_time = t_good;
                for (auto& pr : probes) traj.probes.push_back(std::move(pr.rec));
                return traj;
            }
            t_good = t_n;
        }

        for (auto& pr : probes) {
            if (n < pr.n0) continue;
            const std::size_t j = pr.j0 + static_cast<std::size_t>(n - pr.n0);
            if (j >= J) continue;
            const double r = (*state.grid)[j];
            pr.rec.t.push_back(t_n);
            pr.rec.r.push_back(r);
            pr.rec.u.push_back(wc[j] / r);
            pr.rec.v_plus.push_back((wn[j] - wm[j]) / (2.0 * dt) -
                                    (wc[j + 1] - wc[j - 1]) / (2.0 * cx.dr));
        }

        if (record) push_snapshot(t_n);

        std::swap(wm, wc);
        std::swap(wc, wn);
    }

    traj.end_time = state.t + static_cast<double>(N) * dt;
    for (auto& pr : probes) traj.probes.push_back(std::move(pr.rec));
    return traj;
}

FieldSample self_similar_field(const ProfileSolution& profile, double r, double t) {
    if (!(r > 0.0))
        throw std::domain_error("self_similar_field: r must be positive");
    const double x = t / r;
    const double beta = profile.params.beta;
    const double f = profile.eval_f(x);        // throws beyond the stored range
    const double fp = profile.eval_f_prime(x);
    const double rb = std::pow(r, -beta - 1.0);
    FieldSample s;
    s.u = rb * r * f; // r^(-beta) f
    s.u_t = rb * fp;
    s.u_r = -rb * (beta * f + x * fp);
    return s;
}

std::pair<std::function<double(double)>, std::function<double(double)>>
self_similar_data(const ProfileSolution& profile) {
    const double a = profile.a;
    const double bp1 = profile.params.beta + 1.0;
    return {[](double) { return 0.0; },
            [a, bp1](double r) { return a * std::pow(r, -bp1); }};
}

std::pair<std::function<double(double)>, std::function<double(double)>>
stationary_data(const StationaryProfile& profile, double C) {
    // Capture by value: the profile owns big arrays, share them.
    auto sp = std::make_shared<StationaryProfile>(profile);
    return {[sp, C](double r) { return evaluate_rescaled(*sp, C, r); },
            [](double) { return 0.0; }};
}

std::pair<std::function<double(double)>, std::function<double(double)>>
bump_data(double center, double width, double amplitude) {
    if (!(width > 0.0))
        throw std::invalid_argument("bump_data: width must be positive");
    auto u0 = [center, width, amplitude](double r) {
        const double s = (r - center) / width;
        const double q = 1.0 - s * s;
        return (q > 0.0) ? amplitude * q * q * q * q : 0.0;
    };
    return {u0, [](double) { return 0.0; }};
}

std::function<double(double)> self_similar_boundary(const ProfileSolution& profile,
                                                    double r_max) {
    auto sp = std::make_shared<ProfileSolution>(profile);
    const double beta = profile.params.beta;
    return [sp, r_max, beta](double t) {
        return std::pow(r_max, 1.0 - beta) * sp->eval_f(t / r_max);
    };
}

std::function<double(double)> constant_boundary(double w_value) {
    return [w_value](double) { return w_value; };
}

} // namespace subwave
