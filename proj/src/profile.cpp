#include "subwave/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "subwave/io.hpp"
#include "subwave/ode45.hpp"

namespace subwave {

namespace {

// RHS of the first-order system y = (f, f').
struct ProfileRhs {
    double p, beta, gamma;
    std::array<double, 2> operator()(double x, const std::array<double, 2>& y) const {
        const double f = y[0], fp = y[1];
        const double fpp =
            (2.0 * beta * x * fp - gamma * f - signed_pow(f, p)) / (1.0 - x * x);
        return {fp, fpp};
    }
};

double hermite(double x, double xa, double xb, double ya, double yb, double da, double db) {
    const double h = xb - xa;
    const double th = (x - xa) / h;
    const double h00 = (2.0 * th - 3.0) * th * th + 1.0;
    const double h10 = ((th - 2.0) * th + 1.0) * th;
    const double h01 = (3.0 - 2.0 * th) * th * th;
    const double h11 = (th - 1.0) * th * th;
    return h00 * ya + h * h10 * da + h01 * yb + h * h11 * db;
}

} // namespace

ProfileSolution solve_profile(double a, const ModelParams& mp,
                              const ProfileSolverConfig& cfg) {
    if (!std::isfinite(a))
        throw std::invalid_argument("solve_profile: a must be finite");
    if (!(cfg.delta > 0.0 && cfg.delta <= 1e-2))
        throw std::invalid_argument("solve_profile: delta must lie in (0, 1e-2]");
    if (cfg.max_nodes < 16)
        throw std::invalid_argument("solve_profile: max_nodes must be >= 16");
    if (!(cfg.rtol > 0.0 && cfg.atol > 0.0))
        throw std::invalid_argument("solve_profile: tolerances must be positive");

    ProfileSolution sol;
    sol.a = a;
    sol.params = mp;
    sol.delta = cfg.delta;
    sol.bound_constant = 2.0 / std::sqrt(3.0 * mp.gamma) +
                         std::pow(0.5, 1.0 - mp.beta) / (1.0 - mp.beta);

    // Output nodes x_k = 1 - delta^(k/(n-1)): geometric in 1-x, so the
    // boundary layer at x = 1 is resolved down to the integration endpoint.
    const std::size_t n = cfg.max_nodes;
    std::vector<double> xs(n);
    const double ldelta = std::log(cfg.delta);
    for (std::size_t k = 0; k < n; ++k)
        xs[k] = 1.0 - std::exp(ldelta * static_cast<double>(k) / static_cast<double>(n - 1));
    xs.front() = 0.0;
    xs.back() = 1.0 - cfg.delta;

    sol.f.assign(n, 0.0);
    sol.f_prime.assign(n, 0.0);
    sol.f[0] = 0.0;
    sol.f_prime[0] = a;

    ProfileRhs rhs{mp.p, mp.beta, mp.gamma};
    ode::Options opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;

    std::size_t cursor = 1; // next output node waiting to be filled
    auto observer = [&](const ode::Step<2>& st) {
        while (cursor < n && xs[cursor] <= st.x1) {
            const auto y = st.eval(xs[cursor]);
            sol.f[cursor] = y[0];
            sol.f_prime[cursor] = y[1];
            ++cursor;
        }
        return ode::Flow::Continue;
    };

    const double x_end = 1.0 - cfg.delta;
    auto res = ode::integrate<2>(rhs, 0.0, x_end, {0.0, a}, opt, observer);

    // Pin the endpoint node to the integrator's final state.
    sol.f[n - 1] = res.y[0];
    sol.f_prime[n - 1] = res.y[1];
    if (cursor < n - 1) {
        // Cannot happen for a monotone node set, but fail loudly if it does.
        throw numerical_error("solve_profile: dense output incomplete");
    }
    sol.x_nodes = Grid1D::from_nodes(std::move(xs), GridSpacing::Logarithmic);

    sol.f1 = sol.f[n - 1];
    const double xe = sol.x_nodes[n - 1];
    const double om = 1.0 - xe * xe;
    sol.G = std::pow(om, mp.beta) *
            (sol.f_prime[n - 1] - potential_prime(mp, sol.f1) / (2.0 * mp.beta));
    sol.n_extrema = count_extrema(sol);
    return sol;
}

namespace {

struct NodeBracket {
    std::size_t idx = 0; // interpolate on [x_idx, x_idx+1]
    double sign = 1.0;   // odd extension: f(x) = sign * f(|x|)
    double xq = 0.0;     // query point mapped to [0, 1-delta]
};

NodeBracket bracket(const ProfileSolution& sol, double x) {
    NodeBracket b;
    b.sign = (x < 0.0) ? -1.0 : 1.0;
    b.xq = std::abs(x);
    const double x_end = sol.x_nodes.back();
    if (b.xq > x_end * (1.0 + 1e-12) && b.xq > x_end + 1e-15) {
        std::ostringstream os;
        os << "profile interpolation: |x| = " << b.xq << " beyond stored range "
           << x_end;
        throw std::domain_error(os.str());
    }
    b.xq = std::min(b.xq, x_end);
    // Invert the node law x_k = 1 - delta^(k/(n-1)).
    const std::size_t n = sol.x_nodes.size();
    const double u = std::max(1.0 - b.xq, sol.delta);
    double kf = std::log(u) / std::log(sol.delta) * static_cast<double>(n - 1);
    std::size_t k = static_cast<std::size_t>(std::max(0.0, std::floor(kf)));
    if (k >= n - 1) k = n - 2;
    // Guard against rounding at cell edges.
    while (k > 0 && sol.x_nodes[k] > b.xq) --k;
    while (k + 2 < n && sol.x_nodes[k + 1] < b.xq) ++k;
    b.idx = k;
    return b;
}

double f_second_at(const ProfileSolution& sol, double x, double f, double fp) {
    const ModelParams& mp = sol.params;
    return (2.0 * mp.beta * x * fp - mp.gamma * f - signed_pow(f, mp.p)) /
           (1.0 - x * x);
}

} // namespace

double ProfileSolution::eval_f(double x) const {
    const auto b = bracket(*this, x);
    const std::size_t i = b.idx;
    const double v = hermite(b.xq, x_nodes[i], x_nodes[i + 1], f[i], f[i + 1],
                             f_prime[i], f_prime[i + 1]);
    return b.sign * v;
}

double ProfileSolution::eval_f_prime(double x) const {
    const auto b = bracket(*this, x);
    const std::size_t i = b.idx;
    const double d0 = f_second_at(*this, x_nodes[i], f[i], f_prime[i]);
    const double d1 = f_second_at(*this, x_nodes[i + 1], f[i + 1], f_prime[i + 1]);
    return hermite(b.xq, x_nodes[i], x_nodes[i + 1], f_prime[i], f_prime[i + 1], d0, d1);
}

double ProfileSolution::eval_f_second(double x) const {
    const double xa = std::abs(x);
    const double v = f_second_at(*this, xa, eval_f(xa), eval_f_prime(xa));
    return (x < 0.0) ? -v : v;
}

ConservationReport conservation_report(const ProfileSolution& sol) {
    const ModelParams& mp = sol.params;
    const double half_a2 = 0.5 * sol.a * sol.a;
    ConservationReport rep;
    rep.min_lower_margin = std::numeric_limits<double>::infinity();

    double q_prev = 0.0;
    for (std::size_t i = 0; i < sol.x_nodes.size(); ++i) {
        const double x = sol.x_nodes[i];
        const double om = 1.0 - x * x;
        const double fp2 = sol.f_prime[i] * sol.f_prime[i];
        const double P = potential(mp, sol.f[i]);
        const double q = 0.5 * std::pow(om, 2.0 * mp.beta) * fp2 +
                         std::pow(om, 2.0 * mp.beta - 1.0) * P;
        if (i > 0)
            rep.max_upper_violation = std::max(rep.max_upper_violation, q - q_prev);
        q_prev = q;
        rep.min_lower_margin =
            std::min(rep.min_lower_margin, 0.5 * om * fp2 + P - half_a2);
    }
    return rep;
}

int count_extrema(const ProfileSolution& sol) {
    int count = 0;
    const std::size_t n = sol.x_nodes.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double pa = sol.f_prime[i];
        double pb = sol.f_prime[i + 1];
        if (!(pa != 0.0 && pb != 0.0 && ((pa > 0.0) != (pb > 0.0)))) continue;

        // Refine on the Hermite interpolant of f' to confirm an isolated,
        // bracketed zero inside the open cell.
        double xa = sol.x_nodes[i], xb = sol.x_nodes[i + 1];
        const double da = f_second_at(sol, xa, sol.f[i], pa);
        const double db = f_second_at(sol, xb, sol.f[i + 1], pb);
        const double XA = xa, XB = xb, PA = pa, PB = pb;
        auto fp_at = [&](double x) { return hermite(x, XA, XB, PA, PB, da, db); };
        for (int it = 0; it < 60 && (xb - xa) > 1e-15 * (1.0 + xb); ++it) {
            const double xm = 0.5 * (xa + xb);
            const double pm = fp_at(xm);
            if (pm == 0.0) break;
            if ((pm > 0.0) == (pa > 0.0)) {
                xa = xm;
                pa = pm;
            } else {
                xb = xm;
                pb = pm;
            }
        }
        ++count;
    }
    return count;
}

std::vector<BoundedProfileRoot> find_bounded_profiles(const ModelParams& mp,
                                                      double a_lo, double a_hi,
                                                      std::size_t n_scan,
                                                      const ShootingConfig& cfg) {
    if (!(a_lo < a_hi))
        throw std::invalid_argument("find_bounded_profiles: need a_lo < a_hi");
    if (n_scan < 2)
        throw std::invalid_argument("find_bounded_profiles: need n_scan >= 2");

    auto G_of = [&](double a) { return solve_profile(a, mp, cfg.solver).G; };

    std::vector<BoundedProfileRoot> roots;
    double a_prev = a_lo;
    double g_prev = G_of(a_prev);
    for (std::size_t i = 1; i < n_scan; ++i) {
        const double a = a_lo + (a_hi - a_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_scan - 1);
        const double g = G_of(a);
        if (g_prev != 0.0 && g != 0.0 && ((g_prev > 0.0) != (g > 0.0))) {
            double lo = a_prev, hi = a, glo = g_prev;
            for (int it = 0; it < cfg.max_bisect; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (hi - lo <= cfg.a_tol * std::max(1.0, std::abs(mid))) break;
                const double gm = G_of(mid);
                if (gm == 0.0) {
                    lo = hi = mid;
                    break;
                }
                if ((gm > 0.0) == (glo > 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double a_root = 0.5 * (lo + hi);
            const double g_root = std::abs(G_of(a_root));
            const double tol = cfg.g_tol_base *
                               (1.0 + std::pow(std::abs(a_root), mp.p));
            if (g_root < tol) roots.push_back({a_root, g_root});
        }
        a_prev = a;
        g_prev = g;
    }
    return roots;
}

void write_profile_csv(const ProfileSolution& sol, const std::filesystem::path& path) {
    io::CsvWriter csv(path, {"x", "f", "f_prime"});
    for (std::size_t i = 0; i < sol.x_nodes.size(); ++i)
        csv.row({sol.x_nodes[i], sol.f[i], sol.f_prime[i]});
}

void write_profile_json(const ProfileSolution& sol, const std::filesystem::path& path) {
    nlohmann::json j;
    j["a"] = sol.a;
    j["p"] = sol.params.p;
    j["beta"] = sol.params.beta;
    j["gamma"] = sol.params.gamma;
    j["s_p"] = sol.params.s_p;
    j["c_p"] = sol.params.c_p;
    j["delta"] = sol.delta;
    j["G"] = sol.G;
    j["f1"] = sol.f1;
    j["n_extrema"] = sol.n_extrema;
    j["bound_constant"] = sol.bound_constant;
    j["n_nodes"] = sol.x_nodes.size();
    io::write_json(j, path);
}

} // namespace subwave
