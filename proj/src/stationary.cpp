#include "subwave/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "subwave/io.hpp"
#include "subwave/ode45.hpp"

namespace subwave {

namespace {

// y = (z, v) with v = dz/ds, s = ln r.
struct StationaryRhs {
    double p;
    double zeta;
    std::array<double, 2> operator()(double s, const std::array<double, 2>& y) const {
        const double z = y[0], v = y[1];
        return {v, v - zeta * signed_pow(z, p) * std::exp((3.0 - p) * s)};
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

// Integrates from (s0, y0) toward s_target (s decreasing); returns true if
// z crosses z_max (or the integrator collapses inside the blow-up zone)
// before s_target is reached.  On a clean finish, out_* receive the state
// at s_target so the caller can continue from there.
bool probe_hits(const StationaryRhs& rhs, const ode::Options& opt, double s0,
                std::array<double, 2> y0, double s_target, double z_max,
                double* out_s = nullptr, std::array<double, 2>* out_y = nullptr) {
    try {
        auto res = ode::integrate<2>(rhs, s0, s_target, y0, opt,
                                     [&](const ode::Step<2>& st) {
                                         return st.y1[0] >= z_max ? ode::Flow::Stop
                                                                  : ode::Flow::Continue;
                                     });
        if (res.stopped) return true;
        if (out_s) *out_s = res.x;
        if (out_y) *out_y = res.y;
        return false;
    } catch (const numerical_error&) {
        // Step collapse at the pole: z left the representable approach to
        // z_max, which certifies the crossing happened above s_target.
        return true;
    }
}

} // namespace

StationaryProfile solve_stationary(int zeta, const ModelParams& mp,
                                   const StationaryConfig& cfg) {
    if (zeta != 1 && zeta != -1)
        throw std::invalid_argument("solve_stationary: zeta must be +1 or -1");
    if (!(cfg.r_inf > cfg.r_min && cfg.r_min > 0.0))
        throw std::invalid_argument("solve_stationary: need 0 < r_min < R_inf");
    if (!(cfg.z_max > 10.0))
        throw std::invalid_argument("solve_stationary: z_max must exceed 10");
    if (!(cfg.r_tol > 0.0 && cfg.r_tol < 1e-2))
        throw std::invalid_argument("solve_stationary: r_tol must lie in (0, 1e-2)");
    if (cfg.nodes_per_decade < 16)
        throw std::invalid_argument("solve_stationary: nodes_per_decade must be >= 16");

    const double p = mp.p;
    StationaryProfile prof;
    prof.params = mp;
    prof.params.zeta = zeta;
    prof.r_inf = cfg.r_inf;

    // Asymptotic seed at R_inf (z in s-variables: v = r z').
    const double zi = static_cast<double>(zeta);
    const double z0 = 1.0 - zi * std::pow(cfg.r_inf, -(p - 3.0)) / ((p - 2.0) * (p - 3.0));
    const double v0 = zi * std::pow(cfg.r_inf, -(p - 3.0)) / (p - 2.0);

    // Output nodes, descending in construction order.
    const double s_inf = std::log(cfg.r_inf);
    const double s_min = std::log(cfg.r_min);
    const double decades = (s_inf - s_min) / std::log(10.0);
    const std::size_t n_nodes =
        static_cast<std::size_t>(std::ceil(decades * static_cast<double>(cfg.nodes_per_decade))) + 1;
    std::vector<double> s_nodes(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
        s_nodes[i] = s_inf + (s_min - s_inf) * static_cast<double>(i) /
                                 static_cast<double>(n_nodes - 1);

    std::vector<double> r_desc, z_desc, zp_desc;
    r_desc.reserve(n_nodes);
    z_desc.reserve(n_nodes);
    zp_desc.reserve(n_nodes);
    r_desc.push_back(cfg.r_inf);
    z_desc.push_back(z0);
    zp_desc.push_back(v0 / cfg.r_inf);

    StationaryRhs rhs{p, zi};
    ode::Options opt;
    opt.rtol = cfg.rtol;
    opt.atol = cfg.atol;

    // Phase 1: descend, harvesting dense output; stop once z exceeds a
    // comfortably reachable sentinel (defocusing only ever stops this way).
    const double z_stop = std::min(cfg.z_max, 1e6);
    std::size_t cursor = 1;
    auto observer = [&](const ode::Step<2>& st) {
        while (cursor < n_nodes && s_nodes[cursor] >= st.x1) {
            const double s = s_nodes[cursor];
            const auto y = st.eval(s);
            const double r = std::exp(s);
            r_desc.push_back(r);
            z_desc.push_back(y[0]);
            zp_desc.push_back(y[1] / r);
            ++cursor;
        }
        return st.y1[0] >= z_stop ? ode::Flow::Stop : ode::Flow::Continue;
    };
    auto res = ode::integrate<2>(rhs, s_inf, s_min, {z0, v0}, opt, observer);

    if (zeta == 1 && res.stopped)
        throw numerical_error(
            "solve_stationary: focusing branch crossed z_max - wrong sign wiring?");
    if (zeta == -1 && !res.stopped)
        throw numerical_error(
            "solve_stationary: defocusing branch reached r_min without blow-up "
            "(raise z_max / check wiring)");

    if (zeta == -1) {
        // Drop harvested nodes in the steep zone beyond the stop state.
        while (!r_desc.empty() && z_desc.back() >= z_stop) {
            r_desc.pop_back();
            z_desc.pop_back();
            zp_desc.pop_back();
        }

        // Phase 2: push from the stop state toward the threshold z = z_max,
        // keeping the last accepted state; either the threshold is crossed
        // inside a step (bracket = that step) or the stepper collapses at
        // the pole (bracket = a r_tol-wide collar above the collapse point).
        double s_hi = res.x;
        std::array<double, 2> y_hi = res.y;
        double r_lo = 0.0, r_hi = 0.0;
        bool have_bracket = false;

        for (int attempt = 0; attempt < 64 && !have_bracket; ++attempt) {
            double s_cross_lo = 0.0, s_cross_hi = 0.0;
            std::array<double, 2> y_last = y_hi;
            double s_last = s_hi;
            bool crossed = false;
            bool reached_min = false;
            try {
                auto r2 = ode::integrate<2>(rhs, s_hi, s_min, y_hi, opt,
                                            [&](const ode::Step<2>& st) {
                                                if (st.y1[0] >= cfg.z_max) {
                                                    s_cross_lo = st.x1;
                                                    s_cross_hi = st.x0;
                                                    crossed = true;
                                                    return ode::Flow::Stop;
                                                }
                                                s_last = st.x1;
                                                y_last = st.y1;
                                                return ode::Flow::Continue;
                                            });
                reached_min = !crossed && !r2.stopped;
            } catch (const numerical_error&) {
                // Collapse at the pole before z reached z_max.
            }
            if (reached_min)
                throw numerical_error(
                    "solve_stationary: defocusing branch reached r_min without "
                    "blow-up (raise z_max / check wiring)");
            if (crossed) {
                r_lo = std::exp(s_cross_lo);
                r_hi = std::exp(s_cross_hi);
                have_bracket = true;
            } else {
                // The threshold radius lies between the pole and the last
                // accepted state; take a collar of the requested width and
                // certify its lower edge by a probe.
                r_hi = std::exp(s_last);
                r_lo = r_hi * (1.0 - 0.5 * cfg.r_tol);
                double s_through = 0.0;
                std::array<double, 2> y_through{};
                if (probe_hits(rhs, opt, s_last, y_last, std::log(r_lo), cfg.z_max,
                               &s_through, &y_through)) {
                    have_bracket = true;
                } else {
                    // Probe got through: not actually at the pole yet; resume
                    // from the probe endpoint.
                    s_hi = s_through;
                    y_hi = y_through;
                }
            }
        }
        if (!have_bracket)
            throw numerical_error("solve_stationary: failed to bracket the blow-up radius");

        // Narrow a wide crossing step by probe bisection from the hi edge.
        double s_state = s_hi;
        std::array<double, 2> y_state = y_hi;
        if (r_hi < std::exp(s_hi)) {
            // State must sit at the hi edge for the bisection probes; rebuild
            // it by a clean probe run when the crossing step provided it.
            probe_hits(rhs, opt, s_hi, y_hi, std::log(r_hi), cfg.z_max, &s_state, &y_state);
        }
        while (r_hi - r_lo > cfg.r_tol * r_lo) {
            const double r_mid = 0.5 * (r_lo + r_hi);
            double s_new = 0.0;
            std::array<double, 2> y_new{};
            if (probe_hits(rhs, opt, s_state, y_state, std::log(r_mid), cfg.z_max,
                           &s_new, &y_new)) {
                r_lo = r_mid;
            } else {
                r_hi = r_mid;
                s_state = s_new;
                y_state = y_new;
            }
        }
        prof.R_minus = BlowupBracket{r_lo, r_hi};
    }

    std::reverse(r_desc.begin(), r_desc.end());
    std::reverse(z_desc.begin(), z_desc.end());
    std::reverse(zp_desc.begin(), zp_desc.end());
    prof.r_nodes = Grid1D::from_nodes(std::move(r_desc), GridSpacing::Logarithmic);
    prof.z = std::move(z_desc);
    prof.z_prime = std::move(zp_desc);
    return prof;
}

namespace {

std::size_t bracket_node(const StationaryProfile& prof, double r) {
    const auto& g = prof.r_nodes;
    if (!(r >= g.front() && r <= g.back() * (1.0 + 1e-12))) {
        std::ostringstream os;
        os << "stationary interpolation: r = " << r << " outside stored range ["
           << g.front() << ", " << g.back() << "]";
        throw std::domain_error(os.str());
    }
    return g.locate(std::min(r, g.back()));
}

} // namespace

double StationaryProfile::eval_z(double r) const {
    const std::size_t i = bracket_node(*this, r);
    return hermite(std::min(r, r_nodes.back()), r_nodes[i], r_nodes[i + 1],
                   z[i], z[i + 1], z_prime[i], z_prime[i + 1]);
}

double StationaryProfile::eval_z_prime(double r) const {
    const std::size_t i = bracket_node(*this, r);
    // z'' from the ODE at the stored endpoints gives a Hermite for z'.
    const double p = params.p;
    const double zi = static_cast<double>(params.zeta);
    auto zpp = [&](std::size_t j) {
        return -zi * signed_pow(z[j], p) * std::pow(r_nodes[j], -(p - 1.0));
    };
    return hermite(std::min(r, r_nodes.back()), r_nodes[i], r_nodes[i + 1],
                   z_prime[i], z_prime[i + 1], zpp(i), zpp(i + 1));
}

double StationaryProfile::eval_U(double r) const {
    if (!(r > 0.0))
        throw std::domain_error("eval_U: r must be positive");
    if (r > r_nodes.back()) return 1.0 / r; // z -> 1 asymptote
    return eval_z(r) / r;
}

std::vector<LadderCoefficients> ladder(int k_max, const ModelParams& mp) {
    if (k_max < 0 || k_max > 12)
        throw std::invalid_argument("ladder: k_max must lie in [0, 12]");
    const double p = mp.p;
    std::vector<LadderCoefficients> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    double beta = 0.0, log_c = 0.0;
    for (int k = 0; k <= k_max; ++k) {
        LadderCoefficients lc;
        lc.k = k;
        lc.beta_k = beta;
        lc.log_c_k = log_c;
        if (log_c < std::log(std::numeric_limits<double>::max()))
            lc.c_k = std::exp(log_c);
        out.push_back(lc);
        log_c = p * log_c + std::log(p * beta + p - 3.0) + std::log(p * beta + p - 2.0);
        beta = p * beta + (p - 3.0);
    }
    return out;
}

std::vector<double> check_ladder_bounds(const StationaryProfile& profile, int k_max) {
    if (profile.params.zeta != -1)
        throw std::invalid_argument(
            "check_ladder_bounds: bounds are proved for the defocusing branch only");
    const auto lad = ladder(k_max, profile.params);
    std::vector<double> margins(lad.size(), std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < profile.r_nodes.size(); ++j) {
        const double r = profile.r_nodes[j];
        if (r >= 1.0) break; // nodes are increasing; bound checked on r < 1
        const double lr = std::log(r);
        for (std::size_t k = 0; k < lad.size(); ++k) {
            // r^(-beta_k)/c_k evaluated in logs to dodge c_k overflow.
            const double log_bound = -lad[k].beta_k * lr - lad[k].log_c_k;
            const double bound = (log_bound < 700.0) ? std::exp(log_bound)
                                                     : std::numeric_limits<double>::infinity();
            margins[k] = std::min(margins[k], (profile.z[j] - bound) / profile.z[j]);
        }
    }
    return margins;
}

double evaluate_rescaled(const StationaryProfile& profile, double C, double x) {
    if (!(x > 0.0))
        throw std::domain_error("evaluate_rescaled: x must be positive");
    if (C == 0.0) return 0.0;
    const double p = profile.params.p;
    const double rho = std::pow(std::abs(C), (p - 1.0) / (p - 3.0));
    const double amp = std::pow(std::abs(C), -2.0 / (p - 3.0));
    const double y = x / rho;
    if (profile.R_minus && y <= profile.R_minus->hi) {
        std::ostringstream os;
        os << "evaluate_rescaled: x = " << x
           << " is at or inside the rescaled blow-up radius "
           << rho * profile.R_minus->hi;
        throw std::domain_error(os.str());
    }
    const double U = profile.eval_U(y);
    return (C > 0.0 ? 1.0 : -1.0) * amp * U;
}

void write_stationary_csv(const StationaryProfile& profile, const std::filesystem::path& path) {
    io::CsvWriter csv(path, {"r", "z", "z_prime", "U"});
    for (std::size_t i = 0; i < profile.r_nodes.size(); ++i)
        csv.row({profile.r_nodes[i], profile.z[i], profile.z_prime[i],
                 profile.z[i] / profile.r_nodes[i]});
}

void write_stationary_json(const StationaryProfile& profile, const std::filesystem::path& path) {
    nlohmann::json j;
    j["p"] = profile.params.p;
    j["zeta"] = profile.params.zeta;
    j["R_inf"] = profile.r_inf;
    if (profile.R_minus) {
        j["R_minus_lo"] = profile.R_minus->lo;
        j["R_minus_hi"] = profile.R_minus->hi;
    } else {
        j["R_minus_lo"] = nullptr;
        j["R_minus_hi"] = nullptr;
    }
    io::write_json(j, path);
}

} // namespace subwave
