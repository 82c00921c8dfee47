#include "subwave/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "subwave/io.hpp"
#include "subwave/params.hpp"

namespace subwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_snapshot(const WaveState& snap, bool need_w_t) {
    if (!snap.grid || snap.grid->size() < 8)
        throw std::invalid_argument("channel: snapshot grid missing or too small");
    if (snap.w.size() != snap.grid->size())
        throw std::invalid_argument("channel: snapshot w/grid size mismatch");
    if (need_w_t && snap.w_t.size() != snap.w.size())
        throw std::invalid_argument("channel: snapshot lacks a filled w_t level");
}

// First node index with r_j > cut (strict).
std::size_t first_above(const Grid1D& grid, double cut) {
    const auto& r = grid.nodes();
    return static_cast<std::size_t>(
        std::upper_bound(r.begin(), r.end(), cut) - r.begin());
}

// Endpoint-corrected composite trapezoid over node indices [j0, j1]:
// trapz - h^2/12 (g'(b) - g'(a)) with one-sided 2nd-order end slopes.
// Fourth-order accurate for smooth integrands on uniform grids.
double corrected_trapezoid(const std::vector<double>& r,
                           const std::vector<double>& g, std::size_t j0,
                           std::size_t j1) {
    const double h = r[1] - r[0];
    double acc = 0.0;
    for (std::size_t j = j0; j < j1; ++j) acc += g[j] + g[j + 1];
    acc *= 0.5 * h;
    if (j1 - j0 >= 2) {
        const double ga = (-3.0 * g[j0] + 4.0 * g[j0 + 1] - g[j0 + 2]) / (2.0 * h);
        const double gb = (3.0 * g[j1] - 4.0 * g[j1 - 1] + g[j1 - 2]) / (2.0 * h);
        acc -= h * h / 12.0 * (gb - ga);
    }
    return acc;
}

// Power-law tail of int_{r_max}^inf g dr, fitted on the last decade of the
// grid.  Returns 0 when the integrand is not a cleanly positive, integrable
// power law there (no tail model is better than a wrong one).
double power_law_tail(const Grid1D& grid, const std::vector<double>& g) {
    const double r_max = grid.back();
    const double r_lo = r_max / 10.0;
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (grid[j] < r_lo || grid[j] <= 0.0) continue;
        if (!(g[j] > 0.0)) return 0.0;
        xs.push_back(grid[j]);
        ys.push_back(g[j]);
    }
    if (xs.size() < 8) return 0.0;
    PowerLawFit fit{};
    try {
        fit = fit_power_law(xs, ys);
    } catch (const std::invalid_argument&) {
        return 0.0;
    }
    if (!(fit.exponent < -1.05)) return 0.0;
    return -fit.amplitude * std::pow(r_max, fit.exponent + 1.0) /
           (fit.exponent + 1.0);
}

// Linear interpolation of nodal values at r in [front, back].
double lerp_at(const Grid1D& grid, const std::vector<double>& v, double r) {
    const std::size_t j = std::min(grid.locate(r), grid.size() - 2);
    const double th = (r - grid[j]) / (grid[j + 1] - grid[j]);
    return (1.0 - th) * v[j] + th * v[j + 1];
}

// Integral over [R, r_max] of a nodal integrand: partial first cell by
// linear interpolation plus corrected trapezoid on the full cells.
double window_integral(const Grid1D& grid, const std::vector<double>& g,
                       double R) {
    const std::size_t J = grid.size() - 1;
    std::size_t j0 = first_above(grid, R);
    if (j0 + 2 > J) {
        std::ostringstream os;
        os << "channel: integration window [" << R << ", " << grid.back()
           << "] holds fewer than 3 nodes";
        throw std::invalid_argument(os.str());
    }
    double acc = corrected_trapezoid(grid.nodes(), g, j0, J);
    const double gap = grid[j0] - R;
    if (gap > 1e-12 * grid.step())
        acc += 0.5 * gap * (lerp_at(grid, g, R) + g[j0]);
    return acc;
}

struct NodalFields {
    std::vector<double> u;    // w/r, 0 at r = 0 (never used there)
    std::vector<double> w_r;  // 4th-order differenced
    std::vector<double> grad; // u_r^2 r^2 = (w_r - u)^2
};

NodalFields nodal_fields(const WaveState& snap) {
    const Grid1D& grid = *snap.grid;
    NodalFields nf;
    nf.w_r = radial_derivative(grid, snap.w);
    nf.u.assign(grid.size(), 0.0);
    nf.grad.assign(grid.size(), 0.0);
    for (std::size_t j = 1; j < grid.size(); ++j) {
        nf.u[j] = snap.w[j] / grid[j];
        const double d = nf.w_r[j] - nf.u[j];
        nf.grad[j] = d * d;
    }
    // r -> 0: u(0) = w_r(0) by l'Hopital; the gradient integrand vanishes.
    nf.u[0] = nf.w_r[0];
    return nf;
}

} // namespace

std::vector<double> radial_derivative(const Grid1D& grid,
                                      const std::vector<double>& v) {
    const std::size_t n = grid.size();
    if (grid.spacing() != GridSpacing::Uniform)
        throw std::invalid_argument("radial_derivative: uniform grid required");
    if (n < 5 || v.size() != n)
        throw std::invalid_argument("radial_derivative: need >= 5 matching nodes");
    const double s = 1.0 / (12.0 * grid.step());
    std::vector<double> d(n);
    d[0] = s * (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]);
    d[1] = s * (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]);
    for (std::size_t j = 2; j + 2 < n; ++j)
        d[j] = s * (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]);
    d[n - 2] = -s * (-3.0 * v[n - 1] - 10.0 * v[n - 2] + 18.0 * v[n - 3] -
                     6.0 * v[n - 4] + v[n - 5]);
    d[n - 1] = -s * (-25.0 * v[n - 1] + 48.0 * v[n - 2] - 36.0 * v[n - 3] +
                     16.0 * v[n - 4] - 3.0 * v[n - 5]);
    return d;
}

double exterior_energy(const WaveState& snap, double R) {
    require_snapshot(snap, true);
    const Grid1D& grid = *snap.grid;
    const double cut = std::abs(snap.t) + R;
    if (!(cut < grid.back()))
        throw std::invalid_argument("exterior_energy: |t| + R reaches past r_max");
    const std::size_t j0 = first_above(grid, cut);
    if (grid.size() - j0 < 2)
        throw std::invalid_argument("exterior_energy: window holds fewer than 2 nodes");
    const std::vector<double> w_r = radial_derivative(grid, snap.w);
    std::vector<double> g(grid.size() - j0);
    for (std::size_t j = j0; j < grid.size(); ++j)
        g[j - j0] = w_r[j] * w_r[j] + snap.w_t[j] * snap.w_t[j];
    return integrate_grid(g, std::span<const double>(grid.nodes()).subspan(j0));
}

double energy_identity_residual(const WaveState& snap, double R) {
    require_snapshot(snap, false);
    const Grid1D& grid = *snap.grid;
    if (!(R > 0.0) || !(R < grid.back()))
        throw std::invalid_argument("energy_identity_residual: need 0 < R < r_max");
    NodalFields nf = nodal_fields(snap);
    std::vector<double> w_r2(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) w_r2[j] = nf.w_r[j] * nf.w_r[j];

    const double lhs = window_integral(grid, w_r2, R);
    const double rhs_int = window_integral(grid, nf.grad, R);
    const double u_R = lerp_at(grid, snap.w, R) / R;
    const double u_max = snap.w.back() / grid.back();
    return std::abs(lhs - rhs_int - grid.back() * u_max * u_max + R * u_R * u_R);
}

Projection projection_onto_generator(const WaveState& snap, double R) {
    require_snapshot(snap, true);
    const Grid1D& grid = *snap.grid;
    if (!(R > 0.0) || !(R < grid.back()))
        throw std::invalid_argument("projection_onto_generator: need 0 < R < r_max");
    NodalFields nf = nodal_fields(snap);
    std::vector<double> g(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
        g[j] = nf.grad[j] + snap.w_t[j] * snap.w_t[j];

    Projection proj;
    proj.lambda = lerp_at(grid, snap.w, R); // R u(R) = w(R)
    const double norm2 = window_integral(grid, g, R) + power_law_tail(grid, g);
    if (norm2 > 0.0)
        proj.cos_angle = proj.lambda / (std::sqrt(R) * std::sqrt(norm2));
    return proj;
}

double pointwise_bound_check(const WaveState& snap) {
    require_snapshot(snap, false);
    const Grid1D& grid = *snap.grid;
    const std::size_t J = grid.size() - 1;
    NodalFields nf = nodal_fields(snap);
    const double h = grid.step();

    double suffix = power_law_tail(grid, nf.grad);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t j = J; j >= 1; --j) {
        if (j < J) suffix += 0.5 * h * (nf.grad[j] + nf.grad[j + 1]);
        const double bound = std::sqrt(std::max(suffix, 0.0) / grid[j]);
        worst = std::min(worst, bound - std::abs(nf.u[j]));
    }
    return worst;
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::NonradiativeConsistent: return "nonradiative-consistent";
    case Verdict::Radiating: return "radiating";
    default: return "inconclusive";
    }
}

namespace {

// Least squares of (r u)(r) = sum_m c_m y^m, y = r^{3-p}, on the top decade
// of the snapshot; returns the coefficients in the y/y_max-scaled basis
// back-transformed, so c[0] is the large-r constant C of u ~ C/r.
std::array<double, 4> fit_flat_expansion(const Grid1D& grid,
                                         const std::vector<double>& w,
                                         double p) {
    std::vector<double> ys, bs;
    const double r_lo = grid.back() / 10.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        if (grid[j] < r_lo) continue;
        ys.push_back(std::pow(grid[j], 3.0 - p));
        bs.push_back(w[j]);
    }
    if (ys.size() < 8)
        throw std::invalid_argument("decay_report: too few nodes in the top decade");
    const double y_scale = *std::max_element(ys.begin(), ys.end());

    double ata[4][4] = {};
    double atb[4] = {};
    for (std::size_t i = 0; i < ys.size(); ++i) {
        double phi[4];
        phi[0] = 1.0;
        for (int m = 1; m < 4; ++m) phi[m] = phi[m - 1] * (ys[i] / y_scale);
        for (int a = 0; a < 4; ++a) {
            atb[a] += phi[a] * bs[i];
            for (int b = 0; b < 4; ++b) ata[a][b] += phi[a] * phi[b];
        }
    }
    // Gaussian elimination with partial pivoting on the 4x4 system.
    int perm[4] = {0, 1, 2, 3};
    for (int c = 0; c < 4; ++c) {
        int piv = c;
        for (int rr = c + 1; rr < 4; ++rr)
            if (std::abs(ata[perm[rr]][c]) > std::abs(ata[perm[piv]][c])) piv = rr;
        std::swap(perm[c], perm[piv]);
        const double d = ata[perm[c]][c];
        if (d == 0.0)
            throw std::invalid_argument("decay_report: singular C-fit system");
        for (int rr = c + 1; rr < 4; ++rr) {
            const double f = ata[perm[rr]][c] / d;
            for (int cc = c; cc < 4; ++cc) ata[perm[rr]][cc] -= f * ata[perm[c]][cc];
            atb[perm[rr]] -= f * atb[perm[c]];
        }
    }
    std::array<double, 4> coeff{};
    for (int c = 3; c >= 0; --c) {
        double s = atb[perm[c]];
        for (int cc = c + 1; cc < 4; ++cc) s -= ata[perm[c]][cc] * coeff[cc];
        coeff[c] = s / ata[perm[c]][c];
    }
    for (int m = 1; m < 4; ++m) coeff[m] /= std::pow(y_scale, m);
    return coeff;
}

// Power-law exponent of positive samples, NaN when fewer than `min_pts`
// usable points remain.
double safe_exponent_fit(const std::vector<double>& xs,
                         const std::vector<double>& ys, std::size_t min_pts) {
    std::vector<double> fx, fy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i] > 0.0 && ys[i] > 0.0) {
            fx.push_back(xs[i]);
            fy.push_back(ys[i]);
        }
    }
    if (fx.size() < min_pts) return kNaN;
    try {
        return fit_power_law(fx, fy).exponent;
    } catch (const std::invalid_argument&) {
        return kNaN;
    }
}

} // namespace

ChannelReport decay_report(const Trajectory& traj, double R,
                           const DecayOptions& opt) {
    if (traj.snapshots.size() < 4)
        throw std::invalid_argument("decay_report: need at least 4 snapshots");
    if (!(R > 0.0))
        throw std::invalid_argument("decay_report: R must be positive");

    ChannelReport rep;
    rep.R = R;
    const Grid1D& grid = *traj.snapshots.front().grid;
    const double r_max = grid.back();

    for (const WaveState& snap : traj.snapshots) {
        rep.times.push_back(snap.t);
        rep.E_ext.push_back(exterior_energy(snap, R));
        const Projection pr =
            projection_onto_generator(snap, std::abs(snap.t) + R);
        rep.lambda_proj.push_back(pr.lambda);
        rep.cos_angle.push_back(pr.cos_angle.value_or(kNaN));

        // Spatial decay of |u| well outside the light cone.
        std::vector<double> xs, ys;
        const double lo = std::max(2.0 * std::abs(snap.t), opt.r_prime);
        for (std::size_t j = 1; j < grid.size(); ++j) {
            if (grid[j] < lo || grid[j] > r_max / 2.0) continue;
            xs.push_back(grid[j]);
            ys.push_back(std::abs(snap.w[j]) / grid[j]);
        }
        rep.spatial_exponent.push_back(safe_exponent_fit(xs, ys, 8));
    }

    // Large-r structure of the first snapshot: u ~ C/r + O(r^{2-p}).
    const WaveState& first = traj.snapshots.front();
    const auto coeff = fit_flat_expansion(grid, first.w, traj.config.params.p);
    rep.C_fit = coeff[0];
    {
        std::vector<double> xs, ys;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            if (grid[j] < r_max / 10.0) continue;
            xs.push_back(grid[j]);
            ys.push_back(std::abs(first.w[j] - rep.C_fit) / grid[j]);
        }
        rep.C_residual_exponent = safe_exponent_fit(xs, ys, 8);
    }

    // Time decay of the exterior energy on the fit window.
    const double t_end = rep.times.back();
    const double fit_lo = opt.fit_t_min >= 0.0 ? opt.fit_t_min : t_end / 2.0;
    const double fit_hi = opt.fit_t_max >= 0.0 ? opt.fit_t_max : t_end;
    std::vector<double> ft, fE;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        if (rep.times[i] <= 0.0 || rep.times[i] < fit_lo || rep.times[i] > fit_hi)
            continue;
        if (!(rep.E_ext[i] > 0.0)) continue;
        ft.push_back(rep.times[i]);
        fE.push_back(rep.E_ext[i]);
    }
    const double E_peak = *std::max_element(rep.E_ext.begin(), rep.E_ext.end());
    bool fit_ok = false;
    if (ft.size() >= 3) {
        try {
            rep.decay_fit = fit_power_law(ft, fE);
            fit_ok = true;
        } catch (const std::invalid_argument&) {
        }
    }

    bool nonincreasing = true;
    for (std::size_t i = 0; i + 1 < rep.E_ext.size(); ++i)
        if (rep.E_ext[i + 1] > rep.E_ext[i] + 1e-6 * E_peak + 1e-14)
            nonincreasing = false;

    const double p = traj.config.params.p;
    const double target = -(5.0 - p) / (p - 1.0) + 0.1;
    if (E_peak == 0.0 ||
        (fit_ok && nonincreasing && rep.decay_fit.exponent <= target))
        rep.verdict = Verdict::NonradiativeConsistent;
    else if (fit_ok && rep.decay_fit.exponent > -0.1 &&
             rep.E_ext.back() >= 0.25 * E_peak)
        rep.verdict = Verdict::Radiating;
    else
        rep.verdict = Verdict::Inconclusive;
    return rep;
}

double characteristic_residual(const Trajectory& traj, double r0, double t0,
                               double T) {
    const CharacteristicProbe* probe = nullptr;
    for (const auto& pr : traj.probes)
        if (std::abs(pr.r0 - r0) <= 1e-9 && std::abs(pr.t0 - t0) <= 1e-9)
            probe = &pr;
    if (!probe)
        throw std::invalid_argument(
            "characteristic_residual: no probe recorded at this anchor; "
            "list it in WaveConfig::probes before the run");
    if (probe->t.size() < 2)
        throw std::invalid_argument("characteristic_residual: probe too short");
    if (!(T > t0))
        throw std::invalid_argument("characteristic_residual: need T > t0");

    const double dt = probe->t[1] - probe->t[0];
    const auto iT = static_cast<std::size_t>(std::llround((T - t0) / dt));
    if (iT >= probe->t.size() || std::abs(probe->t[iT] - T) > 1e-9)
        throw std::invalid_argument(
            "characteristic_residual: the characteristic exits the grid "
            "before T (or T is not sample-aligned)");

    // The identity matches the equation the run actually solved: with the
    // forcing switched off the field is a free wave and v_plus is exactly
    // transported, so the quadrature term drops out.  With forcing on, the
    // anchor must lie outside the light cone so chi = 1 holds along the
    // whole characteristic r - t = r0 - t0.
    const double p = traj.config.params.p;
    const double zeta = traj.config.forcing ? traj.config.params.zeta : 0.0;
    if (traj.config.forcing && !(r0 > std::abs(t0) + traj.config.R0))
        throw std::invalid_argument(
            "characteristic_residual: anchor must satisfy r0 > |t0| + R0 on "
            "forced runs");
    std::vector<double> integrand(iT + 1);
    for (std::size_t k = 0; k <= iT; ++k)
        integrand[k] = probe->r[k] * signed_pow(probe->u[k], p);
    const double Q = integrate_grid(
        integrand, std::span<const double>(probe->t).first(iT + 1));
    return std::abs(probe->v_plus.front() + zeta * Q - probe->v_plus[iT]);
}

void write_channel_report_json(const ChannelReport& rep,
                               const std::string& path) {
    nlohmann::json j;
    j["R"] = rep.R;
    j["times"] = rep.times;
    j["E_ext"] = rep.E_ext;
    j["lambda_proj"] = rep.lambda_proj;
    j["cos_angle"] = rep.cos_angle;
    j["decay_fit"] = {{"exponent", rep.decay_fit.exponent},
                      {"amplitude", rep.decay_fit.amplitude},
                      {"rms_residual", rep.decay_fit.rms_residual}};
    j["spatial_exponent"] = rep.spatial_exponent;
    j["C_fit"] = rep.C_fit;
    j["C_residual_exponent"] = rep.C_residual_exponent;
    j["verdict"] = to_string(rep.verdict);
    io::write_json(j, path);
}

void write_channel_report_csv(const ChannelReport& rep,
                              const std::string& path) {
    io::CsvWriter csv(path, {"t", "E_ext", "lambda", "cos_angle"});
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        csv.row({rep.times[i], rep.E_ext[i], rep.lambda_proj[i],
                 rep.cos_angle[i]});
}

} // namespace subwave
