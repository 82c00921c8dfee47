#pragma once

// Channel-of-energy diagnostics for exterior wave snapshots.
//
// Everything here measures, on discrete snapshots (r_j, w_j, w_t_j) with
// w = r u, the quantities the exterior-energy theory speaks about:
//
//  * exterior energy  E(t; R) = int_{|t|+R}^{r_max} (w_r^2 + w_t^2) dr,
//  * the u <-> w energy identity on a window [R, r_max]
//        int w_r^2 dr = int u_r^2 r^2 dr + r_max u(r_max)^2 - R u(R)^2,
//    which is exact calculus for any pair (u, w = r u); its residual on a
//    snapshot is pure quadrature + differencing error,
//  * the projection of (u, u_t) restricted to r > R onto the obstruction
//    space spanned by the generator (1/r, 0): the pairing collapses to the
//    closed form lambda = R u(R), and the angle to
//        cos = lambda ||(1/r,0)|| / ||(u,u_t)||,   ||(1/r,0)||^2 = 1/R,
//  * the radial pointwise bound |u(r)| <= r^{-1/2} (int_r^inf u_s^2 s^2 ds)^{1/2}
//    (Cauchy-Schwarz; the constant is exactly 1 per steradian),
//  * time decay of the exterior energy and spatial decay of |u|, with a
//    verdict on whether the run is consistent with a non-radiative solution,
//  * the finite-time characteristic-line identity
//        v_+(r0,t0) + zeta int_{t0}^{T} (t'-t0+r0) |u|^{p-1} u dt' = v_+(r_T, T)
//    along the outgoing characteristic r = t' - t0 + r0, v_+ = w_t - w_r.
//
// Conventions: all integrals are per steradian (a global 4 pi is dropped
// everywhere consistently).  Truncated infinite-r integrals appearing in
// norms (projection, pointwise bound) get an analytic power-law tail
// correction fitted on the last decade of the grid; the energy identity is
// evaluated in its finite-window form instead, because the boundary flux
// r_max u(r_max)^2 makes it exact without any model of the tail.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "subwave/fit.hpp"
#include "subwave/grid.hpp"
#include "subwave/wave.hpp"

namespace subwave {

// d(values)/dr on a uniform grid, 4th-order centered stencils inside and
// one-sided 5-point stencils at the edges.  Needs >= 5 nodes.
std::vector<double> radial_derivative(const Grid1D& grid,
                                      const std::vector<double>& values);

// Trapezoid integral of w_r^2 + w_t^2 over the grid nodes with r > |t| + R
// (strict).  Throws std::invalid_argument if |t| + R >= r_max or the window
// holds fewer than two nodes.
double exterior_energy(const WaveState& snapshot, double R);

// Residual of the finite-window energy identity on [R, r_max]:
//   | int_R^{rmax} w_r^2 - int_R^{rmax} u_r^2 r^2 - rmax u(rmax)^2 + R u(R)^2 |
// with u = w/r and the exact split u_r = (w_r - u)/r, so both sides share
// the same differenced w_r and the residual measures only quadrature error.
// Endpoint-corrected trapezoid quadrature (Euler-Maclaurin h^2/12 term).
// Requires 0 < R < r_max with at least two nodes above R.
double energy_identity_residual(const WaveState& snapshot, double R);

struct Projection {
    double lambda = 0.0;             // R u(R): coefficient on (1/r, 0)
    std::optional<double> cos_angle; // empty when the data norm vanishes
};

// Projection of (u, u_t) on r > R onto the generator (1/r, 0).  The data
// norm ||(u,u_t)||^2 = int_R^inf (u_r^2 r^2 + w_t^2) dr is quadrature to
// r_max plus a fitted power-law tail.  u(R) is linearly interpolated when R
// falls between nodes.
Projection projection_onto_generator(const WaveState& snapshot, double R);

// Worst margin, over nodes r_j > 0, of
//   r^{-1/2} (int_r^inf u_s^2 s^2 ds)^{1/2} - |u(r)|,
// i.e. how close the snapshot comes to violating the radial pointwise
// bound.  Nonnegative up to quadrature error; zero is the Cauchy-Schwarz
// equality case u = c/r.
double pointwise_bound_check(const WaveState& snapshot);

enum class Verdict {
    NonradiativeConsistent,
    Radiating,
    Inconclusive,
};

const char* to_string(Verdict v);

struct ChannelReport {
    double R = 0.0;
    std::vector<double> times;
    std::vector<double> E_ext;       // exterior energy per snapshot
    std::vector<double> lambda_proj; // projection at R_t = |t| + R
    std::vector<double> cos_angle;   // NaN where undefined
    PowerLawFit decay_fit;           // E_ext ~ A t^e on the fit window

    // Spatial diagnostics: per-snapshot decay exponent of |u| on
    // [max(2|t|, r_prime), r_max/2] (NaN when not fittable), and the
    // large-r constant of u ~ C/r extracted from the first snapshot.
    std::vector<double> spatial_exponent;
    double C_fit = 0.0;
    double C_residual_exponent = 0.0; // decay exponent of |u - C/r|, NaN if n/a

    Verdict verdict = Verdict::Inconclusive;
};

struct DecayOptions {
    // Time window for the E_ext power-law fit; negative means automatic
    // ([T/2, T], positive times only).
    double fit_t_min = -1.0;
    double fit_t_max = -1.0;
    // Lower cutoff R' in the spatial-fit window [max(2|t|, R'), r_max/2].
    double r_prime = 2.0;
};

// Assembles the full report from a recorded trajectory (>= 4 snapshots).
// Verdict: nonradiative-consistent when E_ext is non-increasing (within
// 1e-6 relative slack) and the fitted time exponent is <= -(5-p)/(p-1)+0.1;
// radiating when E_ext neither decays (exponent > -0.1) nor drains (final
// value >= 25% of the peak); inconclusive otherwise.
ChannelReport decay_report(const Trajectory& traj, double R,
                           const DecayOptions& opt = {});

// Residual of the finite-time characteristic identity along the outgoing
// characteristic anchored at (r0, t0), integrated to time T.  Requires the
// trajectory to carry a probe recorded at exactly that anchor (configure
// WaveConfig::probes); throws std::invalid_argument when no probe matches,
// T is not sample-aligned, or the characteristic left the grid before T.
double characteristic_residual(const Trajectory& traj, double r0, double t0,
                               double T);

// Serialization: full report as JSON; per-time rows as CSV with columns
// t, E_ext, lambda, cos_angle.
void write_channel_report_json(const ChannelReport& report,
                               const std::string& path);
void write_channel_report_csv(const ChannelReport& report,
                              const std::string& path);

} // namespace subwave
