#pragma once

// Exterior-truncated radial wave evolution.  In the reduced variable
// w(r,t) = r u(r,t) the PDE u_tt - Delta u = zeta chi |u|^(p-1) u becomes
// one-dimensional,
//
//     w_tt - w_rr = zeta chi_{r > |t| + R0} |w|^(p-1) w / r^(p-1),
//
// discretized by the classic leapfrog on a uniform grid r_j = j dr with
// dt = lambda dr:
//
//     w^{n+1}_j = 2 w^n_j - w^{n-1}_j
//               + lambda^2 (w^n_{j+1} - 2 w^n_j + w^n_{j-1})
//               + dt^2 zeta chi(r_j, t_n) |w^n_j|^(p-1) w^n_j / r_j^(p-1).
//
// At lambda = 1 the linear part reduces to w^{n+1}_j = w^n_{j+1} + w^n_{j-1}
// - w^{n-1}_j, the exact d'Alembert translation: homogeneous pulses move by
// ulp-level copies, the numerical domain of influence coincides with the
// light cone, and interior (r < R0) modifications of the data never reach
// the strict exterior r > |t| + R0.  The forcing indicator is strict
// (chi = 1 iff r_j > |t_n| + R0), so truncation-interface errors ride the
// cone and stay out of the strict exterior at lambda = 1.
//
// Start-up: the state carries (w(t), w(t - dt)); make_initial_state fills
// w(-dt) by a backward Taylor expansion w0 - dt r u1 + dt^2/2 (w0_rr + F),
// accurate to O(dt^3) locally.  Data are sampled with the interior clamp
// u(r) := u(max(r, R0)) — anything inside r < R0 is irrelevant in the
// exterior (Remark on interior extensions), and the clamp keeps power-law
// data finite at r = 0.
//
// Outer boundary: 'OutgoingExtrapolation' advects w out of the domain
// (exact at lambda = 1 for purely outgoing signals; combine with the causal
// budget r_max >= R0 + T + support + 2 dr for compactly supported data).
// 'DirichletSampler' feeds an exact w(r_max, t) signal, which is what the
// power-law fixtures (self-similar and stationary data) need on long runs.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subwave/grid.hpp"
#include "subwave/params.hpp"
#include "subwave/profile.hpp"
#include "subwave/stationary.hpp"

namespace subwave {

enum class OuterBoundary { OutgoingExtrapolation, DirichletSampler };

struct WaveConfig {
    ModelParams params;
    double R0 = 0.5;       // truncation radius of the forcing
    double dr = 1.0 / 1024;
    double lambda = 1.0;   // Courant number dt/dr, in (0, 1]
    double r_max = 64.0;
    double t_max = 0.0;    // optional causal budget; 0 = unchecked
    bool forcing = true;   // false: pure linear wave (chi identically 0)
    OuterBoundary outer = OuterBoundary::OutgoingExtrapolation;
    std::function<double(double)> boundary_w;     // w(r_max, t), DirichletSampler
    std::optional<double> data_support;           // declared support radius of data
    std::vector<std::pair<double, double>> probes; // characteristic probes (r0, t0)
    std::size_t check_finite_every = 64;
    std::string data_label;                        // echoed into manifests
};

struct WaveState {
    double t = 0.0;
    std::shared_ptr<const Grid1D> grid; // uniform, r_0 = 0
    std::vector<double> w;              // w(t)
    std::vector<double> w_prev;         // w(t - dt); empty on diagnostic snapshots
    std::vector<double> w_t;            // centered dw/dt; filled on snapshots
    double R0 = 0.0;
    double lambda = 1.0;

    double dr() const { return grid->step(); }
    double dt() const { return lambda * dr(); }
};

// Samples (u0, u1) with the interior clamp and builds the state at t = 0
// (including the backward Taylor level and the exact w_t = r u1).
// Throws std::invalid_argument on malformed config or non-finite samples.
WaveState make_initial_state(const std::function<double(double)>& u0,
                             const std::function<double(double)>& u1,
                             const WaveConfig& cfg);

// One leapfrog step as a pure function (evolve() uses the same core with
// rotating buffers).  The input must be a stepping state (w_prev filled).
WaveState step(const WaveState& state, const WaveConfig& cfg);

struct CharacteristicProbe {
    double r0 = 0.0, t0 = 0.0;
    // Per step along the outgoing characteristic r = r0 + (t - t0):
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> u;      // u = w/r at the probe node
    std::vector<double> v_plus; // v_+ = (d_t - d_r)(r u) = w_t - w_r, centered
};

enum class RunStatus { Completed, BlewUp };

struct Trajectory {
    std::vector<double> times;
    std::vector<WaveState> snapshots; // diagnostic states (w, w_t; no w_prev)
    std::vector<CharacteristicProbe> probes;
    WaveConfig config;
    RunStatus status = RunStatus::Completed;
    double end_time = 0.0; // last trustworthy time (== T when Completed)
};

// Marches `state` forward by T (rounded to whole steps), recording a
// snapshot every `record_every` steps plus the final one, with centered
// w_t on every snapshot.  Characteristic probes require lambda == 1 and
// grid-aligned (r0, t0).  Non-finite values end the run early with
// status = BlewUp and the snapshots recorded so far.
Trajectory evolve(const WaveState& state, double T, std::size_t record_every,
                  const WaveConfig& cfg);

struct FieldSample {
    double u = 0.0, u_t = 0.0, u_r = 0.0;
};

// Exact self-similar field u = r^(-beta) f(t/r) of a profile solution:
// u_t = r^(-beta-1) f'(x), u_r = -r^(-beta-1) (beta f + x f'), x = t/r.
// Requires |t| < r (1 - delta)^-1-ish: |t/r| must lie in the stored range.
FieldSample self_similar_field(const ProfileSolution& profile, double r, double t);

// Ready-made data samplers for the standard fixtures.
// Self-similar data (0, a r^(-beta-1)) of a profile.
std::pair<std::function<double(double)>, std::function<double(double)>>
self_similar_data(const ProfileSolution& profile);
// Static data (U_C, 0) of a stationary profile.
std::pair<std::function<double(double)>, std::function<double(double)>>
stationary_data(const StationaryProfile& profile, double C);
// C^3 compact bump u0 = A (1 - ((r-c)/w)^2)^4 on |r-c| < w, u1 = 0.
std::pair<std::function<double(double)>, std::function<double(double)>>
bump_data(double center, double width, double amplitude);

// Exact outer-boundary samplers for the Dirichlet feed.
std::function<double(double)> self_similar_boundary(const ProfileSolution& profile,
                                                    double r_max);
std::function<double(double)> constant_boundary(double w_value);

} // namespace subwave
