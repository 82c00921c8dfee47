#pragma once

// Self-similar profile ODE (defocusing reduction).  Writing u = r^(-beta)
// f(t/r) for the radial defocusing equation u_tt - Delta u = -|u|^(p-1) u
// and x = t/r in (-1, 1) gives the singular two-point problem
//
//     (1 - x^2) f'' - 2 beta x f' + gamma f + |f|^(p-1) f = 0,
//     f(0) = 0,  f'(0) = a,
//
// with beta = 2/(p-1), gamma = beta(1-beta).  The solution is odd in x, so
// only x in [0, 1) is integrated.  With the potential
// P(y) = gamma/2 y^2 + |y|^(p+1)/(p+1), the quantity
//
//     Q(x) = 1/2 (1-x^2)^(2 beta) f'^2 + (1-x^2)^(2 beta - 1) P(f)
//
// is non-increasing with Q(0) = a^2/2 (upper semi-conservation law), while
// 1/2 (1-x^2) f'^2 + P(f) >= a^2/2 everywhere (lower barrier).  The
// endpoint limit G = lim_{x->1-} (1-x^2)^beta f'(x) exists; profiles with
// G = 0 ("bounded profiles") are exactly those whose self-similar field
// carries finite exterior energy.  G is estimated at x = 1 - delta from
//
//     G ~ (1-x^2)^beta [ f'(x) - P'(f(1)) / (2 beta) ],
//
// whose error is O(1-x); the correction term comes from integrating
// d/dx[(1-x^2)^beta f'] = -(1-x^2)^(beta-1) P'(f).

#include <cstddef>
#include <filesystem>
#include <vector>

#include "subwave/grid.hpp"
#include "subwave/params.hpp"

namespace subwave {

struct ProfileSolverConfig {
    double rtol = 1e-10;
    double atol = 1e-12;
    double delta = 1e-8;           // integrate to x = 1 - delta
    std::size_t max_nodes = 40000; // retained dense-output nodes
};

struct ProfileSolution {
    double a = 0.0;
    ModelParams params;
    double delta = 0.0;

    // Dense output on nodes geometrically refined toward x = 1:
    // x_k = 1 - delta^(k/(n-1)), so the grid is logarithmic in 1 - x.
    Grid1D x_nodes = Grid1D::uniform(0.0, 1.0, 2); // placeholder, overwritten
    std::vector<double> f;
    std::vector<double> f_prime;

    double G = 0.0;              // corrected endpoint estimate (see header)
    double f1 = 0.0;             // f(1 - delta)
    int n_extrema = 0;           // sign changes of f' in (0, 1 - delta)
    double bound_constant = 0.0; // K(p) = 2/sqrt(3 gamma) + (1/2)^(1-beta)/(1-beta)

    // Cubic Hermite interpolation on the stored nodes, extended oddly to
    // x < 0 (f odd, f' even).  Throws std::domain_error for |x| > 1 - delta.
    double eval_f(double x) const;
    double eval_f_prime(double x) const;
    // f'' from the ODE at interpolated (f, f').
    double eval_f_second(double x) const;
};

// Integrates the profile ODE with adaptive RK45 at cfg tolerances.
// Preconditions: finite a, 0 < delta <= 1e-2, max_nodes >= 16.
ProfileSolution solve_profile(double a, const ModelParams& mp,
                              const ProfileSolverConfig& cfg = {});

struct ConservationReport {
    double max_upper_violation = 0.0; // max over node pairs of Q(x_{i+1}) - Q(x_i)
    double min_lower_margin = 0.0;    // min over nodes of 1/2 (1-x^2) f'^2 + P(f) - a^2/2
};

ConservationReport conservation_report(const ProfileSolution& sol);

// Recounts the stored solution's interior extrema (sign changes of f'
// across dense-output nodes), refining each candidate by bisection on the
// Hermite interpolant to confirm an isolated zero.
int count_extrema(const ProfileSolution& sol);

struct ShootingConfig {
    ProfileSolverConfig solver;
    double a_tol = 1e-12;      // bisection width, scaled by max(1, |a|)
    double g_tol_base = 1e-8;  // root accepted when |G| < g_tol_base*(1+|a|^p)
    int max_bisect = 200;
};

struct BoundedProfileRoot {
    double a = 0.0;
    double abs_G = 0.0;
};

// Scans G(a) on n_scan equispaced values in [a_lo, a_hi] and bisects every
// sign change.  Returns the accepted roots in increasing order of a.  Roots
// spaced closer than the scan resolution can be missed; the observed root
// spacing grows with a, so a few hundred samples per 50 units of a is ample
// for p near 4.
std::vector<BoundedProfileRoot> find_bounded_profiles(const ModelParams& mp,
                                                      double a_lo, double a_hi,
                                                      std::size_t n_scan,
                                                      const ShootingConfig& cfg = {});

// CSV with header x,f,f_prime; JSON sidecar with model constants and the
// scalar outputs (a, delta, G, f1, n_extrema, bound_constant, node count).
void write_profile_csv(const ProfileSolution& sol, const std::filesystem::path& path);
void write_profile_json(const ProfileSolution& sol, const std::filesystem::path& path);

} // namespace subwave
