#pragma once

// Stationary (time-independent) radial solutions.  With z(r) = r U(r), the
// static equation -Delta U = zeta |U|^(p-1) U becomes
//
//     z'' = -zeta |z|^(p-1) z / r^(p-1),
//
// which is integrated backward from R_inf with the prescribed behaviour
// z -> 1, z' -> 0 at infinity, seeded by the first asymptotic correction
//
//     z(R_inf)  = 1 - zeta R_inf^(-(p-3)) / ((p-2)(p-3)),
//     z'(R_inf) = zeta R_inf^(-(p-2)) / (p-2).
//
// (The usual display z'' = |z|^(p-1) z / r^(p-1) in the literature is the
// zeta = -1 instance of the above.)  The integration runs in s = ln r: the
// coefficients are power laws, so the log variable equidistributes error;
// the system is  dz/ds = v,  dv/ds = v - zeta |z|^(p-1) z e^((3-p)s).
//
// Focusing (zeta=+1): z descends smoothly to c_p r^(1-beta) (the singular
// steady state) with a damped oscillation; U+ = z/r is smooth on r > 0 and
// U+ ~ 1/r at infinity.  Defocusing (zeta=-1): z > 1 grows convexly as r
// decreases and blows up at a finite radius R_minus >= p^(-2(p-1)/(p-3));
// the solver brackets the threshold crossing z = Z_max.  The crossing is so
// steep (z ~ (r - r*)^(-2/(p-1)), so z = 1e12 sits ~1e-18 relative from the
// pole at p = 4) that the bracket is effectively a bracket of the pole; it
// is certified by probe integrations from the last trustworthy state.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "subwave/grid.hpp"
#include "subwave/params.hpp"

namespace subwave {

struct StationaryConfig {
    double r_inf = 1e4;   // seed radius
    double r_min = 1e-3;  // focusing integration target
    double z_max = 1e12;  // defocusing blow-up threshold
    double rtol = 1e-10;
    double atol = 1e-12;
    double r_tol = 1e-8;  // relative width of the R_minus bracket
    std::size_t nodes_per_decade = 4000;
};

struct BlowupBracket {
    double lo = 0.0; // z certified to exceed z_max at or above this radius
    double hi = 0.0; // last radius with z <= z_max
};

struct StationaryProfile {
    ModelParams params;
    double r_inf = 0.0;
    Grid1D r_nodes = Grid1D::uniform(0.0, 1.0, 2); // placeholder, overwritten
    std::vector<double> z;
    std::vector<double> z_prime; // dz/dr
    std::optional<BlowupBracket> R_minus;

    // Cubic Hermite on the stored nodes.  Throws std::domain_error outside
    // [front, R_inf] (below the front means at or inside the blow-up zone
    // for the defocusing branch, below r_min for the focusing one).
    double eval_z(double r) const;
    double eval_z_prime(double r) const;
    // U(r) = z(r)/r, extended by the asymptote 1/r for r > R_inf.
    double eval_U(double r) const;
};

// See header comment.  zeta must be +1 or -1 and params.p in (3,5).
// Errors (numerical_error): focusing branch crossing z_max (wrong sign
// wiring), defocusing branch reaching r_min without blow-up (threshold too
// small or a bug).
StationaryProfile solve_stationary(int zeta, const ModelParams& mp,
                                   const StationaryConfig& cfg = {});

struct LadderCoefficients {
    int k = 0;
    double beta_k = 0.0;
    double log_c_k = 0.0;              // ln c_k, always finite
    std::optional<double> c_k;         // absent once exp(log_c_k) overflows
};

// Appendix-style lower-bound ladder: beta_{k+1} = p beta_k + (p-3),
// c_{k+1} = (p beta_k + p - 3)(p beta_k + p - 2) c_k^p, (beta_0, c_0) = (0,1).
// Evaluated in log space; c_k is materialized only while representable
// (it grows doubly exponentially, overflowing near k = 7 for p ~ 4).
// Requires 0 <= k_max <= 12.
std::vector<LadderCoefficients> ladder(int k_max, const ModelParams& mp);

// For each k <= k_max, the minimum over stored nodes with r < 1 of the
// relative margin (z - r^(-beta_k)/c_k) / z.  The ladder lower bound says
// every margin is nonnegative; tolerance for rounding is the caller's
// business.  Rejects focusing profiles (the bound holds on the defocusing
// branch, where z is monotone and each induction step preserves the sign).
std::vector<double> check_ladder_bounds(const StationaryProfile& profile, int k_max);

// Rescaled family:
//   C > 0:  U_C(x) =  C^(-2/(p-3))   U( x / C^((p-1)/(p-3)) )
//   C = 0:  0
//   C < 0:  U_C(x) = -|C|^(-2/(p-3)) U( x / |C|^((p-1)/(p-3)) )
// with U = z/r from the profile (asymptote C/x beyond the stored grid).
// Defocusing requires x strictly outside the rescaled blow-up zone.
double evaluate_rescaled(const StationaryProfile& profile, double C, double x);

// CSV columns r,z,z_prime,U; JSON sidecar {p, zeta, R_inf, R_minus_lo, R_minus_hi}.
void write_stationary_csv(const StationaryProfile& profile, const std::filesystem::path& path);
void write_stationary_json(const StationaryProfile& profile, const std::filesystem::path& path);

} // namespace subwave
