#pragma once

// Model constants for the radial semilinear wave equation
//
//     u_tt - u_rr - (2/r) u_r = zeta |u|^(p-1) u,   3 < p < 5,
//
// with zeta = +1 (focusing) or -1 (defocusing).  Everything downstream is
// parameterized by the exponents
//
//     beta  = 2/(p-1)            decay rate of the self-similar ansatz
//     gamma = beta (1 - beta)    zeroth-order coefficient of the profile ODE
//     s_p   = 3/2 - 2/(p-1)      critical Sobolev regularity
//     c_p   = [2(p-3)/(p-1)^2]^(1/(p-1))   amplitude of the singular
//                                          steady state c_p r^(-beta)
//
// For p in (3,5): beta in (1/2,1), gamma in (0,1/4), s_p in (1/2,1).
// The identity c_p^(p-1) = gamma holds exactly and is what makes
// c_p r^(-beta) a steady state; tests enforce it to a few ulps.

#include <cmath>

namespace subwave {

struct ModelParams {
    double p = 0.0;      // nonlinearity exponent, admissible range (3,5)
    int zeta = -1;       // +1 focusing, -1 defocusing
    double beta = 0.0;   // 2/(p-1)
    double gamma = 0.0;  // beta*(1-beta)
    double s_p = 0.0;    // 3/2 - 2/(p-1)
    double c_p = 0.0;    // (2(p-3)/(p-1)^2)^(1/(p-1))
};

// Validates p in the open interval (3,5) and zeta in {-1,+1}; throws
// std::invalid_argument naming the admissible range otherwise.
ModelParams derive_params(double p, int zeta);

// Profile potential P(y) = gamma/2 y^2 + |y|^(p+1)/(p+1) and its derivative
// P'(y) = gamma y + |y|^(p-1) y.  These belong to the (defocusing) profile
// reduction but are shared by several modules, hence they live here.
double potential(const ModelParams& mp, double y);
double potential_prime(const ModelParams& mp, double y);

// |y|^(q-1) y for real q > 1; the odd power that appears in every
// nonlinearity of the model.
inline double signed_pow(double y, double q) {
    if (y == 0.0) return 0.0;
    return y > 0.0 ? std::pow(y, q) : -std::pow(-y, q);
}

} // namespace subwave
