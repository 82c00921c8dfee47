#include "subwave/params.hpp"

#include <sstream>
#include <stdexcept>

namespace subwave {

ModelParams derive_params(double p, int zeta) {
    if (!(p > 3.0 && p < 5.0)) {
        std::ostringstream os;
        os << "derive_params: p = " << p
           << " outside the energy-subcritical range (3, 5)";
        throw std::invalid_argument(os.str());
    }
    if (zeta != 1 && zeta != -1) {
        throw std::invalid_argument("derive_params: zeta must be +1 (focusing) or -1 (defocusing)");
    }
    ModelParams mp;
    mp.p = p;
    mp.zeta = zeta;
    mp.beta = 2.0 / (p - 1.0);
    mp.gamma = mp.beta * (1.0 - mp.beta);
    mp.s_p = 1.5 - 2.0 / (p - 1.0);
    mp.c_p = std::pow(2.0 * (p - 3.0) / ((p - 1.0) * (p - 1.0)), 1.0 / (p - 1.0));
    return mp;
}

double potential(const ModelParams& mp, double y) {
    return 0.5 * mp.gamma * y * y + std::pow(std::abs(y), mp.p + 1.0) / (mp.p + 1.0);
}

double potential_prime(const ModelParams& mp, double y) {
    return mp.gamma * y + signed_pow(y, mp.p);
}

} // namespace subwave
