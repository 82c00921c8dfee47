#pragma once

// Least-squares power-law fitting in log-log coordinates, used for decay
// rates (energy vs time, field vs radius) and for analytic tail corrections
// to truncated quadratures.

#include <span>

namespace subwave {

struct PowerLawFit {
    double exponent = 0.0;     // slope of log y vs log x
    double amplitude = 0.0;    // y ~ amplitude * x^exponent
    double rms_residual = 0.0; // rms of log-residuals
};

// Fits y ~ A x^e through (x_i, y_i) with all x_i, y_i > 0 (throws
// std::invalid_argument otherwise, or if fewer than 2 samples, or if all
// x_i coincide).  Plain unweighted least squares on (log x, log y).
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

} // namespace subwave
