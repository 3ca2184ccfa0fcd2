#pragma once

// Small regression helpers used for regime classification.

#include <span>

namespace tpm {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Least squares y ~ c0 + c1 x + c2 x^2.
struct QuadraticFit {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

QuadraticFit quadratic_fit(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation (average ranks on ties).
double spearman_rho(std::span<const double> x, std::span<const double> y);

}  // namespace tpm
