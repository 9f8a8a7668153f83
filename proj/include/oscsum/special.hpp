#pragma once

#include <complex>

namespace oscsum {

// log Gamma(z) for complex z away from the poles. Only exp(log_gamma) is
// meaningful: the imaginary part is not normalized to the principal branch.
std::complex<double> log_gamma(std::complex<double> z);

// J_v(x) for integer 0 <= v <= 200 and 0 <= x <= 1e8.
double bessel_j(int v, double x);

// Hankel's expansion of J_v(x) truncated after the j = J term, together with
// a cap on the truncation error. Requires x >= max(1, v^2).
struct BesselAsymptotic {
    double value = 0;
    double error_cap = 0;
};
BesselAsymptotic bessel_j_asymptotic(int v, double x, int J);

// (v, j) = Gamma(v + j + 1/2) / (j! Gamma(v - j + 1/2)).
double hankel_symbol(double v, int j);

}  // namespace oscsum
