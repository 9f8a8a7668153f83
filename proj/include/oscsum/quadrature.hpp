#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace oscsum {

struct QuadOptions {
    double tol = 1e-9;                  // stop when error <= tol * (1 + |value|)
    std::size_t max_panels = 4000000;   // budget; exceeding it throws CertificateError
    double max_phase_step = 0.7853981633974483;  // pi/4 per initial panel
};

struct QuadResult {
    std::complex<double> value;
    double error = 0;
    std::size_t panels = 0;
};

// Global adaptive Gauss-Kronrod (7/15) on [a, b]. When `phase` is given the
// initial panels are split until the phase moves by at most max_phase_step
// across each; `breaks` adds forced panel boundaries.
QuadResult integrate_adaptive(const std::function<std::complex<double>(double)>& f, double a, double b,
                              const QuadOptions& opt = {}, const std::function<double(double)>& phase = nullptr,
                              const std::vector<double>& breaks = {});

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre with `panels` equal panels of `n` nodes.
std::complex<double> integrate_composite(const std::function<std::complex<double>(double)>& f, double a, double b,
                                         int panels, int n);

}  // namespace oscsum
