#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "oscsum/arith.hpp"
#include "oscsum/window.hpp"

namespace oscsum {

// Smooth detector of n = 0:
//
//   delta(n) = (1/Q) sum_{q <= Q} (1/q) sum*_{a mod q} e(an/q) int g(q, z) e(nz / (qQ)) dz.
//
// Built by the divisor-switching trick delta(n) = sum_{c | n} (w(c) - w(|n|/c)),
// with w(c) = W(c/Q) / sum_c W(c/Q) and W the base window rescaled to end at 1.
// Writing 1_{q | n} through Ramanujan sums and collecting c = qr leaves
//
//   Delta_q(u) = sum_r (qr)^{-1} (w(qr) - w(|u| / (qr))),
//
// and g(q, .) is the Fourier transform of x -> qQ Delta_q(qQx). A smooth cut
// at |u| = 2 H Q^2 keeps that function compactly supported; the expansion is
// exact for |n| <= H Q^2, where H = s0/s1 of the base window.
//
// Because the support in x is [-L_q, L_q], the z-integral is sampled with
// step 1/(2 L_q): the trapezoid rule is then exact up to the discarded tail.
struct DeltaOptions {
    double tail_tol = 1e-9;  // bound on the discarded z-tail, per modulus
};

class DeltaExpansion {
public:
    DeltaExpansion(double Q, const SmoothWindow& base, const DeltaOptions& opt = {});

    double Q() const { return Q_; }
    int moduli() const { return qmax_; }
    double headroom() const { return H_; }
    i64 max_abs_n() const;  // floor(H Q^2)
    const SmoothWindow& generator() const { return W_; }

    // sum_c W(c/Q) / (Q int W); tends to 1 as Q grows.
    double normalization() const { return S_ / (Q_ * W_.integral()); }
    // Largest |z| kept, and epsilon with Q^epsilon equal to it.
    double zeta_cut() const { return zcut_; }
    double epsilon() const;

    // g(q, z) and d/dz g(q, z) by direct quadrature, for any real z.
    std::complex<double> g(int q, double z) const;
    std::complex<double> g_derivative(int q, double z) const;
    // g(q, z) - 1
    std::complex<double> h(int q, double z) const { return g(q, z) - 1.0; }
    // qQ Delta_q(qQ x), the inverse transform of g(q, .)
    double kernel(int q, double x) const;

    // The full expansion at n, imaginary part included.
    std::complex<double> detect(i64 n) const;

private:
    struct Grid {
        double step = 0;                          // z spacing
        std::vector<std::complex<double>> g;      // g(q, j step), j = -J..J
    };
    double support(int q) const { return 2 * H_ * Q_ / q; }

    double Q_ = 0, H_ = 0, S_ = 0, zcut_ = 0;
    int qmax_ = 0;
    SmoothWindow W_;
    std::vector<double> lead_;  // sum_r W(qr/Q)/r, by q
    std::vector<Grid> grid_;    // by q
};

DeltaExpansion build_delta(double Q, const SmoothWindow& base, const DeltaOptions& opt = {});
// Real part of the expansion; the imaginary part is checked against 1e-9.
double delta_detect(i64 n, const DeltaExpansion& exp);
std::vector<double> delta_detect_range(i64 lo, i64 hi, const DeltaExpansion& exp, unsigned threads = 1);

struct GPropertyReport {
    double decay_constant = 0;       // max |g| |z|^3 over |z| >= 1
    double h_constant = 0;           // max |h| / ((Q/q)(q/Q + |z|)^3)
    double derivative_constant = 0;  // max |z dg/dz| / Q^epsilon
    double derivative_log_constant = 0;  // the same divided by log Q
    double even_residual = 0;        // max |g(q, z) - g(q, -z)|
    double max_abs_h_small = 0;      // max |h| over q <= Q^{1-eps'}, |z| <= Q^{-eps'} (eps' = 1/2)
    double epsilon = 0, zeta_cut = 0, normalization = 0;
    std::size_t points = 0;
};

// Grids must lie in [1, Q] x [-Q^epsilon, Q^epsilon].
GPropertyReport g_property_report(const DeltaExpansion& exp, const std::vector<int>& q_grid,
                                  const std::vector<double>& zeta_grid);

}  // namespace oscsum
