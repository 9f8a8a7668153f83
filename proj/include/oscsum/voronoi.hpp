#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "oscsum/arith.hpp"
#include "oscsum/coefficients.hpp"
#include "oscsum/window.hpp"

namespace oscsum {

// ---------------------------------------------------------------- GL(2) ----

// Phi_h(x) = 2 pi i^k int h(y) J_{k-1}(4 pi sqrt(x y)) dy.
std::complex<double> hankel_gl2(const SmoothWindow& h, int kappa, double x);

// Fixed Gauss-Legendre nodes on the support of h, fine enough for every
// argument up to x_max. Evaluating many arguments against one grid is what
// makes the dual Voronoi sum affordable.
class HankelGrid {
public:
    HankelGrid(const SmoothWindow& h, int kappa, double x_max);
    std::complex<double> operator()(double x) const;
    double x_max() const { return x_max_; }
    std::size_t nodes() const { return y_.size(); }

private:
    std::vector<double> y_, w_;
    int order_ = 0;
    std::complex<double> pref_;
    double x_max_ = 0;
};

struct AsymptoticValue {
    std::complex<double> value;
    double error_cap = 0;
};

// Hankel's expansion of the Bessel kernel kept through the j = J term:
//   x^{-1/4} int h(y) y^{-1/4} sum_j (c_j e(2 sqrt(xy)) + d_j e(-2 sqrt(xy))) (xy)^{-j/2} dy.
// The constants come from the Bessel expansion itself; error_cap is
// C x^{-J/2-3/4} int |h| y^{-J/2-3/4} dy with C fitted once per (k, J).
AsymptoticValue hankel_gl2_asymptotic(const SmoothWindow& h, int kappa, double x, int J);
// The j-th pair (c_j, d_j) used above.
std::array<std::complex<double>, 2> hankel_gl2_constants(int kappa, int j);

// ---------------------------------------------------------------- GL(3) ----

// How gamma_ratio is formed for a GL(3) object.
struct GL3Archimedean {
    GammaConvention convention = GammaConvention::maass_mu;
    std::array<std::complex<double>, 3> mu{};
    int weight = 0;  // weight of the lifted form (sign_shifted only)

    static GL3Archimedean of(const GL3Form& pi);
    static GL3Archimedean sym_square(int weight);  // sign_shifted for a weight-k lift
    // Poles of the numerator gammas lie at Re s <= contour_floor().
    double contour_floor() const;
    std::string describe() const;
};

// gamma_l(s), l = 0 or 1, accumulated in the log domain.
std::complex<double> gamma_ratio(const GL3Archimedean& a, int ell, std::complex<double> s);
// gamma_+ = gamma_0 - i gamma_1, gamma_- = gamma_0 + i gamma_1; sign is +1 or -1.
std::complex<double> gamma_pm(const GL3Archimedean& a, int sign, std::complex<double> s);
// gamma_pm(-1/2 + i tau) with the Stirling phase (|tau| / (2 e pi))^{3 i tau} removed.
std::complex<double> gamma_residual(const GL3Archimedean& a, int sign, double tau);

// Mellin transform int g(y) y^{w-1} dy: closed form for log-Gaussian windows,
// quadrature otherwise.
std::complex<double> mellin_transform(const SmoothWindow& g, std::complex<double> w);

struct ContourOptions {
    double sigma = 0.5;      // moved right of contour_floor() automatically when needed
    double tau_max = 0;      // 0: chosen from the decay of the Mellin transform
    double step = 0.05;      // trapezoid step in tau
    double tail_tol = 1e-9;  // certified bound on the discarded tails
    double holomorphy_tol = 1e-7;
};

// Psi_g^{+-}(x) = (1/2 pi i) int_(sigma) x^{-s} gamma_pm(s) g~(-s) ds by the
// trapezoid rule. The integrand is tabulated once, so many arguments are
// cheap. Every evaluation is repeated on the contour sigma + 1/4 and the two
// must agree (holomorphy check); the tails beyond tau_max are bounded
// explicitly. Either failure throws CertificateError.
class PsiTransform {
public:
    PsiTransform(const SmoothWindow& g, const GL3Archimedean& arch, const ContourOptions& opt = {});
    std::complex<double> operator()(double x, int sign) const;
    // Both signs at once; cheaper than two calls.
    std::array<std::complex<double>, 2> both(double x) const;

    double sigma() const { return sigma_; }
    double tau_max() const { return tau_max_; }
    double tail_bound(double x) const;     // for either sign
    double last_residual() const { return last_residual_; }

private:
    struct Contour {
        double sigma = 0;
        std::vector<double> tau;
        std::vector<std::complex<double>> f[2];  // [0] for +, [1] for -
    };
    std::array<std::complex<double>, 2> eval(const Contour& c, double x) const;

    GL3Archimedean arch_;
    ContourOptions opt_;
    double sigma_ = 0.5, tau_max_ = 0, tail_coeff_ = 0;
    Contour main_, shifted_;
    bool zero_ = false;
    mutable double last_residual_ = 0;
};

std::complex<double> psi_transform(const SmoothWindow& g, const GL3Archimedean& arch, double x, int sign,
                                   const ContourOptions& opt = {});

// Large-argument expansion
//   x int g(y) sum_{j=1}^{J} (c_j e(3 (xy)^{1/3}) + d_j e(-3 (xy)^{1/3})) (xy)^{-j/3} dy,
// with c_j, d_j calibrated once per (parameters, sign) against the contour
// integral and cached. Needs x * scale >= 1e3, where scale is the window's
// centre (log-Gaussian) or right end; J in [1, 4].
AsymptoticValue psi_asymptotic(const SmoothWindow& g, const GL3Archimedean& arch, double x, int sign, int J);

struct PsiConstants {
    std::array<std::complex<double>, 4> c{}, d{};
    double cap_constant = 0;
};
const PsiConstants& psi_constants(const GL3Archimedean& arch, int sign);

// ------------------------------------------------------------ identities ----

struct VoronoiCase {
    i64 a = 1, q = 1, r = 1;   // r is used by GL(3) only
    double X = 1;              // GL(2): the sum runs over h(n / X); GL(3) windows act on n directly
    SmoothWindow window;
    i64 max_dual = 0;          // dual cutoff; 0 chooses it adaptively
};

struct Truncation {
    i64 dual_terms = 0;          // M* for GL(2); N_max >= n1^2 n2 for GL(3)
    double x_max = 0;            // largest transform argument used
    double tail_estimate = 0;    // absolute size of the last dual block
    double doubling_change = 0;  // |RHS(cut) - RHS(cut / 2)| / (1 + |RHS|)
    double sigma = 0, tau_max = 0;
};

struct VoronoiResult {
    std::complex<double> lhs, rhs;
    double gap = 0;  // |lhs - rhs| / (1 + |lhs|)
    Truncation truncation;
    GammaConvention convention = GammaConvention::maass_mu;
    std::string note;  // convention fallback, when it happened
};

// sum lambda(n) e(an/q) h(n/X) against (X/q) sum lambda(n) e(-abar n/q) Phi_h(n X / q^2).
VoronoiResult gl2_voronoi_check(const GL2Form& f, const VoronoiCase& c, unsigned threads = 1);

struct GL3CheckOptions {
    ContourOptions contour;
    bool allow_fallback = true;  // retry with the sign-shifted convention
    double fallback_gap = 1e-3;  // a gap above this triggers the retry
};

// sum A(n, r) e(an/q) g(n) against
// q sum_{+-} sum_{n1 | qr} sum_{n2} A(n1, n2) / (n1 n2) S(r abar, +-n2; qr/n1) Psi^{+-}(n1^2 n2 / (q^3 r)).
VoronoiResult gl3_voronoi_check(const GL3Form& pi, const VoronoiCase& c, const GL3CheckOptions& opt = {});
// One fixed convention, no fallback.
VoronoiResult gl3_voronoi_check(const GL3Form& pi, const GL3Archimedean& arch, const VoronoiCase& c,
                                const ContourOptions& contour = {});

}  // namespace oscsum
