#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "oscsum/jet.hpp"
#include "oscsum/quadrature.hpp"
#include "oscsum/window.hpp"

namespace oscsum {

using PhaseJet = Jet<4>;
// A phase in radians: I = int w(y) exp(i rho(y)) dy. Written once against
// Jet arithmetic so derivatives through order 4 come for free.
using Phase = std::function<PhaseJet(const PhaseJet&)>;

Phase linear_phase(double slope);                     // slope * y
Phase quadratic_phase(double T, double center);       // pi T (y - center)^2
Phase monomial_phase(double coef, double power);      // coef * y^power

struct PhaseDerivs {
    double d[5];  // rho, rho', ..., rho''''
};
PhaseDerivs eval_phase(const Phase& rho, double y);

// Scale parameters of the derivative tests:
//   |rho^{(i)}| <= Y / Q^i (i >= 2),  |w^{(j)}| <= Z / U^j,  |rho'| >= R.
// X enters the inert stationary-phase lemma (R = Y / X^2 there).
struct InertParams {
    double X = 1, Y = 1, Z = 1, R = 1, Q = 1, U = 1;
};

struct OscillatorySpec {
    SmoothWindow weight;
    Phase phase;
    InertParams params;
};

std::complex<double> integrate(const OscillatorySpec& spec, double tol = 1e-9);
QuadResult integrate_detailed(const OscillatorySpec& spec, double tol = 1e-9);

// Dense sampling (1024 points) of the derivative hypotheses. Ratios <= 1 mean
// the supplied parameters are consistent.
struct HypothesisReport {
    double phase_ratio = 0;        // max_i max_y |rho^{(i)}| Q^i / Y, i = 2..4
    double weight_ratio = 0;       // max_j max_y |w^{(j)}| U^j / Z, j = 0..4
    double first_derivative_ratio = 0;  // R / min_y |rho'|
    bool ok = false;
};
HypothesisReport check_hypotheses(const OscillatorySpec& spec);

// Tight parameters for given scales Q and U: Z, Y and R are measured on the
// support (with a small safety margin) so check_hypotheses passes.
InertParams fit_params(const SmoothWindow& w, const Phase& rho, double Q, double U, int max_order = 4);

// Sum of |coefficients| of the monomials in L^A w, where L g = (g / rho')'.
// Each monomial is at most Z S^A under the hypotheses, so
// |I| <= constant * (b - a) Z S^A.
double first_derivative_constant(int A);

struct DerivativeBound {
    double bound = 0;       // with the explicit constant
    double raw = 0;         // the lemma's expression with constant 1
    double constant = 0;
};

DerivativeBound bound_first_derivative(const OscillatorySpec& spec, int A = 3);
// Van der Corput: |int_a^x e^{i rho}| <= (5 2^{r-1} - 2) lambda0^{-1/r}, then
// partial summation against the weight's total variation.
DerivativeBound bound_rth_derivative(const OscillatorySpec& spec, int r, double lambda0);

// Two-dimensional problem int int e(f(x, y)) w1(x) w2(y) dx dy with the phase
// in cycles (e(t) = exp(2 pi i t)).
using Phase2D = std::function<double(double, double)>;
struct Spec2D {
    Phase2D f;
    SmoothWindow wx, wy;
};
// Tensor Gauss-Legendre with panels sized by the sampled phase gradient;
// two node counts are compared for the error estimate.
QuadResult integrate_2d(const Spec2D& spec, double tol = 1e-6);
// Var / sqrt(rho1 rho2) with Var = int int |d^2 w / dx dy| = V(w1) V(w2).
DerivativeBound bound_2d_second_derivative(const Spec2D& spec, double rho1, double rho2);
// Samples the Hessian conditions on a 64 x 64 grid.
bool check_2d_hypotheses(const Spec2D& spec, double rho1, double rho2, double h = 1e-4);

struct StationaryPhaseResult {
    std::complex<double> value;    // leading term plus first correction
    std::complex<double> leading;
    double error_budget = 0;
    double y0 = 0;
};
// Requires exactly one zero of rho' on the support, R = Y / X^2 >= 4.
StationaryPhaseResult stationary_phase(const OscillatorySpec& spec, int A = 2, double budget_constant = 1.0);

// U^dagger(xi, s) = int U(y) e(-xi y) y^{s-1} dy.
std::complex<double> u_dagger(const SmoothWindow& U, double xi, std::complex<double> s, double tol = 1e-10);

struct UDaggerFit {
    double c_min_envelope = 0;  // max |U^dagger| / min{((1+|tau|)/|xi|)^j, ((1+|xi|)/|tau|)^j}
    double c_second = 0;        // max |U^dagger| |tau|^{1/2}
};
UDaggerFit u_dagger_fit(const SmoothWindow& U, double beta, const std::vector<double>& xi_grid,
                        const std::vector<double>& tau_grid, int j);
double u_dagger_min_envelope(double xi, double tau, int j);

// H(X, 3 lambda Y) = int xi^2 phi(xi^3) e(-X xi^3 + 3 lambda Y xi) d xi.
enum class CubicRegime { zero_frequency, large_x, off_window, stationary, transition };
const char* to_string(CubicRegime r);
struct CubicPhaseResult {
    std::complex<double> value;
    CubicRegime regime = CubicRegime::transition;
};
CubicRegime classify_cubic(double X, double lambda, double Y, double eps = 0.1);
CubicPhaseResult cubic_phase_integral(double X, double lambda, double Y, const SmoothWindow& phi,
                                      double tol = 1e-11);

}  // namespace oscsum
