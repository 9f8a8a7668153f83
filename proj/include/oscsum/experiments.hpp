#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "oscsum/arith.hpp"
#include "oscsum/coefficients.hpp"
#include "oscsum/window.hpp"

namespace oscsum {

// phi(x) = c log x or c x^beta, 0 < beta <= 1/3; the twist is e(t phi(x)).
struct PhaseFamily {
    enum class Kind { log, power };
    Kind kind = Kind::log;
    double c = -1;
    double beta = 0;  // power only
    double t = 0;     // amplitude; 0 gives the untwisted sum

    static PhaseFamily logarithmic(double c, double t);
    static PhaseFamily power(double c, double beta, double t);
    // "log:c:t" or "power:c:beta:t"
    static PhaseFamily parse(const std::string& text);

    double value(double x) const;             // phi(x)
    double derivative(double x, int k) const;  // phi^{(k)}(x), k = 0..3
    // phi'(x) * (phi(x^3))''; the admissible regime has this <= 0.
    double sign_product(double x) const;
    bool sign_condition() const;  // sign_product <= 0 on (0, inf), decided in closed form
    PhaseFamily with_t(double t) const;
    std::string describe() const;
};

// lambda_pi(n, r) lambda_f(n) for r^2 n <= limit, stored by r. Genuine tables
// come from the two forms; the substitutes are constant 1 and independent
// random signs.
class ProductTable {
public:
    static ProductTable build(const GL2Form& f, const GL3Form& pi, i64 limit, unsigned threads = 1);
    static ProductTable constant(i64 limit, double value = 1.0);
    static ProductTable random_signs(i64 limit, u64 seed);

    i64 limit() const { return limit_; }
    i64 rows() const { return i64(rows_.size()) - 1; }
    // coefficient of the (r, n) term; r^2 n <= limit
    double operator()(i64 r, i64 n) const { return rows_[std::size_t(r)][std::size_t(n)]; }
    const std::vector<double>& row(i64 r) const { return rows_[std::size_t(r)]; }
    const std::string& id() const { return id_; }

private:
    i64 limit_ = 0;
    std::vector<std::vector<double>> rows_;  // rows_[r][n], index 0 unused
    std::string id_;
};

struct SumResult {
    double N = 0, t = 0;
    std::complex<double> value;
    double trivial_mass = 0;  // sum |coefficient V|
    double ratio = 0;         // |value| / trivial_mass
};

// S(N) = sum_{r <= r_cap} sum_n c(r, n) V(r^2 n / N) e(t phi(r^2 n / N)).
// Each term is formed as (c * V(x)) * e(t phi(x)) with x = double(r^2 n) / N;
// rows are summed over n in increasing order with compensated summation, and
// the row totals are then summed in increasing r. r_cap = 0 means no cap.
SumResult twisted_sum(const ProductTable& table, const PhaseFamily& phase, double N, const SmoothWindow& V,
                      i64 r_cap = 0, unsigned threads = 1);
SumResult twisted_sum(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase, double N,
                      const SmoothWindow& V, i64 r_cap = 0, unsigned threads = 1);
// The same sum over N <= r^2 n <= 2N, with the bounds compared in integers.
SumResult sharp_cut_sum(const ProductTable& table, const PhaseFamily& phase, double N, unsigned threads = 1);
SumResult sharp_cut_sum(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase, double N,
                        unsigned threads = 1);

struct ExponentFit {
    double exponent = 0, slope_stderr = 0;
    std::vector<SumResult> rows;
};
// Least squares of log2 |S(N)| against log2 N. Needs at least 5 points.
ExponentFit cancellation_exponent(const ProductTable& table, const PhaseFamily& phase, const std::vector<double>& N_grid,
                                  double t, const SmoothWindow& V, unsigned threads = 1);
ExponentFit cancellation_exponent(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase,
                                  const std::vector<double>& N_grid, double t, unsigned threads = 1);
// Mean exponent over independent random-sign tables; slope_stderr is the spread
// of the per-trial exponents divided by sqrt(trials).
ExponentFit random_sign_exponent(const PhaseFamily& phase, const std::vector<double>& N_grid, int trials, u64 seed,
                                 unsigned threads = 1);
std::vector<double> dyadic_grid(int lo_exp, int hi_exp);  // 2^lo, ..., 2^hi

struct WiltonResult {
    double max_ratio = 0, argmax_alpha = 0;
    std::vector<std::complex<double>> sums;  // by alpha
};
// max over alpha of |sum_{n <= X} lambda_f(n) e(n alpha)| / (sqrt(X) log 2X).
WiltonResult wilton_scan(const GL2Form& f, i64 X, const std::vector<double>& alpha_grid, unsigned threads = 1);
// alpha = j / G for j = 0..G-1, with n alpha reduced exactly mod 1.
WiltonResult wilton_scan_rational(const GL2Form& f, i64 X, i64 G, unsigned threads = 1);

struct FIResult {
    double direct = 0;  // sum_{r^2 n <= x} lambda_pi(r, n) lambda_f(n)
    double dual = 0;    // sum_{r^2 n <= N} lambda_pi(n, r) lambda_f(n) (r^2 n)^{-7/12} cos(12 pi (r^2 n x)^{1/6})
    double fitted_exponent = 0, fit_stderr = 0;
    std::vector<double> grid, block_sup;  // sup of |A(y)| over y in (X/2, X] for X in grid
};
struct FIOptions {
    int grid_lo = 10, grid_hi = 18;  // dyadic range of the growth fit
};
// direct is summed like twisted_sum (rows in r, compensated). The exponent is
// the slope of log2 block_sup against log2 X.
FIResult fi_partial_sum(const ProductTable& table, double x, i64 N, const FIOptions& opt = {});
FIResult fi_partial_sum(const GL2Form& f, const GL3Form& pi, double x, i64 N, const FIOptions& opt = {});

// --------------------------------------------------------- correlations ----

struct CorrelationParams {
    double N0 = 1e4, N1 = 1e3, C = 5;
    i64 r = 1, m = 4, mp = 4, q1 = 1, q2 = 5, q2p = 5;
    double M = 4;
    PhaseFamily phase = PhaseFamily::logarithmic(-1, 100);  // carries t; 100 puts a stationary point in J^+
    std::vector<double> X_grid;
    SmoothWindow V = SmoothWindow::bump(1, 2);
    double Q = 0;  // 0: N0^{1/2} / t^{2/5}
};

enum class IRegime { negligible, small_x, middle, large_x };
const char* to_string(IRegime r);

struct CorrelationRow {
    double X = 0;
    std::complex<double> plus, minus;  // frak_i^{+-}(X)
    IRegime regime = IRegime::large_x;
    double scaled = 0;  // |frak_i^+| P |X|^a with a = 0, 1/3, 1/2 by regime; |frak_i| itself when negligible
};

struct CorrelationReport {
    double lambda = 0, P = 0, Q = 0;  // P = max{t, sqrt(N0 M)/C}
    bool admissible = true;
    std::vector<std::string> violations;
    std::vector<CorrelationRow> rows;
    double negligible_max = 0;      // max |frak_i^{+-}| over rows with X >= 10 lambda^{1.1}
    double small_x_constant = 0;    // max |frak_i^+| P
    double middle_constant = 0;     // max |frak_i^+| P |X|^{1/3}
    double large_x_constant = 0;    // max |frak_i^+| P |X|^{1/2}
    double zero_constant = 0;       // |frak_i^{+-}(0)| / min{1/t, C / (lambda sqrt(N0) |sqrt m - sqrt m'|)}, q2 = q2' only
    double j_constant = 0;          // max |frak_J^{+-}| max{t, lambda}^{1/2} over the sampled arguments
    double l2_constant = 0;         // int psi |frak_J^{+-}(N1 xi^3)|^2 d xi * max{t, lambda}
    double phi_minus_max = 0;       // max |Phi^-(m, q, zeta)| on the zeta samples
    double phi_plus_constant = 0;   // max |Phi^+| P^{1/2}
};

// frak_J^{+-}(n, m, q) = int V~(y) e(t phi(y) +- (2/q)(N0 m y)^{1/2} + (3/q)(N0 n y / r)^{1/3}) dy,
// V~(y) = V(y) G(y) y^{7/12} with G a fixed bump on [1/2, 5/2].
std::complex<double> frak_j(const CorrelationParams& p, int sign, double n, i64 m, i64 q);
// Phi^{+-}(m, q, zeta) = int V(y) y^{-1/4} e(t phi(y) + zeta N0 y / (qQ) +- 2 (m N0 y)^{1/2} / q) dy.
std::complex<double> frak_phi(const CorrelationParams& p, int sign, i64 m, i64 q, double zeta);
CorrelationReport correlation_integrals(const CorrelationParams& p, unsigned threads = 1);
// X values spanning the regimes for the given parameters (including 0).
std::vector<double> default_x_grid(const CorrelationParams& p);

}  // namespace oscsum
