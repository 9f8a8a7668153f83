#include "oscsum/experiments.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <memory>
#include <cmath>
#include <random>
#include <sstream>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/quadrature.hpp"

namespace oscsum {

// ------------------------------------------------------------- phases ----

PhaseFamily PhaseFamily::logarithmic(double c, double t) {
    require(std::isfinite(c) && c != 0, "PhaseFamily: c must be a nonzero real");
    require(std::isfinite(t) && t >= 0, "PhaseFamily: t must be >= 0");
    PhaseFamily p;
    p.kind = Kind::log;
    p.c = c;
    p.t = t;
    return p;
}

PhaseFamily PhaseFamily::power(double c, double beta, double t) {
    require(std::isfinite(c) && c != 0, "PhaseFamily: c must be a nonzero real");
    require(beta > 0 && beta <= 1.0 / 3 + 1e-15, "PhaseFamily: beta must lie in (0, 1/3]");
    require(std::isfinite(t) && t >= 0, "PhaseFamily: t must be >= 0");
    PhaseFamily p;
    p.kind = Kind::power;
    p.c = c;
    p.beta = beta;
    p.t = t;
    return p;
}

PhaseFamily PhaseFamily::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string s; std::getline(ss, s, ':');) parts.push_back(s);
    auto num = [&](std::size_t i) {
        try {
            std::size_t used = 0;
            double v = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument("");
            return v;
        } catch (const std::exception&) {
            throw ValidationError("phase spec '" + text + "': bad number '" + parts[i] + "'");
        }
    };
    if (parts.size() == 3 && parts[0] == "log") return logarithmic(num(1), num(2));
    if (parts.size() == 4 && parts[0] == "power") return power(num(1), num(2), num(3));
    throw ValidationError("unknown phase spec '" + text + "' (expected log:c:t or power:c:beta:t)");
}

double PhaseFamily::value(double x) const { return derivative(x, 0); }

double PhaseFamily::derivative(double x, int k) const {
    require(x > 0, "PhaseFamily: x must be positive");
    require(k >= 0 && k <= 3, "PhaseFamily: derivative order must lie in [0, 3]");
    if (kind == Kind::log) {
        switch (k) {
            case 0: return c * std::log(x);
            case 1: return c / x;
            case 2: return -c / (x * x);
            default: return 2 * c / (x * x * x);
        }
    }
    double f = c;
    for (int j = 0; j < k; ++j) f *= beta - j;
    return f * std::pow(x, beta - k);
}

double PhaseFamily::sign_product(double x) const {
    // (phi(x^3))'' = 9 x^4 phi''(x^3) + 6 x phi'(x^3)
    double x3 = x * x * x;
    return derivative(x, 1) * (9 * x * x3 * derivative(x3, 2) + 6 * x * derivative(x3, 1));
}

bool PhaseFamily::sign_condition() const {
    // log: -3 c^2 / x^3; power: 3 c^2 beta^2 (3 beta - 1) x^{4 beta - 3}
    return kind == Kind::log || 3 * beta - 1 <= 1e-15;
}

PhaseFamily PhaseFamily::with_t(double t_new) const {
    require(std::isfinite(t_new) && t_new >= 0, "PhaseFamily: t must be >= 0");
    PhaseFamily p = *this;
    p.t = t_new;
    return p;
}

std::string PhaseFamily::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::log)
        os << "log:" << c << ":" << t;
    else
        os << "power:" << c << ":" << beta << ":" << t;
    return os.str();
}

// -------------------------------------------------------------- tables ----

namespace {

i64 isqrt(i64 n) {
    i64 r = i64(std::sqrt(double(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

}  // namespace

ProductTable ProductTable::build(const GL2Form& f, const GL3Form& pi, i64 limit, unsigned threads) {
    require(limit >= 1, "ProductTable: limit must be >= 1");
    require(f.limit >= limit, "ProductTable: GL(2) table built to " + std::to_string(f.limit) + ", need " +
                                  std::to_string(limit));
    require(pi.limit >= limit, "ProductTable: GL(3) table built to " + std::to_string(pi.limit) + ", need " +
                                   std::to_string(limit));
    ProductTable t;
    t.limit_ = limit;
    t.id_ = f.id + " x sym2";
    const i64 R = isqrt(limit);
    t.rows_.resize(std::size_t(R + 1));
    for (i64 r = 1; r <= R; ++r) {
        const i64 len = limit / (r * r);
        auto& row = t.rows_[std::size_t(r)];
        row.assign(std::size_t(len + 1), 0.0);
        const std::size_t chunk = 4096;
        const std::size_t chunks = (std::size_t(len) + chunk) / chunk;
        parallel_for(chunks, threads, [&](std::size_t c) {
            i64 lo = std::max<i64>(1, i64(c * chunk)), hi = std::min<i64>(len, i64((c + 1) * chunk) - 1);
            for (i64 n = lo; n <= hi; ++n) row[std::size_t(n)] = pi.A(n, r) * f.lambda(n);
        });
    }
    return t;
}

ProductTable ProductTable::constant(i64 limit, double value) {
    require(limit >= 1, "ProductTable: limit must be >= 1");
    ProductTable t;
    t.limit_ = limit;
    t.id_ = "constant";
    const i64 R = isqrt(limit);
    t.rows_.resize(std::size_t(R + 1));
    for (i64 r = 1; r <= R; ++r) {
        t.rows_[std::size_t(r)].assign(std::size_t(limit / (r * r) + 1), value);
        t.rows_[std::size_t(r)][0] = 0;
    }
    return t;
}

ProductTable ProductTable::random_signs(i64 limit, u64 seed) {
    require(limit >= 1, "ProductTable: limit must be >= 1");
    ProductTable t;
    t.limit_ = limit;
    t.id_ = "random-signs:" + std::to_string(seed);
    std::mt19937_64 rng(seed);
    const i64 R = isqrt(limit);
    t.rows_.resize(std::size_t(R + 1));
    for (i64 r = 1; r <= R; ++r) {
        auto& row = t.rows_[std::size_t(r)];
        row.assign(std::size_t(limit / (r * r) + 1), 0.0);
        for (std::size_t n = 1; n < row.size(); ++n) row[n] = (rng() >> 63) ? 1.0 : -1.0;
    }
    return t;
}

// ---------------------------------------------------------------- sums ----

namespace {

struct RowSum {
    std::complex<double> value;
    double mass = 0;
};

// Shared driver: rows r = 1..R, n over [lo(r), hi(r)], term(r, n) -> (coef * weight, phase in cycles).
template <class Range, class Term>
SumResult run_rows(double N, double t, i64 R, unsigned threads, Range range, Term term) {
    std::vector<RowSum> rows(std::size_t(R + 1));
    parallel_for(std::size_t(R), threads, [&](std::size_t i) {
        const i64 r = i64(i) + 1;
        auto [lo, hi] = range(r);
        Accumulator<std::complex<double>> acc;
        Accumulator<double> mass;
        for (i64 n = lo; n <= hi; ++n) {
            auto [cw, ph] = term(r, n);
            acc.add(cw * e(ph));
            mass.add(std::abs(cw));
        }
        rows[i + 1] = {acc.value(), mass.value()};
    });
    Accumulator<std::complex<double>> acc;
    Accumulator<double> mass;
    for (i64 r = 1; r <= R; ++r) {
        acc.add(rows[std::size_t(r)].value);
        mass.add(rows[std::size_t(r)].mass);
    }
    SumResult res;
    res.N = N;
    res.t = t;
    res.value = acc.value();
    res.trivial_mass = mass.value();
    res.ratio = res.trivial_mass > 0 ? std::abs(res.value) / res.trivial_mass : 0.0;
    return res;
}

}  // namespace

SumResult twisted_sum(const ProductTable& table, const PhaseFamily& phase, double N, const SmoothWindow& V, i64 r_cap,
                      unsigned threads) {
    require(std::isfinite(N) && N >= 1, "twisted_sum: need N >= 1");
    require(r_cap >= 0, "twisted_sum: r_cap must be >= 0");
    const double top = N * V.s1();
    require(double(table.limit()) >= std::floor(top),
            "twisted_sum: coefficient table covers r^2 n <= " + std::to_string(table.limit()) + " but the window reaches " +
                std::to_string(i64(std::floor(top))));
    i64 R = isqrt(i64(std::floor(top)));
    if (r_cap > 0) R = std::min(R, r_cap);
    const double t = phase.t;
    return run_rows(
        N, t, R, threads,
        [&](i64 r) {
            const double r2 = double(r * r);
            i64 lo = std::max<i64>(1, i64(std::ceil(N * V.s0() / r2)));
            i64 hi = std::min<i64>(i64(std::floor(top / r2)), i64(table.row(r).size()) - 1);
            return std::pair<i64, i64>{lo, hi};
        },
        [&](i64 r, i64 n) {
            const double x = double(r * r * n) / N;
            const double cw = table(r, n) * V(x);
            return std::pair<double, double>{cw, t == 0 ? 0.0 : t * phase.value(x)};
        });
}

SumResult twisted_sum(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase, double N, const SmoothWindow& V,
                      i64 r_cap, unsigned threads) {
    require(std::isfinite(N) && N >= 1, "twisted_sum: need N >= 1");
    auto table = ProductTable::build(f, pi, i64(std::floor(N * V.s1())), threads);
    return twisted_sum(table, phase, N, V, r_cap, threads);
}

SumResult sharp_cut_sum(const ProductTable& table, const PhaseFamily& phase, double N, unsigned threads) {
    require(std::isfinite(N) && N >= 1, "sharp_cut_sum: need N >= 1");
    const i64 lo_m = i64(std::ceil(N)), hi_m = i64(std::floor(2 * N));
    require(table.limit() >= hi_m, "sharp_cut_sum: coefficient table covers r^2 n <= " + std::to_string(table.limit()) +
                                       " but 2N = " + std::to_string(hi_m));
    const double t = phase.t;
    return run_rows(
        N, t, isqrt(hi_m), threads,
        [&](i64 r) {
            const i64 r2 = r * r;
            return std::pair<i64, i64>{std::max<i64>(1, (lo_m + r2 - 1) / r2), hi_m / r2};
        },
        [&](i64 r, i64 n) {
            const double x = double(r * r * n) / N;
            return std::pair<double, double>{table(r, n), t == 0 ? 0.0 : t * phase.value(x)};
        });
}

SumResult sharp_cut_sum(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase, double N, unsigned threads) {
    require(std::isfinite(N) && N >= 1, "sharp_cut_sum: need N >= 1");
    auto table = ProductTable::build(f, pi, i64(std::floor(2 * N)), threads);
    return sharp_cut_sum(table, phase, N, threads);
}

// --------------------------------------------------------------- fits ----

std::vector<double> dyadic_grid(int lo, int hi) {
    require(lo <= hi && lo >= 0 && hi <= 62, "dyadic_grid: need 0 <= lo <= hi <= 62");
    std::vector<double> g;
    for (int k = lo; k <= hi; ++k) g.push_back(std::ldexp(1.0, k));
    return g;
}

namespace {

ExponentFit fit_rows(std::vector<SumResult> rows) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
        if (!(std::abs(r.value) > 0))
            throw ValidationError("cancellation_exponent: the sum vanishes at N = " + std::to_string(r.N));
        x.push_back(std::log2(r.N));
        y.push_back(std::log2(std::abs(r.value)));
    }
    LineFit lf = fit_line(x, y);
    ExponentFit out;
    out.exponent = lf.slope;
    out.slope_stderr = lf.slope_stderr;
    out.rows = std::move(rows);
    return out;
}

}  // namespace

ExponentFit cancellation_exponent(const ProductTable& table, const PhaseFamily& phase, const std::vector<double>& grid,
                                  double t, const SmoothWindow& V, unsigned threads) {
    require(grid.size() >= 5, "cancellation_exponent: need at least 5 grid points");
    PhaseFamily ph = phase.with_t(t);
    std::vector<SumResult> rows;
    for (double N : grid) rows.push_back(twisted_sum(table, ph, N, V, 0, threads));
    return fit_rows(std::move(rows));
}

ExponentFit cancellation_exponent(const GL2Form& f, const GL3Form& pi, const PhaseFamily& phase,
                                  const std::vector<double>& grid, double t, unsigned threads) {
    require(grid.size() >= 5, "cancellation_exponent: need at least 5 grid points");
    const SmoothWindow V = SmoothWindow::bump(1, 2);
    double top = *std::max_element(grid.begin(), grid.end());
    auto table = ProductTable::build(f, pi, i64(std::floor(top * V.s1())), threads);
    return cancellation_exponent(table, phase, grid, t, V, threads);
}

ExponentFit random_sign_exponent(const PhaseFamily& phase, const std::vector<double>& grid, int trials, u64 seed,
                                 unsigned threads) {
    require(trials >= 2, "random_sign_exponent: need at least 2 trials");
    require(grid.size() >= 5, "random_sign_exponent: need at least 5 grid points");
    const SmoothWindow V = SmoothWindow::bump(1, 2);
    const i64 limit = i64(std::floor(*std::max_element(grid.begin(), grid.end()) * V.s1()));
    std::vector<double> slopes;
    ExponentFit first;
    for (int k = 0; k < trials; ++k) {
        auto table = ProductTable::random_signs(limit, seed + u64(k));
        auto fit = cancellation_exponent(table, phase, grid, phase.t, V, threads);
        if (k == 0) first = fit;
        slopes.push_back(fit.exponent);
    }
    double mean = 0;
    for (double s : slopes) mean += s;
    mean /= double(slopes.size());
    double var = 0;
    for (double s : slopes) var += (s - mean) * (s - mean);
    var /= double(slopes.size() - 1);
    first.exponent = mean;
    first.slope_stderr = std::sqrt(var / double(slopes.size()));
    return first;
}

// ------------------------------------------------------------- Wilton ----

namespace {

WiltonResult finish_wilton(i64 X, std::vector<std::complex<double>> sums, const std::function<double(std::size_t)>& alpha) {
    WiltonResult w;
    const double norm = std::sqrt(double(X)) * std::log(2.0 * double(X));
    for (std::size_t i = 0; i < sums.size(); ++i) {
        double ratio = std::abs(sums[i]) / norm;
        if (ratio > w.max_ratio) {
            w.max_ratio = ratio;
            w.argmax_alpha = alpha(i);
        }
    }
    w.sums = std::move(sums);
    return w;
}

}  // namespace

WiltonResult wilton_scan(const GL2Form& f, i64 X, const std::vector<double>& alphas, unsigned threads) {
    require(X >= 1 && X <= f.limit, "wilton_scan: need 1 <= X <= table limit " + std::to_string(f.limit));
    require(!alphas.empty(), "wilton_scan: empty alpha grid");
    std::vector<std::complex<double>> sums(alphas.size());
    parallel_for(alphas.size(), threads, [&](std::size_t i) {
        Accumulator<std::complex<double>> acc;
        for (i64 n = 1; n <= X; ++n) acc.add(f.lambda(n) * e(double(n) * alphas[i]));
        sums[i] = acc.value();
    });
    return finish_wilton(X, std::move(sums), [&](std::size_t i) { return alphas[i]; });
}

WiltonResult wilton_scan_rational(const GL2Form& f, i64 X, i64 G, unsigned threads) {
    require(X >= 1 && X <= f.limit, "wilton_scan: need 1 <= X <= table limit " + std::to_string(f.limit));
    require(G >= 1 && G <= (i64(1) << 31), "wilton_scan: need 1 <= G <= 2^31");
    std::vector<std::complex<double>> roots(static_cast<std::size_t>(G));
    for (i64 k = 0; k < G; ++k) roots[std::size_t(k)] = e(double(k) / double(G));
    std::vector<std::complex<double>> sums(static_cast<std::size_t>(G));
    parallel_for(std::size_t(G), threads, [&](std::size_t j) {
        Accumulator<std::complex<double>> acc;
        i64 k = 0;  // n j mod G
        for (i64 n = 1; n <= X; ++n) {
            k += i64(j);
            if (k >= G) k -= G;
            acc.add(f.lambda(n) * roots[std::size_t(k)]);
        }
        sums[j] = acc.value();
    });
    return finish_wilton(X, std::move(sums), [&](std::size_t i) { return double(i) / double(G); });
}

// -------------------------------------------------- Friedlander-Iwaniec ----

FIResult fi_partial_sum(const ProductTable& table, double x, i64 N, const FIOptions& opt) {
    require(std::isfinite(x) && x >= 0, "fi_partial_sum: x must be >= 0");
    require(N >= 1, "fi_partial_sum: N must be >= 1");
    require(opt.grid_lo >= 1 && opt.grid_hi >= opt.grid_lo + 2 && opt.grid_hi <= 40,
            "fi_partial_sum: need 1 <= grid_lo and at least 3 grid points");
    const i64 xi = i64(std::floor(x));
    const i64 top = i64(1) << opt.grid_hi;
    require(table.limit() >= std::max({xi, N, top}),
            "fi_partial_sum: coefficient table covers " + std::to_string(table.limit()) + ", need " +
                std::to_string(std::max({xi, N, top})));
    FIResult res;

    auto rowsum = [&](i64 bound, auto term) {
        Accumulator<double> total;
        for (i64 r = 1; r * r <= bound; ++r) {
            Accumulator<double> acc;
            for (i64 n = 1; n <= bound / (r * r); ++n) acc.add(term(r, n));
            total.add(acc.value());
        }
        return total.value();
    };
    // lambda_pi(r, n) = lambda_pi(n, r) for the self-dual lift, to the last bit
    res.direct = xi >= 1 ? rowsum(xi, [&](i64 r, i64 n) { return table(r, n); }) : 0.0;
    res.dual = rowsum(N, [&](i64 r, i64 n) {
        const double m = double(r * r * n);
        return table(r, n) * std::pow(m, -7.0 / 12.0) * std::cos(12 * kPi * std::pow(m * x, 1.0 / 6.0));
    });

    // A(y) at every integer y <= top, then block suprema over (X/2, X]
    std::vector<double> coef(std::size_t(top + 1), 0.0);
    for (i64 r = 1; r * r <= top; ++r)
        for (i64 n = 1; n <= top / (r * r); ++n) coef[std::size_t(r * r * n)] += table(r, n);
    Accumulator<double> run;
    std::vector<double> A(std::size_t(top + 1), 0.0);
    for (i64 y = 1; y <= top; ++y) {
        run.add(coef[std::size_t(y)]);
        A[std::size_t(y)] = run.value();
    }
    std::vector<double> lx, ly;
    for (int k = opt.grid_lo; k <= opt.grid_hi; ++k) {
        const i64 X = i64(1) << k;
        double sup = 0;
        for (i64 y = X / 2 + 1; y <= X; ++y) sup = std::max(sup, std::abs(A[std::size_t(y)]));
        res.grid.push_back(double(X));
        res.block_sup.push_back(sup);
        if (sup > 0) {
            lx.push_back(double(k));
            ly.push_back(std::log2(sup));
        }
    }
    if (lx.size() >= 3) {
        LineFit lf = fit_line(lx, ly);
        res.fitted_exponent = lf.slope;
        res.fit_stderr = lf.slope_stderr;
    }
    return res;
}

FIResult fi_partial_sum(const GL2Form& f, const GL3Form& pi, double x, i64 N, const FIOptions& opt) {
    require(std::isfinite(x) && x >= 0, "fi_partial_sum: x must be >= 0");
    const i64 need = std::max({i64(std::floor(x)), N, i64(1) << std::clamp(opt.grid_hi, 0, 40)});
    auto table = ProductTable::build(f, pi, need);
    return fi_partial_sum(table, x, N, opt);
}

// -------------------------------------------------------- correlations ----

const char* to_string(IRegime r) {
    switch (r) {
        case IRegime::negligible: return "negligible";
        case IRegime::small_x: return "small_x";
        case IRegime::middle: return "middle";
        case IRegime::large_x: return "large_x";
    }
    return "?";
}

namespace {

const SmoothWindow& inert_factor() {
    static const SmoothWindow g = SmoothWindow::bump(0.5, 2.5);
    return g;
}

double modified_weight(const CorrelationParams& p, double y) {
    double v = p.V(y);
    return v == 0 ? 0.0 : v * inert_factor()(y) * std::pow(y, 7.0 / 12.0);
}

// sup |t phi'| on the window; |phi'| decreases for both families
double twist_speed(const CorrelationParams& p) {
    return std::abs(p.phase.t * p.phase.derivative(p.V.s0(), 1));
}

// frak_J(n, m, q) for all n up to n_max against one set of y nodes:
//   J(n) = sum_i base_i e(kappa_i n^{1/3}).
class JTable {
public:
    JTable(const CorrelationParams& p, int sign, i64 m, i64 q, double n_max) {
        const double a = p.V.s0(), b = p.V.s1();
        const double speed = twist_speed(p) + std::sqrt(p.N0 * double(m) / a) / double(q) +
                             std::cbrt(p.N0 * n_max / double(p.r)) * std::pow(a, -2.0 / 3) / double(q);
        const int panels = int(std::ceil(speed * (b - a))) + 16;
        const GaussRule& g = gauss_legendre(20);
        const double h = (b - a) / panels;
        for (int k = 0; k < panels; ++k)
            for (std::size_t j = 0; j < g.x.size(); ++j) {
                double y = a + h * (k + 0.5 * (g.x[j] + 1));
                double w = modified_weight(p, y) * 0.5 * h * g.w[j];
                if (w == 0) continue;
                double ph = p.phase.t * p.phase.value(y) + sign * 2.0 * std::sqrt(p.N0 * double(m) * y) / double(q);
                base_.push_back(w * e(ph));
                kappa_.push_back(3.0 * std::cbrt(p.N0 * y / double(p.r)) / double(q));
            }
    }
    std::complex<double> operator()(double n) const {
        const double c = std::cbrt(n);
        std::complex<double> s = 0;
        for (std::size_t i = 0; i < base_.size(); ++i) s += base_[i] * e(kappa_[i] * c);
        return s;
    }

private:
    std::vector<std::complex<double>> base_;
    std::vector<double> kappa_;
};

// Samples of a smooth function on GL-20 panels; integrals against e(-X xi)
// subdivide each panel and interpolate (barycentric) when X is large.
class PanelSamples {
public:
    PanelSamples(double a, double b, int panels) : a_(a), h_((b - a) / panels), panels_(panels) {
        const GaussRule& g = gauss_legendre(20);
        x_ = g.x;
        w_ = g.w;
        bary_.resize(x_.size());
        for (std::size_t j = 0; j < x_.size(); ++j) {
            double d = 1;
            for (std::size_t k = 0; k < x_.size(); ++k)
                if (k != j) d *= x_[j] - x_[k];
            bary_[j] = 1 / d;
        }
        values_.assign(std::size_t(panels) * x_.size(), 0.0);
    }
    std::size_t size() const { return values_.size(); }
    double node(std::size_t i) const {
        return a_ + h_ * (double(i / x_.size()) + 0.5 * (x_[i % x_.size()] + 1));
    }
    std::complex<double>& value(std::size_t i) { return values_[i]; }

    std::complex<double> integrate(double X) const {
        const std::size_t n = x_.size();
        const int sub = std::max(1, int(std::ceil(std::abs(X) * h_)));
        Accumulator<std::complex<double>> acc;
        for (int k = 0; k < panels_; ++k) {
            const std::complex<double>* v = &values_[std::size_t(k) * n];
            const double left = a_ + h_ * k;
            if (sub == 1) {
                for (std::size_t j = 0; j < n; ++j)
                    acc.add(v[j] * e(-X * (left + 0.5 * h_ * (x_[j] + 1))) * (0.5 * h_ * w_[j]));
                continue;
            }
            for (int s = 0; s < sub; ++s) {
                for (std::size_t j = 0; j < n; ++j) {
                    // position inside the panel, in [-1, 1]
                    double u = -1 + (2.0 * s + x_[j] + 1) / sub;
                    std::complex<double> num = 0;
                    double den = 0;
                    bool hit = false;
                    for (std::size_t i = 0; i < n; ++i) {
                        double d = u - x_[i];
                        if (d == 0) {
                            num = v[i];
                            den = 1;
                            hit = true;
                            break;
                        }
                        num += v[i] * (bary_[i] / d);
                        den += bary_[i] / d;
                    }
                    std::complex<double> val = hit ? num : num / den;
                    double xi = left + 0.5 * h_ * (u + 1);
                    acc.add(val * e(-X * xi) * (0.5 * h_ * w_[j] / sub));
                }
            }
        }
        return acc.value();
    }

private:
    double a_, h_;
    int panels_;
    std::vector<double> x_, w_, bary_;
    std::vector<std::complex<double>> values_;
};

void validate(const CorrelationParams& p) {
    require(p.N0 > 0 && p.N1 > 0 && p.C > 0 && p.M > 0, "correlation_integrals: N0, N1, C, M must be positive");
    require(p.r >= 1 && p.m >= 1 && p.mp >= 1 && p.q1 >= 1 && p.q2 >= 1 && p.q2p >= 1,
            "correlation_integrals: r, m, m', q1, q2, q2' must be positive integers");
    require(p.phase.t > 0, "correlation_integrals: t must be positive");
    require(p.V.smooth(), "correlation_integrals: the window must be smooth");
}

}  // namespace

std::complex<double> frak_j(const CorrelationParams& p, int sign, double n, i64 m, i64 q) {
    validate(p);
    require(sign == 1 || sign == -1, "frak_j: sign must be +1 or -1");
    require(n > 0, "frak_j: argument must be positive");
    return JTable(p, sign, m, q, n)(n);
}

std::complex<double> frak_phi(const CorrelationParams& p, int sign, i64 m, i64 q, double zeta) {
    validate(p);
    require(sign == 1 || sign == -1, "frak_phi: sign must be +1 or -1");
    const double Q = p.Q > 0 ? p.Q : std::sqrt(p.N0) / std::pow(p.phase.t, 0.4);
    const double a = p.V.s0(), b = p.V.s1();
    const double lin = zeta * p.N0 / (double(q) * Q);
    const double speed = twist_speed(p) + std::abs(lin) + std::sqrt(p.N0 * double(m) / a) / double(q);
    const int panels = int(std::ceil(speed * (b - a))) + 16;
    return integrate_composite(
        [&](double y) {
            double v = p.V(y);
            if (v == 0) return std::complex<double>(0);
            double ph = p.phase.t * p.phase.value(y) + lin * y + sign * 2.0 * std::sqrt(double(m) * p.N0 * y) / double(q);
            return v * std::pow(y, -0.25) * e(ph);
        },
        a, b, panels, 20);
}

std::vector<double> default_x_grid(const CorrelationParams& p) {
    const double lambda = std::cbrt(p.N0 * p.N1 / (p.C * p.C * p.C * double(p.r)));
    const double far = 10 * std::pow(lambda, 1.1);
    std::vector<double> g{0.0};
    for (double X = 0.5; X < far; X *= std::sqrt(2.0)) g.push_back(X);
    for (double f : {1.0, 1.3, 1.7, 2.2}) g.push_back(far * f);
    return g;
}

CorrelationReport correlation_integrals(const CorrelationParams& p, unsigned threads) {
    validate(p);
    CorrelationReport rep;
    const double t = p.phase.t;
    rep.lambda = std::cbrt(p.N0 * p.N1 / (p.C * p.C * p.C * double(p.r)));
    rep.P = std::max(t, std::sqrt(p.N0 * p.M) / p.C);
    rep.Q = p.Q > 0 ? p.Q : std::sqrt(p.N0) / std::pow(t, 0.4);
    const double lambda = rep.lambda, P = rep.P;

    if (lambda < 10) rep.violations.push_back("lambda = " + std::to_string(lambda) + " < 10");
    if (!p.phase.sign_condition()) rep.violations.push_back("phase violates phi'(x) (phi(x^3))'' <= 0");
    if (p.phase.derivative(1.0, 1) >= 0) rep.violations.push_back("phase needs phi' < 0");
    rep.admissible = rep.violations.empty();

    const i64 qa = p.q1 * p.q2, qb = p.q1 * p.q2p;
    const bool same = (p.m == p.mp && qa == qb);

    // xi in [2/3, 3] against the plateau weight equal to 1 on [1, 2]
    const SmoothWindow weight = SmoothWindow::plateau(2.0 / 3, 3, 1.0 / 3);
    const double xa = weight.s0(), xb = weight.s1();
    const double n_max = p.N1 * xb;
    auto band = [&](i64 q) {
        // d/dxi of (3/q)(N0 N1 xi y / r)^{1/3} at the worst corner
        return std::cbrt(p.N0 * p.N1 * p.V.s1() / double(p.r)) * std::pow(xa, -2.0 / 3) / double(q);
    };
    const int panels = int(std::ceil((band(qa) + band(qb)) * (xb - xa))) + 48;

    std::array<PanelSamples, 2> F{PanelSamples(xa, xb, panels), PanelSamples(xa, xb, panels)};
    double jmax = 0;
    for (int s = 0; s < 2; ++s) {
        const int sign = s == 0 ? 1 : -1;
        JTable ja(p, sign, p.m, qa, n_max);
        std::unique_ptr<JTable> jb_own;
        if (!same) jb_own = std::make_unique<JTable>(p, sign, p.mp, qb, n_max);
        const JTable& jb = same ? ja : *jb_own;
        std::vector<double> jm(F[s].size(), 0.0);
        parallel_for(F[s].size(), threads, [&](std::size_t i) {
            const double xi = F[s].node(i);
            const double w = weight(xi);
            std::complex<double> A = ja(p.N1 * xi);
            std::complex<double> B = same ? A : jb(p.N1 * xi);
            jm[i] = std::max(std::abs(A), std::abs(B));
            F[s].value(i) = w * A * std::conj(B);
        });
        for (double v : jm) jmax = std::max(jmax, v);
    }
    rep.j_constant = jmax * std::sqrt(std::max(t, lambda));

    // L^2 average against a bump in xi, argument N1 xi^3
    {
        const SmoothWindow psi = SmoothWindow::bump(0.9, 1.4);
        double worst = 0;
        for (int sign : {1, -1})
            for (auto [m, q] : {std::pair<i64, i64>{p.m, qa}, std::pair<i64, i64>{p.mp, qb}}) {
                JTable j(p, sign, m, q, p.N1 * std::pow(psi.s1(), 3));
                const double bw = 3 * std::cbrt(p.N0 * p.N1 * p.V.s1() / double(p.r)) / double(q) * 3 * psi.s1();
                const int np = int(std::ceil(bw * (psi.s1() - psi.s0()))) + 16;
                double v = integrate_composite(
                               [&](double xi) {
                                   double w = psi(xi);
                                   if (w == 0) return std::complex<double>(0);
                                   return std::complex<double>(w * std::norm(j(p.N1 * xi * xi * xi)), 0);
                               },
                               psi.s0(), psi.s1(), np, 20)
                               .real();
                worst = std::max(worst, v);
            }
        rep.l2_constant = worst * std::max(t, lambda);
    }

    // Phi^{+-} on zeta samples where |zeta| N0 / (C Q) <= P / 10
    {
        const double zs = 0.1 * P * p.C * rep.Q / p.N0;
        for (auto [m, q] : {std::pair<i64, i64>{p.m, qa}, std::pair<i64, i64>{p.mp, qb}})
            for (double z : {0.0, zs, -zs}) {
                rep.phi_minus_max = std::max(rep.phi_minus_max, std::abs(frak_phi(p, -1, m, q, z)));
                rep.phi_plus_constant = std::max(rep.phi_plus_constant, std::abs(frak_phi(p, 1, m, q, z)) * std::sqrt(P));
            }
    }

    const std::vector<double> grid = p.X_grid.empty() ? default_x_grid(p) : p.X_grid;
    const double far = 10 * std::pow(lambda, 1.1);
    const double small_end = lambda * lambda * lambda / (P * P), large_start = lambda * lambda / P;
    rep.rows.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        CorrelationRow row;
        row.X = grid[i];
        row.plus = F[0].integrate(row.X);
        row.minus = F[1].integrate(row.X);
        const double ax = std::abs(row.X);
        if (ax >= far)
            row.regime = IRegime::negligible;
        else if (ax <= small_end && ax <= large_start)
            row.regime = IRegime::small_x;
        else if (ax >= large_start)
            row.regime = IRegime::large_x;
        else
            row.regime = IRegime::middle;
        const double ip = std::abs(row.plus);
        switch (row.regime) {
            case IRegime::negligible: row.scaled = std::max(ip, std::abs(row.minus)); break;
            case IRegime::small_x: row.scaled = ip * P; break;
            case IRegime::middle: row.scaled = ip * P * std::cbrt(ax); break;
            case IRegime::large_x: row.scaled = ip * P * std::sqrt(ax); break;
        }
        rep.rows[i] = row;
    });
    for (const auto& row : rep.rows) {
        switch (row.regime) {
            case IRegime::negligible: rep.negligible_max = std::max(rep.negligible_max, row.scaled); break;
            case IRegime::small_x: rep.small_x_constant = std::max(rep.small_x_constant, row.scaled); break;
            case IRegime::middle: rep.middle_constant = std::max(rep.middle_constant, row.scaled); break;
            case IRegime::large_x: rep.large_x_constant = std::max(rep.large_x_constant, row.scaled); break;
        }
        if (row.X == 0 && p.q2 == p.q2p) {
            double gap = std::abs(std::sqrt(double(p.m)) - std::sqrt(double(p.mp)));
            double env = 1 / t;
            if (gap > 0) env = std::min(env, p.C / (lambda * std::sqrt(p.N0) * gap));
            rep.zero_constant = std::max(std::abs(row.plus), std::abs(row.minus)) / env;
        }
    }
    return rep;
}

}  // namespace oscsum
