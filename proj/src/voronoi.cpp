#include "oscsum/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "oscsum/charsums.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/oscillatory.hpp"
#include "oscsum/quadrature.hpp"
#include "oscsum/special.hpp"

namespace oscsum {

namespace {

const cplx kI(0, 1);

cplx i_power(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return 1;
        case 1: return kI;
        case 2: return -1;
        default: return -kI;
    }
}

// Composite Gauss-Legendre nodes over the window's smooth pieces. `cycles`
// gives the number of oscillations of the integrand on [a, b].
void window_nodes(const SmoothWindow& h, const std::function<double(double, double)>& cycles, int min_panels,
                  std::vector<double>& ys, std::vector<double>& ws) {
    const GaussRule& g = gauss_legendre(20);
    auto bp = h.breakpoints();
    for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
        const double a = bp[s], b = bp[s + 1];
        // a quarter cycle per panel
        const double want = std::ceil(4 * cycles(a, b));
        const int panels = static_cast<int>(std::max<double>(min_panels, want));
        const double step = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            const double c = a + (p + 0.5) * step;
            for (std::size_t i = 0; i < g.x.size(); ++i) {
                double y = c + 0.5 * step * g.x[i];
                double v = h(y);
                if (v == 0) continue;
                ys.push_back(y);
                ws.push_back(0.5 * step * g.w[i] * v);
            }
        }
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- GL(2) ----

HankelGrid::HankelGrid(const SmoothWindow& h, int kappa, double x_max) : x_max_(x_max) {
    require(kappa >= 2 && kappa % 2 == 0, "hankel_gl2: weight must be an even integer >= 2");
    require(x_max >= 0 && x_max <= 1e8, "hankel_gl2: argument must lie in [0, 1e8]");
    order_ = kappa - 1;
    pref_ = kTwoPi * i_power(kappa);
    if (h.amplitude() == 0) return;
    const double rx = std::sqrt(std::max(x_max, 1.0));
    window_nodes(
        h, [&](double a, double b) { return 2 * rx * (std::sqrt(b) - std::sqrt(a)); }, 24, y_, w_);
}

cplx HankelGrid::operator()(double x) const {
    require(x >= 0, "hankel_gl2: x must be nonnegative");
    require(x <= x_max_ * (1 + 1e-12) || x <= 1, "HankelGrid: argument beyond the grid's x_max");
    if (y_.empty()) return 0;
    const double c = 4 * kPi * std::sqrt(x);
    long double s = 0;
    for (std::size_t k = 0; k < y_.size(); ++k) s += w_[k] * bessel_j(order_, c * std::sqrt(y_[k]));
    return pref_ * static_cast<double>(s);
}

cplx hankel_gl2(const SmoothWindow& h, int kappa, double x) {
    require(x >= 0, "hankel_gl2: x must be nonnegative");
    return HankelGrid(h, kappa, x)(x);
}

std::array<cplx, 2> hankel_gl2_constants(int kappa, int j) {
    require(kappa >= 2 && kappa % 2 == 0, "hankel_gl2_constants: weight must be an even integer >= 2");
    require(j >= 0, "hankel_gl2_constants: index must be nonnegative");
    const int v = kappa - 1;
    // 2 pi i^k sqrt(2/(pi z)) / 2 at z = 4 pi sqrt(xy) leaves i^k / sqrt 2 (xy)^{-1/4}
    const cplx base = i_power(kappa) / std::sqrt(2.0);
    const double sym = hankel_symbol(v, j);
    const cplx step(0, 1 / (8 * kPi));
    cplx pw = 1, pw_conj = 1;
    for (int i = 0; i < j; ++i) {
        pw *= step;
        pw_conj *= std::conj(step);
    }
    const double frac = (2.0 * v + 1) / 8;
    return {base * e(-frac) * sym * pw, base * e(frac) * sym * pw_conj};
}

namespace {

cplx hankel_asymptotic_value(const SmoothWindow& h, int kappa, double x, int J) {
    if (h.amplitude() == 0) return 0;
    std::vector<double> ys, ws;
    const double rx = std::sqrt(x);
    window_nodes(h, [&](double a, double b) { return 2 * rx * (std::sqrt(b) - std::sqrt(a)); }, 24, ys, ws);
    std::vector<std::array<cplx, 2>> cd;
    for (int j = 0; j <= J; ++j) cd.push_back(hankel_gl2_constants(kappa, j));
    Accumulator<cplx> acc;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double xy = x * ys[k];
        const cplx osc = e(2 * std::sqrt(xy));
        cplx s = 0;
        double pw = 1;
        for (int j = 0; j <= J; ++j) {
            s += (cd[j][0] * osc + cd[j][1] * std::conj(osc)) * pw;
            pw /= std::sqrt(xy);
        }
        acc.add(ws[k] * std::pow(ys[k], -0.25) * s);
    }
    return std::pow(x, -0.25) * acc.value();
}

double abs_moment(const SmoothWindow& h, double p) {
    return integrate_composite([&](double y) { return cplx(std::abs(h(y)) * std::pow(y, p), 0); }, h.s0(), h.s1(),
                               256, 20)
        .real();
}

double hankel_cap_constant(int kappa, int J) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({kappa, J});
    if (it != cache.end()) return it->second;
    // Two reference windows unlike the ones used in tests; arguments from 10
    // to 1e4. The first omitted term sets a floor.
    auto cd = hankel_gl2_constants(kappa, J + 1);
    double C = 2 * (std::abs(cd[0]) + std::abs(cd[1]));
    const double p = -0.5 * J - 0.75;
    for (const auto& w : {SmoothWindow::plateau(0.5, 3, 0.5), SmoothWindow::log_gaussian(2, 0.3)}) {
        const double mom = abs_moment(w, p);
        for (int i = 0; i <= 24; ++i) {
            double x = 10 * std::pow(1e3, i / 24.0);
            double dev = std::abs(hankel_asymptotic_value(w, kappa, x, J) - hankel_gl2(w, kappa, x));
            C = std::max(C, 2 * dev / (std::pow(x, p) * mom));
        }
    }
    cache[{kappa, J}] = C;
    return C;
}

}  // namespace

AsymptoticValue hankel_gl2_asymptotic(const SmoothWindow& h, int kappa, double x, int J) {
    require(x >= 10, "hankel_gl2_asymptotic: need x >= 10");
    require(J >= 0 && J <= 8, "hankel_gl2_asymptotic: J must lie in [0, 8]");
    require(kappa >= 2 && kappa % 2 == 0, "hankel_gl2_asymptotic: weight must be an even integer >= 2");
    AsymptoticValue r;
    if (h.amplitude() == 0) return r;
    r.value = hankel_asymptotic_value(h, kappa, x, J);
    const double p = -0.5 * J - 0.75;
    r.error_cap = hankel_cap_constant(kappa, J) * std::pow(x, p) * abs_moment(h, p);
    return r;
}

// ---------------------------------------------------------------- GL(3) ----

GL3Archimedean GL3Archimedean::of(const GL3Form& pi) {
    GL3Archimedean a;
    a.convention = pi.convention;
    a.mu = pi.mu;
    a.weight = pi.base_weight;
    return a;
}

GL3Archimedean GL3Archimedean::sym_square(int weight) {
    require(weight >= 2, "sym_square: weight must be >= 2");
    GL3Archimedean a;
    a.convention = GammaConvention::sign_shifted;
    a.weight = weight;
    return a;
}

namespace {

// L_inf(s, pi x sgn^l) = prod Gamma_R(s + shift_j) for the sign-shifted form.
std::array<double, 3> shifts(const GL3Archimedean& a, int ell) {
    return {1.0 - ell, a.weight - 1.0, static_cast<double>(a.weight)};
}

// distance from z to the nearest pole of Gamma
double pole_distance(cplx z) {
    if (z.real() > 0.5) return std::numeric_limits<double>::infinity();
    double n = std::min(0.0, std::round(z.real()));
    return std::abs(z - n);
}

// log(1 / Gamma(z)); returns false when 1/Gamma(z) vanishes
bool log_rgamma(cplx z, cplx& out) {
    if (pole_distance(z) < 1e-13) return false;
    out = -log_gamma(z);
    return true;
}

cplx log_numerator_gamma(cplx z, cplx s) {
    if (pole_distance(z) < 1e-6) {
        std::ostringstream os;
        os.precision(10);
        os << "gamma_ratio: s = " << s << " is within 1e-6 of a pole (Gamma argument " << z << ")";
        throw ValidationError(os.str());
    }
    return log_gamma(z);
}

}  // namespace

double GL3Archimedean::contour_floor() const {
    if (convention == GammaConvention::sign_shifted) return -1.0;
    // Numerator poles sit at s = -1 - mu_j - l - 2m and the reciprocal
    // denominators vanish at s = -mu_k + l + 2m; coincident pairs cancel. For
    // integral triples such as (k-1, 0, 1-k) every pole right of -1 cancels,
    // so the floor is far below the naive max_j(-1 - Re mu_j).
    const double lowest = -4;
    double floor = lowest;
    for (int ell = 0; ell <= 1; ++ell) {
        std::vector<cplx> poles, zeros;
        for (auto m : mu)
            for (int k = 0;; ++k) {
                cplx p = -1.0 - m - double(ell) - 2.0 * k;
                if (p.real() < lowest) break;
                poles.push_back(p);
            }
        double top = lowest;
        for (auto p : poles) top = std::max(top, p.real());
        for (auto m : mu)
            for (int k = 0;; ++k) {
                cplx z = -m + double(ell) + 2.0 * k;
                if (z.real() > top + 1) break;
                zeros.push_back(z);
            }
        for (auto p : poles) {
            auto it = std::find_if(zeros.begin(), zeros.end(), [&](cplx z) { return std::abs(z - p) < 1e-9; });
            if (it != zeros.end())
                zeros.erase(it);
            else
                floor = std::max(floor, p.real());
        }
    }
    return floor;
}

std::string GL3Archimedean::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(convention);
    if (convention == GammaConvention::maass_mu)
        os << " mu=(" << mu[0] << "," << mu[1] << "," << mu[2] << ")";
    else
        os << " weight=" << weight;
    return os.str();
}

cplx gamma_ratio(const GL3Archimedean& a, int ell, cplx s) {
    require(ell == 0 || ell == 1, "gamma_ratio: ell must be 0 or 1");
    cplx lg = -std::log(2.0);
    if (a.convention == GammaConvention::maass_mu) {
        lg -= 3.0 * (s + 0.5) * std::log(kPi);
        for (auto mu : a.mu) {
            lg += log_numerator_gamma((1.0 + s + mu + double(ell)) / 2.0, s);
            cplx r;
            if (!log_rgamma((-s - mu + double(ell)) / 2.0, r)) return 0;
            lg += r;
        }
    } else {
        const double lp = std::log(kPi);
        for (double sh : shifts(a, ell)) {
            cplx zn = 1.0 + s + sh, zd = -s + sh;
            lg += -zn / 2.0 * lp + log_numerator_gamma(zn / 2.0, s);
            cplx r;
            if (!log_rgamma(zd / 2.0, r)) return 0;
            lg += zd / 2.0 * lp + r;
        }
    }
    return std::exp(lg);
}

cplx gamma_pm(const GL3Archimedean& a, int sign, cplx s) {
    require(sign == 1 || sign == -1, "gamma_pm: sign must be +1 or -1");
    return gamma_ratio(a, 0, s) - double(sign) * kI * gamma_ratio(a, 1, s);
}

cplx gamma_residual(const GL3Archimedean& a, int sign, double tau) {
    require(tau != 0, "gamma_residual: tau must be nonzero");
    const double ph = 3 * tau * std::log(std::abs(tau) / (2 * std::exp(1.0) * kPi));
    return gamma_pm(a, sign, cplx(-0.5, tau)) * std::exp(-kI * ph);
}

cplx mellin_transform(const SmoothWindow& g, cplx w) {
    if (g.amplitude() == 0) return 0;
    if (g.kind() == SmoothWindow::Kind::log_gaussian) {
        // c^w sqrt(2 pi) sigma exp(sigma^2 w^2 / 2); the 1e-17 cut is ignored
        const double c = g.center(), sg = g.sigma();
        return g.amplitude() * std::exp(w * std::log(c) + sg * sg * w * w / 2.0) * std::sqrt(kTwoPi) * sg;
    }
    return u_dagger(g, 0, w, 1e-12);
}

namespace {

// int_T^inf (1 + t)^p exp(-b t^2) dt, bounded through the log-derivative
double gaussian_tail(double T, double p, double b) {
    const double slope = 2 * b * T - p / (1 + T);
    if (slope <= 0) return std::numeric_limits<double>::infinity();
    return std::pow(1 + T, p) * std::exp(-b * T * T) / slope;
}

double window_scale(const SmoothWindow& g) {
    return g.kind() == SmoothWindow::Kind::log_gaussian ? g.center() : g.s0();
}

}  // namespace

PsiTransform::PsiTransform(const SmoothWindow& g, const GL3Archimedean& arch, const ContourOptions& opt)
    : arch_(arch), opt_(opt) {
    require(g.s0() > 0, "psi_transform: window must be supported in (0, inf)");
    require(opt.step > 0 && opt.step <= 0.25, "psi_transform: step must lie in (0, 0.25]");
    const double floor = arch.contour_floor();
    sigma_ = opt.sigma;
    if (sigma_ <= floor + 0.25) sigma_ = floor + 0.5;
    if (g.amplitude() == 0) {
        zero_ = true;
        return;
    }
    const bool gauss = g.kind() == SmoothWindow::Kind::log_gaussian;
    const double N = window_scale(g);
    const double sg = gauss ? g.sigma() : 0;
    const double sig2 = sigma_ + 0.25;

    // growth of gamma_pm along a contour: (1 + |tau|)^{3(sigma + 1/2)} times
    // a constant measured on [T/2, T]
    auto gamma_const = [&](double sig, double T) {
        double C = 0;
        const double p = 3 * (sig + 0.5);
        for (int i = 0; i <= 64; ++i) {
            double t = T / 2 + T / 2 * i / 64;
            for (double st : {t, -t})
                for (int sgn : {1, -1})
                    C = std::max(C, std::abs(gamma_pm(arch, sgn, cplx(sig, st))) / std::pow(1 + t, p));
        }
        return 1.5 * C;
    };
    // tail of (1/2 pi) int_{|tau| > T} |x^{-s} gamma g~(-s)| d tau at x = 1
    auto tail_at = [&](double sig, double T) {
        const double p = 3 * (sig + 0.5);
        const double Cg = gamma_const(sig, T);
        if (gauss) {
            const double b = sg * sg / 2;
            double m = std::abs(g.amplitude()) * std::sqrt(kTwoPi) * sg * std::exp(b * sig * sig) * std::pow(N, -sig);
            return 2 / kTwoPi * Cg * m * gaussian_tail(T, p, b);
        }
        // envelope |g~(-s)| <= C6 |tau|^{-6}, C6 measured on [T/2, T]
        double C6 = 0;
        for (int i = 0; i <= 16; ++i) {
            double t = T / 2 + T / 2 * i / 16;
            for (double st : {t, -t}) C6 = std::max(C6, std::abs(mellin_transform(g, cplx(-sig, -st))) * std::pow(t, 6));
        }
        C6 *= 1.5;
        if (p >= 5) return std::numeric_limits<double>::infinity();
        return 2 / kTwoPi * Cg * C6 * std::pow(2.0, p) * std::pow(T, p - 5) / (5 - p);
    };

    if (opt.tau_max > 0) {
        tau_max_ = opt.tau_max;
    } else {
        // the certificate is demanded down to x N = 1e-3 with room to spare
        const double xs = 1e-3 / N;
        auto need = [&](double T) {
            double t = std::max(tail_at(sigma_, T) * std::pow(xs, -sigma_), tail_at(sig2, T) * std::pow(xs, -sig2));
            return t <= opt.tail_tol * 1e-2;
        };
        double T = 16;
        while (!need(T)) {
            T *= 1.25;
            if (T > 65536) {
                throw CertificateError("psi_transform: contour tail not certified below " + fmt(opt.tail_tol) +
                                       " even at tau_max = 65536; use a log-Gaussian window or pass tau_max");
            }
        }
        tau_max_ = T;
    }
    tail_coeff_ = std::max(tail_at(sigma_, tau_max_), tail_at(sig2, tau_max_));

    auto build = [&](Contour& c, double sig) {
        c.sigma = sig;
        const long n = static_cast<long>(std::ceil(2 * tau_max_ / opt.step));
        const double h = 2 * tau_max_ / n;
        c.tau.resize(n + 1);
        for (int k = 0; k < 2; ++k) c.f[k].resize(n + 1);
        for (long k = 0; k <= n; ++k) {
            const double t = -tau_max_ + k * h;
            const cplx s(sig, t);
            const cplx gt = mellin_transform(g, -s);
            const cplx g0 = gamma_ratio(arch, 0, s), g1 = gamma_ratio(arch, 1, s);
            // trapezoid end weights
            const double w = (k == 0 || k == n ? 0.5 : 1.0) * h / kTwoPi;
            c.tau[k] = t;
            c.f[0][k] = w * (g0 - kI * g1) * gt;
            c.f[1][k] = w * (g0 + kI * g1) * gt;
        }
    };
    build(main_, sigma_);
    build(shifted_, sig2);
}

std::array<cplx, 2> PsiTransform::eval(const Contour& c, double x) const {
    const double L = std::log(x);
    const std::size_t n = c.tau.size();
    const double h = n > 1 ? c.tau[1] - c.tau[0] : 0;
    const cplx rot = std::exp(cplx(0, -h * L));
    std::complex<long double> s0 = 0, s1 = 0;
    cplx z;
    for (std::size_t k = 0; k < n; ++k) {
        if (k % 256 == 0)
            z = std::exp(cplx(0, -c.tau[k] * L));
        else
            z *= rot;
        cplx a = z * c.f[0][k], b = z * c.f[1][k];
        s0 += std::complex<long double>(a.real(), a.imag());
        s1 += std::complex<long double>(b.real(), b.imag());
    }
    const double scale = std::exp(-c.sigma * L);
    return {cplx(double(s0.real()), double(s0.imag())) * scale, cplx(double(s1.real()), double(s1.imag())) * scale};
}

double PsiTransform::tail_bound(double x) const {
    if (zero_) return 0;
    return tail_coeff_ * std::max(std::pow(x, -sigma_), std::pow(x, -sigma_ - 0.25));
}

std::array<cplx, 2> PsiTransform::both(double x) const {
    require(x > 0, "psi_transform: x must be positive");
    if (zero_) return {cplx(0), cplx(0)};
    auto a = eval(main_, x), b = eval(shifted_, x);
    double res = 0;
    for (int k = 0; k < 2; ++k) res = std::max(res, std::abs(a[k] - b[k]) / (1 + std::abs(a[k])));
    last_residual_ = res;
    if (res > opt_.holomorphy_tol) {
        throw CertificateError("psi_transform: contours sigma = " + fmt(sigma_) + " and " + fmt(sigma_ + 0.25) +
                               " disagree by " + fmt(res) + " at x = " + fmt(x) + "; refine the step or raise tau_max");
    }
    const double tail = tail_bound(x);
    for (int k = 0; k < 2; ++k)
        if (tail > opt_.tail_tol * (1 + std::abs(a[k])))
            throw CertificateError("psi_transform: contour tail " + fmt(tail) + " at x = " + fmt(x) +
                                   " exceeds the tolerance; suggested tau_max = " + fmt(2 * tau_max_));
    return a;
}

cplx PsiTransform::operator()(double x, int sign) const {
    require(sign == 1 || sign == -1, "psi_transform: sign must be +1 or -1");
    return both(x)[sign == 1 ? 0 : 1];
}

cplx psi_transform(const SmoothWindow& g, const GL3Archimedean& arch, double x, int sign,
                   const ContourOptions& opt) {
    return PsiTransform(g, arch, opt)(x, sign);
}

namespace {

// x int g(y) e(+-3 (xy)^{1/3}) (xy)^{-j/3} dy for j = 1..4, both signs
std::array<std::array<cplx, 4>, 2> psi_basis(const SmoothWindow& g, double x) {
    std::vector<double> ys, ws;
    const double cx = std::cbrt(x);
    window_nodes(g, [&](double a, double b) { return 3 * cx * (std::cbrt(b) - std::cbrt(a)); }, 24, ys, ws);
    std::array<std::array<Accumulator<cplx>, 4>, 2> acc;
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const double z = std::cbrt(x * ys[k]);
        const cplx osc = e(3 * z);
        double pw = 1;
        for (int j = 0; j < 4; ++j) {
            pw /= z;
            acc[0][j].add(ws[k] * pw * osc);
            acc[1][j].add(ws[k] * pw * std::conj(osc));
        }
    }
    std::array<std::array<cplx, 4>, 2> r;
    for (int s = 0; s < 2; ++s)
        for (int j = 0; j < 4; ++j) r[s][j] = x * acc[s][j].value();
    return r;
}

double psi_cap_moment(const SmoothWindow& g, double x, int J) {
    const double p = (2.0 - J) / 3;
    return integrate_composite(
               [&](double y) { return cplx(std::abs(g(y)) * std::pow(x * y, p) / y, 0); }, g.s0(), g.s1(), 256, 20)
        .real();
}

// Complex least squares by normal equations with column scaling; the system
// is 8 x 8 and well conditioned after scaling.
std::vector<cplx> least_squares(const std::vector<std::vector<cplx>>& A, const std::vector<cplx>& b) {
    const std::size_t m = A.size(), n = A[0].size();
    std::vector<double> cs(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) cs[j] += std::norm(A[i][j]);
        cs[j] = std::sqrt(cs[j]);
    }
    std::vector<std::vector<std::complex<long double>>> M(n, std::vector<std::complex<long double>>(n + 1, 0));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t i = 0; i < m; ++i) {
                cplx v = std::conj(A[i][r] / cs[r]) * (A[i][c] / cs[c]);
                M[r][c] += std::complex<long double>(v.real(), v.imag());
            }
        for (std::size_t i = 0; i < m; ++i) {
            cplx v = std::conj(A[i][r] / cs[r]) * b[i];
            M[r][n] += std::complex<long double>(v.real(), v.imag());
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        std::swap(M[c], M[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            auto f = M[r][c] / M[c][c];
            for (std::size_t k = c; k <= n; ++k) M[r][k] -= f * M[c][k];
        }
    }
    std::vector<cplx> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        auto v = M[j][n] / M[j][j];
        x[j] = cplx(double(v.real()), double(v.imag())) / cs[j];
    }
    return x;
}

}  // namespace

const PsiConstants& psi_constants(const GL3Archimedean& arch, int sign) {
    require(sign == 1 || sign == -1, "psi_constants: sign must be +1 or -1");
    static std::mutex mu;
    static std::map<std::string, PsiConstants> cache;
    const std::string key = arch.describe() + (sign == 1 ? " +" : " -");
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    // A narrow log-Gaussian at 1 samples the kernel nearly pointwise; the
    // basis functions integrate against the same window, so the width is
    // accounted for exactly.
    const SmoothWindow gcal = SmoothWindow::log_gaussian(1, 0.002);
    PsiTransform P(gcal, arch);
    const int npts = 40;
    std::vector<std::vector<cplx>> A;
    std::vector<cplx> b;
    std::vector<double> xs;
    std::vector<cplx> vals;
    std::vector<std::array<std::array<cplx, 4>, 2>> bases;
    for (int i = 0; i < npts; ++i) {
        const double x = 1e3 * std::pow(1e3, i / double(npts - 1));
        const cplx v = P(x, sign);
        auto B = psi_basis(gcal, x);
        const double w = std::pow(x, -2.0 / 3);  // rows of comparable size
        std::vector<cplx> row;
        for (int j = 0; j < 4; ++j) row.push_back(w * B[0][j]);
        for (int j = 0; j < 4; ++j) row.push_back(w * B[1][j]);
        A.push_back(row);
        b.push_back(w * v);
        xs.push_back(x);
        vals.push_back(v);
        bases.push_back(B);
    }
    auto sol = least_squares(A, b);
    PsiConstants pc;
    for (int j = 0; j < 4; ++j) {
        pc.c[j] = sol[j];
        pc.d[j] = sol[4 + j];
    }
    double C = 0;
    for (int J = 1; J <= 4; ++J)
        for (int i = 0; i < npts; ++i) {
            cplx asym = 0;
            for (int j = 0; j < J; ++j) asym += pc.c[j] * bases[i][0][j] + pc.d[j] * bases[i][1][j];
            C = std::max(C, std::abs(asym - vals[i]) / psi_cap_moment(gcal, xs[i], J));
        }
    pc.cap_constant = 2 * C;
    return cache.emplace(key, pc).first->second;
}

AsymptoticValue psi_asymptotic(const SmoothWindow& g, const GL3Archimedean& arch, double x, int sign, int J) {
    require(sign == 1 || sign == -1, "psi_asymptotic: sign must be +1 or -1");
    require(J >= 1 && J <= 4, "psi_asymptotic: J must lie in [1, 4]");
    require(x > 0 && x * window_scale(g) >= 1e3, "psi_asymptotic: need x * scale >= 1e3 for the asymptotic regime");
    AsymptoticValue r;
    if (g.amplitude() == 0) return r;
    const PsiConstants& pc = psi_constants(arch, sign);
    auto B = psi_basis(g, x);
    for (int j = 0; j < J; ++j) r.value += pc.c[j] * B[0][j] + pc.d[j] * B[1][j];
    r.error_cap = pc.cap_constant * psi_cap_moment(g, x, J);
    return r;
}

// ------------------------------------------------------------ identities ----

namespace {

VoronoiResult finish(cplx lhs, cplx rhs, Truncation t) {
    VoronoiResult r;
    r.lhs = lhs;
    r.rhs = rhs;
    r.gap = std::abs(lhs - rhs) / (1 + std::abs(lhs));
    r.truncation = t;
    return r;
}

void need_limit(i64 have, i64 want, const char* who) {
    if (want > have)
        throw ValidationError(std::string(who) + ": coefficient table limit " + std::to_string(have) +
                              " is too small; rebuild with limit >= " + std::to_string(want));
}

}  // namespace

VoronoiResult gl2_voronoi_check(const GL2Form& f, const VoronoiCase& c, unsigned threads) {
    require(c.q >= 1, "gl2_voronoi_check: q must be positive");
    require(gcd(c.a, c.q) == 1, "gl2_voronoi_check: gcd(a, q) must be 1");
    require(c.X > 0, "gl2_voronoi_check: X must be positive");
    require(c.window.s0() > 0, "gl2_voronoi_check: window must be supported in (0, inf)");
    const SmoothWindow& h = c.window;
    const i64 q = c.q, abar = modinv(mod(c.a, q), q);
    const double X = c.X;

    const i64 n_lo = std::max<i64>(1, static_cast<i64>(std::ceil(X * h.s0())));
    const i64 n_hi = static_cast<i64>(std::floor(X * h.s1()));
    need_limit(f.limit, n_hi, "gl2_voronoi_check");
    Accumulator<cplx> lhs;
    for (i64 n = n_lo; n <= n_hi; ++n) {
        const double v = h(n / X);
        if (v != 0) lhs.add(f.lambda(n) * v * e(double(mod(c.a * n, q)) / q));
    }

    // dual side in blocks (M/2, M]; each block gets a Hankel grid for its
    // largest argument
    const double xs = X / double(q * q);
    Accumulator<cplx> rhs;
    Truncation t;
    i64 lo = 0, M = std::max<i64>(32, static_cast<i64>(std::ceil(16 / xs)));
    int quiet = 0;
    cplx prev = 0;
    for (;;) {
        if (c.max_dual > 0) M = std::min(M, c.max_dual);
        need_limit(f.limit, M, "gl2_voronoi_check (dual side)");
        HankelGrid grid(h, f.weight, M * xs);
        const i64 count = M - lo;
        const std::size_t chunk = 64;
        const std::size_t nchunks = static_cast<std::size_t>((count + chunk - 1) / chunk);
        std::vector<cplx> part(nchunks);
        std::vector<double> mag(nchunks);
        parallel_for(nchunks, threads, [&](std::size_t k) {
            Accumulator<cplx> s;
            double m = 0;
            const i64 a = lo + 1 + static_cast<i64>(k * chunk), b = std::min<i64>(M, a + chunk - 1);
            for (i64 n = a; n <= b; ++n) {
                const double lam = f.lambda(n);
                if (lam == 0) continue;
                const cplx phi = grid(n * xs);
                s.add(lam * e(-double(mod(abar * n, q)) / q) * phi);
                m += std::abs(lam * phi);
            }
            part[k] = s.value();
            mag[k] = m;
        });
        double block_mag = 0;
        prev = rhs.value();
        for (std::size_t k = 0; k < nchunks; ++k) {
            rhs.add(part[k]);
            block_mag += mag[k];
        }
        const double scale = X / q;
        const cplx total = scale * rhs.value();
        t.dual_terms = M;
        t.x_max = M * xs;
        t.tail_estimate = scale * block_mag;
        t.doubling_change = std::abs(total - scale * prev) / (1 + std::abs(total));
        if (c.max_dual > 0 && M >= c.max_dual) break;
        quiet = t.tail_estimate <= 1e-10 * (1 + std::abs(total)) ? quiet + 1 : 0;
        if (quiet >= 2) break;
        if (M * xs > 1e6)
            throw CertificateError("gl2_voronoi_check: dual sum has not decayed by argument " + fmt(M * xs) +
                                   " (last block size " + fmt(t.tail_estimate) + ")");
        lo = M;
        M *= 2;
    }
    VoronoiResult r = finish(lhs.value(), (X / q) * rhs.value(), t);
    r.convention = GammaConvention::maass_mu;
    return r;
}

VoronoiResult gl3_voronoi_check(const GL3Form& pi, const GL3Archimedean& arch, const VoronoiCase& c,
                                const ContourOptions& contour) {
    require(c.q >= 1 && c.r >= 1, "gl3_voronoi_check: q and r must be positive");
    require(gcd(c.a, c.q) == 1, "gl3_voronoi_check: gcd(a, q) must be 1");
    const SmoothWindow& g = c.window;
    require(g.s0() > 0, "gl3_voronoi_check: window must be supported in (0, inf)");
    const i64 q = c.q, r = c.r, abar = modinv(mod(c.a, q), q);

    const i64 n_lo = std::max<i64>(1, static_cast<i64>(std::ceil(g.s0())));
    const i64 n_hi = static_cast<i64>(std::floor(g.s1()));
    need_limit(pi.limit, std::max(n_hi, r), "gl3_voronoi_check");
    Accumulator<cplx> lhs;
    for (i64 n = n_lo; n <= n_hi; ++n) {
        const double v = g(double(n));
        if (v != 0) lhs.add(pi.A(n, r) * v * e(double(mod(c.a * n, q)) / q));
    }

    PsiTransform P(g, arch, contour);
    const auto n1s = divisors(q * r);
    const double denom = double(q) * q * q * r;
    std::map<i64, std::vector<i64>> inv;
    for (i64 n1 : n1s) inv[n1] = inverse_table(q * r / n1);

    Accumulator<cplx> rhs;
    Truncation t;
    t.sigma = P.sigma();
    t.tau_max = P.tau_max();
    i64 lo = 0, N = 64;
    int quiet = 0;
    for (;;) {
        if (c.max_dual > 0) N = std::min(N, c.max_dual);
        Accumulator<cplx> block;
        double block_mag = 0;
        for (i64 n1 : n1s) {
            const i64 cmod = q * r / n1;
            const i64 m = r * abar;
            // n2 range for n1^2 n2 in (lo, N]
            const i64 a2 = lo / (n1 * n1) + 1, b2 = N / (n1 * n1);
            if (b2 < a2) continue;
            need_limit(pi.limit, std::max(n1, b2), "gl3_voronoi_check (dual side)");
            for (i64 n2 = a2; n2 <= b2; ++n2) {
                const double A = pi.A(n1, n2);
                if (A == 0) continue;
                const double x = double(n1) * n1 * n2 / denom;
                auto psi = P.both(x);
                const double sp = kloosterman(m, n2, cmod, inv[n1]);
                const double sm = kloosterman(m, -n2, cmod, inv[n1]);
                const cplx term = A / (double(n1) * n2) * (sp * psi[0] + sm * psi[1]);
                block.add(term);
                block_mag += std::abs(A) / (double(n1) * n2) * (std::abs(sp * psi[0]) + std::abs(sm * psi[1]));
            }
        }
        const cplx before = double(q) * rhs.value();
        rhs.add(block.value());
        const cplx total = double(q) * rhs.value();
        t.dual_terms = N;
        t.x_max = N / denom;
        t.tail_estimate = q * block_mag;
        t.doubling_change = std::abs(total - before) / (1 + std::abs(total));
        if (c.max_dual > 0 && N >= c.max_dual) break;
        quiet = t.tail_estimate <= 1e-11 * (1 + std::abs(total)) ? quiet + 1 : 0;
        if (quiet >= 2) break;
        if (N > (i64(1) << 26))
            throw CertificateError("gl3_voronoi_check: dual sum has not decayed by n1^2 n2 = " + std::to_string(N));
        lo = N;
        N *= 2;
    }
    VoronoiResult res = finish(lhs.value(), double(q) * rhs.value(), t);
    res.convention = arch.convention;
    return res;
}

VoronoiResult gl3_voronoi_check(const GL3Form& pi, const VoronoiCase& c, const GL3CheckOptions& opt) {
    const GL3Archimedean first = GL3Archimedean::of(pi);
    std::string why;
    try {
        VoronoiResult r = gl3_voronoi_check(pi, first, c, opt.contour);
        if (r.gap <= opt.fallback_gap || !opt.allow_fallback || first.convention != GammaConvention::maass_mu)
            return r;
        why = "gap " + fmt(r.gap);
    } catch (const CertificateError& e) {
        if (!opt.allow_fallback || first.convention != GammaConvention::maass_mu) throw;
        why = std::string("certificate failure: ") + e.what();
    }
    VoronoiResult r = gl3_voronoi_check(pi, GL3Archimedean::sym_square(pi.base_weight), c, opt.contour);
    r.note = "maass_mu parameters " + first.describe() + " rejected (" + why + "); used sign_shifted";
    return r;
}

}  // namespace oscsum
