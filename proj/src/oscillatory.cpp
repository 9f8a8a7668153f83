#include "oscsum/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

namespace oscsum {

Phase linear_phase(double slope) {
    return [slope](const PhaseJet& y) { return y * slope; };
}

Phase quadratic_phase(double T, double center) {
    return [T, center](const PhaseJet& y) {
        PhaseJet d = y - center;
        return (d * d) * (kPi * T);
    };
}

Phase monomial_phase(double coef, double power) {
    return [coef, power](const PhaseJet& y) { return pow(y, power) * coef; };
}

PhaseDerivs eval_phase(const Phase& rho, double y) {
    PhaseJet j = rho(PhaseJet::variable(y));
    PhaseDerivs d;
    for (int k = 0; k <= 4; ++k) d.d[k] = j.derivative(k);
    return d;
}

namespace {

double phase_value(const Phase& rho, double y) { return rho(PhaseJet(y)).value(); }

std::vector<double> sample_points(double a, double b, int n = 1024) {
    std::vector<double> ys(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ys[i] = a + (b - a) * (i + 0.5) / n;
    return ys;
}

}  // namespace

QuadResult integrate_detailed(const OscillatorySpec& spec, double tol) {
    require(static_cast<bool>(spec.phase), "integrate: phase is not set");
    const SmoothWindow& w = spec.weight;
    const Phase& rho = spec.phase;
    QuadOptions opt;
    opt.tol = tol;
    if (w.amplitude() == 0) {
        require(tol >= 1e-13 && tol <= 1e-3, "integrate: tol must lie in [1e-13, 1e-3]");
        return {};
    }
    return integrate_adaptive(
        [&](double y) {
            double v = w(y);
            if (v == 0) return cplx(0, 0);
            double p = phase_value(rho, y);
            return v * cplx(std::cos(p), std::sin(p));
        },
        w.s0(), w.s1(), opt, [&](double y) { return phase_value(rho, y); }, w.breakpoints());
}

cplx integrate(const OscillatorySpec& spec, double tol) { return integrate_detailed(spec, tol).value; }

HypothesisReport check_hypotheses(const OscillatorySpec& spec) {
    const auto& p = spec.params;
    HypothesisReport rep;
    double min_d1 = std::numeric_limits<double>::infinity();
    for (double y : sample_points(spec.weight.s0(), spec.weight.s1())) {
        auto d = eval_phase(spec.phase, y);
        for (int i = 2; i <= 4; ++i)
            rep.phase_ratio = std::max(rep.phase_ratio, std::abs(d.d[i]) * std::pow(p.Q, i) / p.Y);
        auto wj = spec.weight.jet(y);
        for (int j = 0; j <= 4; ++j)
            rep.weight_ratio = std::max(rep.weight_ratio, std::abs(wj.derivative(j)) * std::pow(p.U, j) / p.Z);
        min_d1 = std::min(min_d1, std::abs(d.d[1]));
    }
    rep.first_derivative_ratio = p.R / min_d1;
    rep.ok = rep.phase_ratio <= 1 && rep.weight_ratio <= 1 && rep.first_derivative_ratio <= 1;
    return rep;
}

InertParams fit_params(const SmoothWindow& w, const Phase& rho, double Q, double U, int max_order) {
    require(Q > 0 && U > 0, "fit_params: scales must be positive");
    require(max_order >= 1 && max_order <= 4, "fit_params: order must lie in [1, 4]");
    InertParams p;
    p.Q = Q;
    p.U = U;
    double Z = 0, Y = 0, R = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= max_order; ++j) Z = std::max(Z, w.sup_derivative(j) * std::pow(U, j));
    auto ys = sample_points(w.s0(), w.s1(), 4096);
    ys.push_back(w.s0());
    ys.push_back(w.s1());
    for (double y : ys) {
        auto d = eval_phase(rho, y);
        for (int i = 2; i <= max_order; ++i) Y = std::max(Y, std::abs(d.d[i]) * std::pow(Q, i));
        R = std::min(R, std::abs(d.d[1]));
    }
    p.Z = Z * 1.001;
    p.Y = std::max(Y * 1.001, 1e-300);
    p.R = R * 0.999;
    return p;
}

double first_derivative_constant(int A) {
    require(A >= 0 && A <= 12, "first_derivative_constant: A must lie in [0, 12]");
    // monomial w^{(j)} * prod rho^{(i_k)} * rho'^{-m}
    using Key = std::tuple<int, std::vector<int>, int>;
    std::map<Key, double> cur{{Key{0, {}, 0}, 1.0}};
    for (int step = 0; step < A; ++step) {
        std::map<Key, double> next;
        for (const auto& [key, coef] : cur) {
            auto [j, is, m] = key;
            const int mm = m + 1;  // divide by rho'
            next[Key{j + 1, is, mm}] += coef;
            for (std::size_t k = 0; k < is.size(); ++k) {
                auto js = is;
                ++js[k];
                std::sort(js.begin(), js.end());
                next[Key{j, js, mm}] += coef;
            }
            auto js = is;
            js.push_back(2);
            std::sort(js.begin(), js.end());
            next[Key{j, js, mm + 1}] -= mm * coef;
        }
        cur = std::move(next);
    }
    double s = 0;
    for (const auto& kv : cur) s += std::abs(kv.second);
    return s;
}

DerivativeBound bound_first_derivative(const OscillatorySpec& spec, int A) {
    const auto& p = spec.params;
    require(p.R > 0, "bound_first_derivative: R must be positive");
    require(p.Q > 0 && p.U > 0 && p.Y >= 0 && p.Z >= 0, "bound_first_derivative: invalid scale parameters");
    require(A >= 0 && A <= 3, "bound_first_derivative: A must lie in [0, 3] (derivatives to order 4 are available)");
    require(spec.weight.smooth(), "bound_first_derivative: the weight must be smooth");
    const double S = p.Y / (p.R * p.R * p.Q * p.Q) + 1 / (p.R * p.Q) + 1 / (p.R * p.U);
    DerivativeBound b;
    b.constant = first_derivative_constant(A);
    b.raw = (spec.weight.s1() - spec.weight.s0()) * p.Z * std::pow(S, A);
    b.bound = b.constant * b.raw;
    return b;
}

DerivativeBound bound_rth_derivative(const OscillatorySpec& spec, int r, double lambda0) {
    require(lambda0 > 0, "bound_rth_derivative: lambda0 must be positive");
    require(r >= 2 && r <= 30, "bound_rth_derivative: r must lie in [2, 30]");
    DerivativeBound b;
    b.constant = 5 * std::pow(2.0, r - 1) - 2;
    b.raw = spec.weight.total_variation() / std::pow(lambda0, 1.0 / r);
    b.bound = b.constant * b.raw;
    return b;
}

QuadResult integrate_2d(const Spec2D& spec, double tol) {
    require(tol > 0 && tol <= 1e-2, "integrate_2d: tol must lie in (0, 1e-2]");
    require(static_cast<bool>(spec.f), "integrate_2d: phase is not set");
    const double ax = spec.wx.s0(), bx = spec.wx.s1(), ay = spec.wy.s0(), by = spec.wy.s1();
    // largest phase gradient, in cycles per unit length
    double gx = 0, gy = 0;
    const int S = 64;
    const double hx = (bx - ax) * 1e-6, hy = (by - ay) * 1e-6;
    for (int i = 0; i <= S; ++i)
        for (int j = 0; j <= S; ++j) {
            double x = ax + (bx - ax) * i / S, y = ay + (by - ay) * j / S;
            gx = std::max(gx, std::abs(spec.f(x + hx, y) - spec.f(x - hx, y)) / (2 * hx));
            gy = std::max(gy, std::abs(spec.f(x, y + hy) - spec.f(x, y - hy)) / (2 * hy));
        }
    std::size_t nx = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(gx * (bx - ax))));
    std::size_t ny = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(gy * (by - ay))));

    auto tensor = [&](std::size_t px, std::size_t py, int n) {
        const GaussRule& g = gauss_legendre(n);
        std::vector<double> xs, wxs, ys, wys;
        const double dx = (bx - ax) / px, dy = (by - ay) / py;
        for (std::size_t p = 0; p < px; ++p)
            for (int k = 0; k < n; ++k) {
                double x = ax + (p + 0.5 * (1 + g.x[k])) * dx;
                xs.push_back(x);
                wxs.push_back(0.5 * dx * g.w[k] * spec.wx(x));
            }
        for (std::size_t p = 0; p < py; ++p)
            for (int k = 0; k < n; ++k) {
                double y = ay + (p + 0.5 * (1 + g.x[k])) * dy;
                ys.push_back(y);
                wys.push_back(0.5 * dy * g.w[k] * spec.wy(y));
            }
        Accumulator<cplx> acc;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (wxs[i] == 0) continue;
            cplx row = 0;
            for (std::size_t j = 0; j < ys.size(); ++j)
                if (wys[j] != 0) row += wys[j] * e(spec.f(xs[i], ys[j]));
            acc.add(wxs[i] * row);
        }
        return acc.value();
    };

    for (int round = 0; round < 8; ++round) {
        const double work = static_cast<double>(nx) * ny * 28 * 28;
        if (work > 4e9) break;
        cplx lo = tensor(nx, ny, 20), hi = tensor(nx, ny, 28);
        double err = std::abs(hi - lo);
        if (err <= tol * (1 + std::abs(hi))) return {hi, err, nx * ny};
        nx *= 2;
        ny *= 2;
    }
    std::ostringstream os;
    os << "integrate_2d: tensor quadrature did not converge on [" << ax << ", " << bx << "] x [" << ay << ", " << by
       << "]";
    throw CertificateError(os.str());
}

DerivativeBound bound_2d_second_derivative(const Spec2D& spec, double rho1, double rho2) {
    require(rho1 > 0 && rho2 > 0, "bound_2d_second_derivative: rho1 and rho2 must be positive");
    DerivativeBound b;
    // product of two one-dimensional second-derivative constants 8 / sqrt(2 pi rho)
    b.constant = 64 / kTwoPi;
    b.raw = spec.wx.total_variation() * spec.wy.total_variation() / std::sqrt(rho1 * rho2);
    b.bound = b.constant * b.raw;
    return b;
}

bool check_2d_hypotheses(const Spec2D& spec, double rho1, double rho2, double h) {
    const int S = 64;
    const double ax = spec.wx.s0(), bx = spec.wx.s1(), ay = spec.wy.s0(), by = spec.wy.s1();
    for (int i = 0; i <= S; ++i)
        for (int j = 0; j <= S; ++j) {
            double x = ax + (bx - ax) * i / S, y = ay + (by - ay) * j / S;
            double f0 = spec.f(x, y);
            double fxx = (spec.f(x + h, y) - 2 * f0 + spec.f(x - h, y)) / (h * h);
            double fyy = (spec.f(x, y + h) - 2 * f0 + spec.f(x, y - h)) / (h * h);
            double fxy = (spec.f(x + h, y + h) - spec.f(x + h, y - h) - spec.f(x - h, y + h) + spec.f(x - h, y - h)) /
                         (4 * h * h);
            if (std::abs(fxx) < rho1 || std::abs(fyy) < rho2 || std::abs(fxx * fyy - fxy * fxy) < rho1 * rho2)
                return false;
        }
    return true;
}

StationaryPhaseResult stationary_phase(const OscillatorySpec& spec, int A, double budget_constant) {
    const auto& p = spec.params;
    require(A >= 0, "stationary_phase: A must be nonnegative");
    const double R = p.Y / (p.X * p.X);
    require(R >= 4, "stationary_phase: need R = Y / X^2 >= 4, got " + std::to_string(R));
    const double a = spec.weight.s0(), b = spec.weight.s1();
    const int n = 1024;
    std::vector<double> ys(n + 1), d1(n + 1);
    for (int i = 0; i <= n; ++i) {
        ys[i] = a + (b - a) * i / n;
        d1[i] = eval_phase(spec.phase, ys[i]).d[1];
    }
    std::vector<std::pair<double, double>> brackets;
    for (int i = 0; i <= n; ++i) {
        if (d1[i] == 0)
            brackets.emplace_back(ys[i], ys[i]);
        else if (i < n && d1[i + 1] != 0 && (d1[i] < 0) != (d1[i + 1] < 0))
            brackets.emplace_back(ys[i], ys[i + 1]);
    }
    if (brackets.size() != 1) {
        std::ostringstream os;
        os << "stationary_phase: found " << brackets.size() << " stationary points of the phase on [" << a << ", " << b
           << "]; exactly one is required (use the derivative-test bounds instead)";
        throw ValidationError(os.str());
    }
    double lo = brackets[0].first, hi = brackets[0].second;
    auto rp = [&](double y) { return eval_phase(spec.phase, y).d[1]; };
    double flo = rp(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        double m = 0.5 * (lo + hi), fm = rp(m);
        if (fm == 0) {
            lo = hi = m;
            break;
        }
        if ((fm < 0) == (flo < 0)) {
            lo = m;
            flo = fm;
        } else {
            hi = m;
        }
    }
    const double y0 = 0.5 * (lo + hi);
    auto d = eval_phase(spec.phase, y0);
    require(d.d[2] != 0, "stationary_phase: degenerate stationary point (rho'' = 0)");
    // for rho'' < 0 work with -rho and conjugate at the end (the weight is real)
    const double sg = d.d[2] > 0 ? 1.0 : -1.0;
    const double ph = sg * d.d[0], aa = sg * d.d[2], bb = sg * d.d[3], cc = sg * d.d[4];
    auto wj = spec.weight.jet(y0);
    const double u0 = wj.derivative(0), u1 = wj.derivative(1), u2 = wj.derivative(2);
    const cplx I(0, 1);
    const cplx G = std::sqrt(kTwoPi / aa) * std::exp(I * (ph + kPi / 4));
    const cplx corr = (I / aa) * (u2 / 2 - bb * u1 / (2 * aa) - cc * u0 / (8 * aa) + 5 * bb * bb * u0 / (24 * aa * aa));
    StationaryPhaseResult r;
    r.leading = G * u0;
    r.value = G * (u0 + corr);
    if (sg < 0) {
        r.leading = std::conj(r.leading);
        r.value = std::conj(r.value);
    }
    r.y0 = y0;
    r.error_budget = budget_constant * p.Z * std::pow(R, -A);
    return r;
}

cplx u_dagger(const SmoothWindow& U, double xi, cplx s, double tol) {
    require(U.s0() > 0, "u_dagger: U must be supported in (0, inf)");
    if (U.amplitude() == 0) return 0;
    const double beta = s.real(), tau = s.imag();
    QuadOptions opt;
    opt.tol = tol;
    auto phase = [=](double y) { return tau * std::log(y) - kTwoPi * xi * y; };
    return integrate_adaptive(
               [&](double y) {
                   double v = U(y);
                   if (v == 0) return cplx(0, 0);
                   double p = phase(y);
                   return v * std::pow(y, beta - 1) * cplx(std::cos(p), std::sin(p));
               },
               U.s0(), U.s1(), opt, phase, U.breakpoints())
        .value;
}

double u_dagger_min_envelope(double xi, double tau, int j) {
    const double inf = std::numeric_limits<double>::infinity();
    double a = xi == 0 ? inf : std::pow((1 + std::abs(tau)) / std::abs(xi), j);
    double b = tau == 0 ? inf : std::pow((1 + std::abs(xi)) / std::abs(tau), j);
    return std::min(a, b);
}

UDaggerFit u_dagger_fit(const SmoothWindow& U, double beta, const std::vector<double>& xi_grid,
                        const std::vector<double>& tau_grid, int j) {
    UDaggerFit f;
    for (double xi : xi_grid)
        for (double tau : tau_grid) {
            double v = std::abs(u_dagger(U, xi, cplx(beta, tau)));
            double env = u_dagger_min_envelope(xi, tau, j);
            if (std::isfinite(env)) f.c_min_envelope = std::max(f.c_min_envelope, v / env);
            if (tau != 0) f.c_second = std::max(f.c_second, v * std::sqrt(std::abs(tau)));
        }
    return f;
}

const char* to_string(CubicRegime r) {
    switch (r) {
        case CubicRegime::zero_frequency: return "zero_frequency";
        case CubicRegime::large_x: return "large_x";
        case CubicRegime::off_window: return "off_window";
        case CubicRegime::stationary: return "stationary";
        case CubicRegime::transition: return "transition";
    }
    return "?";
}

CubicRegime classify_cubic(double X, double lambda, double Y, double eps) {
    require(lambda > 0, "classify_cubic: lambda must be positive");
    if (X == 0) return CubicRegime::zero_frequency;
    if (std::abs(X) >= std::pow(lambda, 1 + eps)) return CubicRegime::large_x;
    if (std::abs(X) >= 10) {
        const double ratio = lambda * Y / X;
        if (ratio <= std::cbrt(4.0 / 9) - 1.0 / 6 || ratio >= std::cbrt(9.0) + 1.0 / 6) return CubicRegime::off_window;
        if (ratio > 1.0 / 3 && ratio < 3) return CubicRegime::stationary;
    }
    return CubicRegime::transition;
}

CubicPhaseResult cubic_phase_integral(double X, double lambda, double Y, const SmoothWindow& phi, double tol) {
    require(phi.s0() > 2.0 / 3 && phi.s1() < 3, "cubic_phase_integral: phi must be supported inside (2/3, 3)");
    CubicPhaseResult r;
    r.regime = classify_cubic(X, lambda, Y);
    QuadOptions opt;
    opt.tol = tol;
    auto phase = [=](double x) { return kTwoPi * (-X * x * x * x + 3 * lambda * Y * x); };
    std::vector<double> breaks;
    for (double b : phi.breakpoints()) breaks.push_back(std::cbrt(b));
    r.value = integrate_adaptive(
                  [&](double x) {
                      double v = phi(x * x * x);
                      if (v == 0) return cplx(0, 0);
                      double p = phase(x);
                      return x * x * v * cplx(std::cos(p), std::sin(p));
                  },
                  std::cbrt(phi.s0()), std::cbrt(phi.s1()), opt, phase, breaks)
                  .value;
    return r;
}

}  // namespace oscsum
