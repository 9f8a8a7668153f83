#include "oscsum/delta.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "oscsum/charsums.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/quadrature.hpp"

namespace oscsum {

namespace {

// 1 on [0, 1], 0 on [2, inf), smooth in between.
double cutoff(double v) {
    if (v <= 1) return 1;
    if (v >= 2) return 0;
    double a = std::exp(-1 / (2 - v)), b = std::exp(-1 / (v - 1));
    return a / (a + b);
}

// FFTW planning is not thread safe.
std::mutex& fftw_lock() {
    static std::mutex m;
    return m;
}

constexpr std::size_t kMaxSamples = std::size_t(1) << 24;

}  // namespace

DeltaExpansion::DeltaExpansion(double Q, const SmoothWindow& base, const DeltaOptions& opt) : Q_(Q) {
    require(std::isfinite(Q) && Q >= 2, "build_delta: need Q >= 2");
    require(base.smooth(), "build_delta: the base window must be smooth");
    require(opt.tail_tol > 0, "build_delta: tail_tol must be positive");
    W_ = base.dilated(1 / base.s1());
    H_ = W_.s0();
    qmax_ = int(std::floor(Q));

    Accumulator<double> s;
    for (int c = 1; c <= qmax_; ++c) s.add(W_(c / Q));
    S_ = s.value();
    if (!(S_ > 0) || !(W_.integral() > 0))
        throw ValidationError("build_delta: normalization sum vanishes for " + base.describe() + " at Q = " +
                              std::to_string(Q));

    lead_.assign(qmax_ + 1, 0.0);
    for (int q = 1; q <= qmax_; ++q) {
        Accumulator<double> a;
        for (int r = 1; double(q) * r <= Q; ++r) a.add(W_(double(q) * r / Q) / r);
        lead_[q] = a.value();
    }

    grid_.resize(qmax_ + 1);
    for (int q = 1; q <= qmax_; ++q) {
        const double L = support(q);
        // enough samples to resolve the unit-scale bumps of the kernel to start with
        std::size_t n = 1024;
        while (double(n) < 64 * L) n *= 2;
        for (;;) {
            const double dx = 2 * L / double(n);
            fftw_complex* in = fftw_alloc_complex(n);
            fftw_complex* out = fftw_alloc_complex(n);
            fftw_plan plan;
            {
                std::lock_guard<std::mutex> lk(fftw_lock());
                plan = fftw_plan_dft_1d(int(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
            }
            for (std::size_t m = 0; m < n; ++m) {
                double x = (m < n / 2 ? double(m) : double(m) - double(n)) * dx;
                in[m][0] = kernel(q, x);
                in[m][1] = 0;
            }
            fftw_execute(plan);
            const double step = 1 / (2 * L);
            auto at = [&](std::ptrdiff_t j) {
                std::size_t k = j >= 0 ? std::size_t(j) : n - std::size_t(-j);
                return std::complex<double>(out[k][0], out[k][1]) * dx;
            };
            // smallest J with step * sum_{|j| > J} |g_j| <= tail_tol
            const std::ptrdiff_t half = std::ptrdiff_t(n / 2) - 1;
            std::ptrdiff_t J = 0;
            double tail = 0;
            for (std::ptrdiff_t j = half; j >= 1; --j) {
                tail += step * (std::abs(at(j)) + std::abs(at(-j)));
                if (tail > opt.tail_tol) {
                    J = j;
                    break;
                }
            }
            if (J <= std::ptrdiff_t(n / 4)) {
                Grid& gr = grid_[q];
                gr.step = step;
                gr.g.resize(2 * J + 1);
                for (std::ptrdiff_t j = -J; j <= J; ++j) gr.g[j + J] = at(j);
                zcut_ = std::max(zcut_, double(J) * step);
            }
            {
                std::lock_guard<std::mutex> lk(fftw_lock());
                fftw_destroy_plan(plan);
            }
            fftw_free(in);
            fftw_free(out);
            if (!grid_[q].g.empty()) break;
            // the transform is still above the tolerance near the Nyquist
            // frequency, so aliasing is not under control yet
            n *= 2;
            if (n > kMaxSamples)
                throw CertificateError("build_delta: z-tail of g(" + std::to_string(q) +
                                       ", .) not below tolerance within " + std::to_string(kMaxSamples) +
                                       " samples");
        }
    }
}

i64 DeltaExpansion::max_abs_n() const { return i64(std::floor(H_ * Q_ * Q_ + 1e-9)); }

double DeltaExpansion::epsilon() const { return zcut_ > 1 ? std::log(zcut_) / std::log(Q_) : 0.0; }

double DeltaExpansion::kernel(int q, double x) const {
    require(q >= 1 && q <= qmax_, "delta kernel: modulus out of range");
    double ax = std::abs(x);
    double chi = cutoff(double(q) * Q_ * ax / (H_ * Q_ * Q_));
    if (chi == 0) return 0;
    // W(ax / r) is nonzero for ax <= r <= ax / H
    Accumulator<double> a;
    a.add(lead_[q]);
    i64 r0 = std::max<i64>(1, i64(std::ceil(ax))), r1 = i64(std::floor(ax / H_));
    for (i64 r = r0; r <= r1; ++r) a.add(-W_(ax / double(r)) / double(r));
    return chi * (Q_ / S_) * a.value();
}

namespace {

template <class F>
std::complex<double> transform(const DeltaExpansion& d, int q, double z, F weight) {
    const double L = 2 * d.headroom() * d.Q() / q;
    // unit-scale bumps in x plus |z| oscillations per unit length
    int panels = int(std::ceil(2 * L * (8 + 2 * std::abs(z))));
    return integrate_composite([&](double x) { return d.kernel(q, x) * weight(x) * e(-x * z); }, -L, L, panels, 20);
}

}  // namespace

std::complex<double> DeltaExpansion::g(int q, double z) const {
    require(q >= 1 && q <= qmax_, "g: need 1 <= q <= Q");
    return transform(*this, q, z, [](double) { return 1.0; });
}

std::complex<double> DeltaExpansion::g_derivative(int q, double z) const {
    require(q >= 1 && q <= qmax_, "g_derivative: need 1 <= q <= Q");
    return transform(*this, q, z, [](double x) { return std::complex<double>(0, -kTwoPi * x); });
}

std::complex<double> DeltaExpansion::detect(i64 n) const {
    require(std::llabs(n) <= max_abs_n(),
            "delta_detect: |n| = " + std::to_string(std::llabs(n)) + " exceeds H Q^2 = " + std::to_string(max_abs_n()));
    Accumulator<std::complex<double>> total;
    for (int q = 1; q <= qmax_; ++q) {
        i64 c = ramanujan_sum(n, q);
        if (c == 0) continue;
        const Grid& gr = grid_[q];
        const std::ptrdiff_t J = std::ptrdiff_t(gr.g.size() / 2);
        const double freq = double(n) * gr.step / (double(q) * Q_);
        Accumulator<std::complex<double>> in;
        for (std::ptrdiff_t j = -J; j <= J; ++j) in.add(gr.g[j + J] * e(freq * double(j)));
        total.add(in.value() * (gr.step * double(c) / (Q_ * q)));
    }
    return total.value();
}

DeltaExpansion build_delta(double Q, const SmoothWindow& base, const DeltaOptions& opt) {
    return DeltaExpansion(Q, base, opt);
}

double delta_detect(i64 n, const DeltaExpansion& exp) {
    std::complex<double> v = exp.detect(n);
    if (std::abs(v.imag()) > 1e-9)
        throw CertificateError("delta_detect: imaginary part " + std::to_string(v.imag()) + " at n = " +
                               std::to_string(n));
    return v.real();
}

std::vector<double> delta_detect_range(i64 lo, i64 hi, const DeltaExpansion& exp, unsigned threads) {
    require(lo <= hi, "delta_detect_range: empty range");
    std::vector<double> out(std::size_t(hi - lo + 1));
    parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = delta_detect(lo + i64(i), exp); });
    return out;
}

GPropertyReport g_property_report(const DeltaExpansion& d, const std::vector<int>& q_grid,
                                  const std::vector<double>& zeta_grid) {
    const double Q = d.Q();
    const double reach = std::max(1.0, d.zeta_cut());
    for (int q : q_grid) require(q >= 1 && q <= d.moduli(), "g_property_report: q outside [1, Q]");
    for (double z : zeta_grid)
        require(std::abs(z) <= reach, "g_property_report: |z| beyond Q^epsilon = " + std::to_string(reach));

    GPropertyReport rep;
    rep.epsilon = d.epsilon();
    rep.zeta_cut = d.zeta_cut();
    rep.normalization = d.normalization();
    const double qeps = std::pow(Q, rep.epsilon);
    const double small_q = std::sqrt(Q), small_z = 1 / std::sqrt(Q);
    for (int q : q_grid) {
        for (double z : zeta_grid) {
            std::complex<double> g = d.g(q, z);
            double az = std::abs(z);
            double h = std::abs(g - 1.0);
            if (az >= 1) rep.decay_constant = std::max(rep.decay_constant, std::abs(g) * az * az * az);
            double env = (Q / q) * std::pow(double(q) / Q + az, 3);
            rep.h_constant = std::max(rep.h_constant, h / env);
            double dz = az * std::abs(d.g_derivative(q, z));
            rep.derivative_constant = std::max(rep.derivative_constant, dz / qeps);
            rep.derivative_log_constant = std::max(rep.derivative_log_constant, dz / (qeps * std::log(Q)));
            rep.even_residual = std::max(rep.even_residual, std::abs(g - d.g(q, -z)));
            if (q <= small_q && az <= small_z) rep.max_abs_h_small = std::max(rep.max_abs_h_small, h);
            ++rep.points;
        }
    }
    return rep;
}

}  // namespace oscsum
