#pragma once

#include <array>
#include <cmath>

namespace oscsum {

// Truncated Taylor series c[0] + c[1] h + ... + c[N] h^N. Used to get
// derivatives of windows and phases without hand-written formulas:
// f^{(k)}(y) = k! * c[k] when seeded with variable(y).
template <int N>
struct Jet {
    std::array<double, N + 1> c{};

    Jet() = default;
    Jet(double v) { c[0] = v; }  // NOLINT: constants promote implicitly

    static Jet variable(double y) {
        Jet j(y);
        if constexpr (N >= 1) j.c[1] = 1;
        return j;
    }

    double value() const { return c[0]; }
    double derivative(int k) const {
        double f = 1;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * f;
    }

    Jet& operator+=(const Jet& o) {
        for (int i = 0; i <= N; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int i = 0; i <= N; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (auto& x : c) x *= s;
        return *this;
    }
};

template <int N> Jet<N> operator+(Jet<N> a, const Jet<N>& b) { return a += b; }
template <int N> Jet<N> operator-(Jet<N> a, const Jet<N>& b) { return a -= b; }
template <int N> Jet<N> operator-(Jet<N> a) { return a *= -1.0; }
template <int N> Jet<N> operator*(Jet<N> a, double s) { return a *= s; }
template <int N> Jet<N> operator*(double s, Jet<N> a) { return a *= s; }
template <int N> Jet<N> operator+(Jet<N> a, double s) { a.c[0] += s; return a; }
template <int N> Jet<N> operator+(double s, Jet<N> a) { a.c[0] += s; return a; }
template <int N> Jet<N> operator-(Jet<N> a, double s) { a.c[0] -= s; return a; }
template <int N> Jet<N> operator-(double s, Jet<N> a) { a *= -1.0; a.c[0] += s; return a; }
template <int N> Jet<N> operator/(Jet<N> a, double s) { return a *= 1.0 / s; }

template <int N>
Jet<N> operator*(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int i = 0; i <= N; ++i)
        for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
}

template <int N>
Jet<N> operator/(const Jet<N>& a, const Jet<N>& b) {
    Jet<N> r;
    for (int k = 0; k <= N; ++k) {
        double s = a.c[k];
        for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
        r.c[k] = s / b.c[0];
    }
    return r;
}

template <int N> Jet<N> operator/(double s, const Jet<N>& b) { return Jet<N>(s) / b; }

// exp, log and pow by the usual power-series recurrences
template <int N>
Jet<N> exp(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += j * a.c[j] * r.c[k - j];
        r.c[k] = s / k;
    }
    return r;
}

template <int N>
Jet<N> log(const Jet<N>& a) {
    Jet<N> r;
    r.c[0] = std::log(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double s = k * a.c[k];
        for (int j = 1; j < k; ++j) s -= j * r.c[j] * a.c[k - j];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}

template <int N>
Jet<N> pow(const Jet<N>& a, double p) {
    // (a^p)' = p a^{p-1} a', solved coefficientwise
    Jet<N> r;
    r.c[0] = std::pow(a.c[0], p);
    for (int k = 1; k <= N; ++k) {
        double s = 0;
        for (int j = 1; j <= k; ++j) s += (p * j - (k - j)) * a.c[j] * r.c[k - j];
        r.c[k] = s / (k * a.c[0]);
    }
    return r;
}

template <int N> Jet<N> sqrt(const Jet<N>& a) { return pow(a, 0.5); }

template <int N>
void sincos(const Jet<N>& a, Jet<N>& s, Jet<N>& co) {
    s = Jet<N>();
    co = Jet<N>();
    s.c[0] = std::sin(a.c[0]);
    co.c[0] = std::cos(a.c[0]);
    for (int k = 1; k <= N; ++k) {
        double ss = 0, cc = 0;
        for (int j = 1; j <= k; ++j) {
            ss += j * a.c[j] * co.c[k - j];
            cc -= j * a.c[j] * s.c[k - j];
        }
        s.c[k] = ss / k;
        co.c[k] = cc / k;
    }
}

template <int N> Jet<N> sin(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return s; }
template <int N> Jet<N> cos(const Jet<N>& a) { Jet<N> s, c; sincos(a, s, c); return c; }

}  // namespace oscsum
