#include "oscsum/special.hpp"

#include <cmath>
#include <string>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

namespace oscsum {

namespace {

// log sin(pi z). For |Im z| large sin overflows, so factor out the dominant
// exponential first.
cplx log_sin_pi(cplx z) {
    const cplx I(0, 1);
    if (std::abs(z.imag()) < 1.0) return std::log(std::sin(kPi * z));
    if (z.imag() > 0) {
        cplx w = std::exp(2.0 * kPi * I * z);
        return -I * kPi * z + std::log(1.0 - w) - std::log(-2.0 * I);
    }
    cplx w = std::exp(-2.0 * kPi * I * z);
    return I * kPi * z + std::log(1.0 - w) - std::log(2.0 * I);
}

// B_{2k} / (2k (2k-1)), k = 1..8
constexpr double kStirling[] = {1.0 / 12,           -1.0 / 360,         1.0 / 1260,
                                -1.0 / 1680,        1.0 / 1188,         -691.0 / 360360,
                                1.0 / 156,          -3617.0 / 122400};

long double series_j(int v, long double x) {
    if (x == 0) return v == 0 ? 1.0L : 0.0L;
    const long double h = x / 2, h2 = h * h;
    long double term = std::exp(v * std::log(h) - std::lgamma(static_cast<long double>(v) + 1));
    long double sum = term;
    for (int k = 1; k < 2000; ++k) {
        term *= -h2 / (static_cast<long double>(k) * (v + k));
        sum += term;
        if (k > h && std::abs(term) <= 1e-21L * std::abs(sum)) break;
    }
    return sum;
}

// cos and sin of x - (2v+1) pi / 4 without rounding the shift into x.
void hankel_phase(int v, double x, double& c, double& s) {
    static const double r = std::sqrt(0.5);
    static const double cs[8][2] = {{1, 0}, {r, r}, {0, 1}, {-r, r}, {-1, 0}, {-r, -r}, {0, -1}, {r, -r}};
    const int k = (2 * v + 1) % 8;
    const double cx = std::cos(x), sx = std::sin(x);
    const double cp = cs[k][0], sp = cs[k][1];
    c = cx * cp + sx * sp;
    s = sx * cp - cx * sp;
}

// Hankel expansion summed until terms stall. Returns false when the terms
// start growing before reaching double precision.
bool hankel_converged(int v, double x, double& out) {
    const double mu = 4.0 * v * v;
    double P = 1, Q = 0, t = 1;
    for (int j = 1; j < 400; ++j) {
        double next = t * (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (8.0 * j * x);
        if (std::abs(next) > std::abs(t) && j > 1) return false;
        t = next;
        // j mod 4: 1 -> Q+, 2 -> P-, 3 -> Q-, 0 -> P+
        switch (j % 4) {
            case 0: P += t; break;
            case 1: Q += t; break;
            case 2: P -= t; break;
            case 3: Q -= t; break;
        }
        if (std::abs(t) < 1e-17 * (std::abs(P) + std::abs(Q))) {
            double c, s;
            hankel_phase(v, x, c, s);
            out = std::sqrt(2.0 / (kPi * x)) * (P * c - Q * s);
            return true;
        }
        if (t == 0) break;
    }
    return false;
}

// Backward recurrence from well above max(v, x), normalized by
// J_0 + 2 sum J_{2k} = 1.
double miller_j(int v, double x) {
    const double top = std::max<double>(v, x);
    int m = static_cast<int>(top + 40 + 15 * std::cbrt(top + 1) + std::sqrt(160.0 * v));
    m += m % 2;
    double jp = 0, j = 1, norm = 0, want = 0;
    for (int k = m; k > 0; --k) {
        double jm = 2.0 * k / x * j - jp;
        jp = j;
        j = jm;
        if (std::abs(j) > 1e250) {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            want *= 1e-250;
        }
        if (k - 1 == v) want = j;
        if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2 * j;
    }
    norm += j;
    return want / norm;
}

}  // namespace

cplx log_gamma(cplx z) {
    if (z.real() < 0.5) {
        const double n = std::nearbyint(z.real());
        if (n <= 0 && std::abs(z - cplx(n, 0)) < 1e-14)
            throw ValidationError("log_gamma: argument at a pole (z = " + std::to_string(n) + ")");
        return std::log(kPi) - log_sin_pi(z) - log_gamma(1.0 - z);
    }
    cplx shift = 0;
    while (std::abs(z) < 15) {
        shift += std::log(z);
        z += 1.0;
    }
    const cplx zi = 1.0 / z, zi2 = zi * zi;
    cplx corr = 0, p = zi;
    for (double c : kStirling) {
        corr += c * p;
        p *= zi2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(kTwoPi) + corr - shift;
}

double hankel_symbol(double v, int j) {
    double r = 1;
    for (int i = 1; i <= j; ++i) r *= (4 * v * v - (2.0 * i - 1) * (2.0 * i - 1)) / (4.0 * i);
    return r;
}

double bessel_j(int v, double x) {
    require(v >= 0 && v <= 200, "bessel_j: order must lie in [0, 200]");
    require(x >= 0 && x <= 1e8, "bessel_j: argument must lie in [0, 1e8]");
    if (x <= 12 || x * x < 4.0 * (v + 1)) return static_cast<double>(series_j(v, x));
    double out;
    if (x > 25 && hankel_converged(v, x, out)) return out;
    return miller_j(v, x);
}

BesselAsymptotic bessel_j_asymptotic(int v, double x, int J) {
    require(v >= 0 && J >= 0, "bessel_j_asymptotic: order and truncation must be nonnegative");
    require(x >= std::max(1.0, static_cast<double>(v) * v),
            "bessel_j_asymptotic: need x >= max(1, v^2) for the asymptotic regime");
    // J_v(x) = sqrt(2/(pi x)) Re[e^{i w} sum_j (v,j) (i/(2x))^j]
    double c, s;
    hankel_phase(v, x, c, s);
    const cplx ew(c, s), step(0, 1.0 / (2 * x));
    cplx sum = 0, pw = 1;
    for (int j = 0; j <= J; ++j) {
        sum += hankel_symbol(v, j) * pw;
        pw *= step;
    }
    const double lead = std::sqrt(2.0 / (kPi * x));
    BesselAsymptotic r;
    r.value = lead * (ew * sum).real();
    // Terms past J shrink at least fourfold while x >= v^2, and beyond
    // j ~ v the remainder is below the first omitted term; twice that term
    // therefore covers both pieces.
    r.error_cap = 2 * lead * std::abs(hankel_symbol(v, J + 1)) * std::pow(2 * x, -(J + 1.0));
    return r;
}

}  // namespace oscsum
