#include "oscsum/charsums.hpp"

#include <cmath>
#include <limits>

#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

namespace oscsum {

namespace {

// e(k / c) for integer k; reduces first so no precision is lost.
cplx root_of_unity(i64 k, i64 c) {
    k = mod(k, c);
    return e(static_cast<double>(k) / static_cast<double>(c));
}

i64 mulmod(i64 a, i64 b, i64 c) {
    return static_cast<i64>(static_cast<i128>(mod(a, c)) * mod(b, c) % c);
}

// sum_{d | q, d | x} d mu(q/d)
i64 divisor_weight(i64 q, i64 x) {
    i64 s = 0;
    for (i64 d : divisors(q))
        if (mod(x, d) == 0) s += d * mobius(q / d);
    return s;
}

}  // namespace

std::vector<i64> inverse_table(i64 c) {
    require(c >= 1, "inverse_table: modulus must be positive");
    std::vector<i64> inv(static_cast<std::size_t>(c), -1);
    if (c == 1) {
        inv[0] = 0;
        return inv;
    }
    for (i64 a = 1; a < c; ++a)
        if (gcd(a, c) == 1) inv[static_cast<std::size_t>(a)] = modinv(a, c);
    return inv;
}

double kloosterman(i64 m, i64 n, i64 c, const std::vector<i64>& inv) {
    require(c >= 1, "kloosterman: modulus must be positive");
    require(static_cast<i64>(inv.size()) == c, "kloosterman: inverse table has wrong modulus");
    // Histogram of integer phases: equal term multisets give bit-identical sums.
    std::vector<std::uint32_t> hist(static_cast<std::size_t>(c), 0);
    const i64 mm = mod(m, c), nn = mod(n, c);
    for (i64 a = 0; a < c; ++a) {
        i64 ab = inv[static_cast<std::size_t>(a)];
        if (ab < 0) continue;
        ++hist[static_cast<std::size_t>((static_cast<i128>(mm) * a + static_cast<i128>(nn) * ab) % c)];
    }
    Accumulator<double> acc;
    for (i64 k = 0; k < c; ++k)
        if (hist[static_cast<std::size_t>(k)]) acc.add(hist[static_cast<std::size_t>(k)] * root_of_unity(k, c).real());
    return acc.value();
}

double kloosterman(i64 m, i64 n, i64 c) {
    return kloosterman(m, n, c, inverse_table(c));
}

i64 ramanujan_sum(i64 n, i64 q) {
    require(q >= 1, "ramanujan_sum: modulus must be positive");
    i64 g = gcd(n, q);
    i64 s = 0;
    for (i64 d : divisors(g)) s += d * mobius(q / d);
    return s;
}

std::complex<double> frak_c(i64 n1, i64 n2, i64 m, i64 q, i64 r) {
    require(n1 >= 1 && q >= 1 && r >= 1, "frak_c: moduli must be positive");
    require((q * r) % n1 == 0, "frak_c: n1 must divide q r");
    const i64 L = q * r / n1;
    auto inv = inverse_table(L);
    Accumulator<cplx> acc;
    for (i64 a = 0; a < q; ++a) {
        if (gcd(a, q) != 1) continue;
        acc.add(root_of_unity(mulmod(m, a, q), q) * kloosterman(r * a, n2, L, inv));
    }
    return acc.value();
}

std::complex<double> frak_c_expansion(i64 n1, i64 n2, i64 m, i64 q, i64 r) {
    require(n1 >= 1 && q >= 1 && r >= 1, "frak_c_expansion: moduli must be positive");
    require((q * r) % n1 == 0, "frak_c_expansion: n1 must divide q r");
    const i64 L = q * r / n1;
    auto inv = inverse_table(L);
    Accumulator<cplx> acc;
    for (i64 d : divisors(q)) {
        int mu = mobius(q / d);
        if (!mu) continue;
        for (i64 al = 0; al < L; ++al) {
            i64 ab = inv[static_cast<std::size_t>(al)];
            if (ab < 0 || mod(n1 * al + m, d) != 0) continue;
            acc.add(static_cast<double>(d * mu) * root_of_unity(mulmod(n2, ab, L), L));
        }
    }
    return acc.value();
}

std::vector<std::complex<double>> frak_c_row(i64 n1, i64 m, i64 q, i64 r) {
    require(n1 >= 1 && q >= 1 && r >= 1, "frak_c_row: moduli must be positive");
    require((q * r) % n1 == 0, "frak_c_row: n1 must divide q r");
    const i64 L = q * r / n1;
    auto inv = inverse_table(L);
    std::vector<cplx> tw;
    for (i64 a = 0; a < q; ++a)
        if (gcd(a, q) == 1) tw.push_back(root_of_unity(mulmod(m, a, q), q));
    std::vector<cplx> row(static_cast<std::size_t>(L));
    for (i64 beta = 0; beta < L; ++beta) {
        Accumulator<cplx> acc;
        std::size_t k = 0;
        for (i64 a = 0; a < q; ++a) {
            if (gcd(a, q) != 1) continue;
            acc.add(tw[k++] * kloosterman(r * a, beta, L, inv));
        }
        row[static_cast<std::size_t>(beta)] = acc.value();
    }
    return row;
}

namespace {

void check_k_params(const CharSumParams& p) {
    require(p.n1 >= 1 && p.q1 >= 1 && p.q2 >= 1 && p.q2p >= 1 && p.r >= 1, "frak_k: moduli must be positive");
    require((p.q1 * p.r) % p.n1 == 0, "frak_k: n1 must divide q1 r");
}

i64 dual_modulus(const CharSumParams& p) {
    return p.q2 * p.q2p * p.q1 * p.r / p.n1;
}

// sum over units alpha mod L1, alpha' mod L2 of w(alpha) w'(alpha') subject to
// q2 alphabar' - q2' alphabar = nt mod M (inverses taken mod L1 and L2).
template <class W1, class W2>
double weighted_pair_count(i64 L1, i64 L2, i64 M, i64 q2, i64 q2p, i64 nt, W1 w1, W2 w2) {
    auto inv1 = inverse_table(L1), inv2 = inverse_table(L2);
    std::vector<i64> wa(static_cast<std::size_t>(L1), 0), wb(static_cast<std::size_t>(L2), 0);
    for (i64 a = 0; a < L1; ++a)
        if (inv1[static_cast<std::size_t>(a)] >= 0) wa[static_cast<std::size_t>(a)] = w1(a);
    for (i64 a = 0; a < L2; ++a)
        if (inv2[static_cast<std::size_t>(a)] >= 0) wb[static_cast<std::size_t>(a)] = w2(a);
    const i64 target = mod(nt, M);
    i128 total = 0;
    for (i64 a = 0; a < L1; ++a) {
        if (!wa[static_cast<std::size_t>(a)]) continue;
        const i64 left = mulmod(q2p, inv1[static_cast<std::size_t>(a)], M);
        for (i64 b = 0; b < L2; ++b) {
            if (!wb[static_cast<std::size_t>(b)]) continue;
            i64 v = mod(mulmod(q2, inv2[static_cast<std::size_t>(b)], M) - left, M);
            if (v == target) total += static_cast<i128>(wa[static_cast<std::size_t>(a)]) * wb[static_cast<std::size_t>(b)];
        }
    }
    return static_cast<double>(total);
}

}  // namespace

std::complex<double> frak_k(const CharSumParams& p) {
    check_k_params(p);
    const i64 M = dual_modulus(p);
    auto row1 = frak_c_row(p.n1, p.m, p.q1 * p.q2, p.r);
    auto row2 = frak_c_row(p.n1, p.mp, p.q1 * p.q2p, p.r);
    const i64 L1 = static_cast<i64>(row1.size()), L2 = static_cast<i64>(row2.size());
    Accumulator<cplx> acc;
    for (i64 beta = 0; beta < M; ++beta)
        acc.add(row1[static_cast<std::size_t>(beta % L1)] * std::conj(row2[static_cast<std::size_t>(beta % L2)]) *
                root_of_unity(mulmod(p.nt, beta, M), M));
    return acc.value() / static_cast<double>(M);
}

double frak_k_expansion(const CharSumParams& p) {
    check_k_params(p);
    const i64 qa = p.q1 * p.q2, qb = p.q1 * p.q2p;
    const i64 L1 = qa * p.r / p.n1, L2 = qb * p.r / p.n1, M = dual_modulus(p);
    return weighted_pair_count(
        L1, L2, M, p.q2, p.q2p, p.nt, [&](i64 a) { return divisor_weight(qa, p.n1 * a + p.m); },
        [&](i64 a) { return divisor_weight(qb, p.n1 * a + p.mp); });
}

bool frak_k_factorable(const CharSumParams& p) {
    if (p.n1 < 1 || (p.q1 * p.r) % p.n1 != 0) return false;
    if (gcd(p.q2 * p.q2p, p.n1 * p.r) != 1) return false;
    for (auto [pr, e] : factorize(p.q1))
        if ((p.n1 * p.r) % pr != 0) return false;
    return true;
}

double frak_k_factored(const CharSumParams& p) {
    check_k_params(p);
    require(frak_k_factorable(p), "frak_k_factored: need q1 | (n1 r)^inf, (q2 q2', n1 r) = 1, n1 | q1 r");
    const i64 L = p.q1 * p.r / p.n1;
    double k1 = weighted_pair_count(
        L, L, L, p.q2, p.q2p, p.nt, [&](i64 a) { return divisor_weight(p.q1, p.n1 * a + p.m); },
        [&](i64 a) { return divisor_weight(p.q1, p.n1 * a + p.mp); });
    double k2 = weighted_pair_count(
        p.q2, p.q2p, p.q2 * p.q2p, p.q2, p.q2p, p.nt, [&](i64 a) { return divisor_weight(p.q2, p.n1 * a + p.m); },
        [&](i64 a) { return divisor_weight(p.q2p, p.n1 * a + p.mp); });
    return k1 * k2;
}

FrakKBoundReport frak_k_bounds(const CharSumParams& p) {
    check_k_params(p);
    FrakKBoundReport rep;
    rep.value = frak_k(p);
    const double mag = std::abs(rep.value);
    const double eps = 1e-9 * std::max(1.0, mag);

    // counting bound
    const i64 L = p.q1 * p.r / p.n1;
    double first = 0;
    for (i64 d1 : divisors(p.q1))
        for (i64 d1p : divisors(p.q1)) {
            double cnt = weighted_pair_count(
                L, L, L, p.q2, p.q2p, p.nt, [&](i64 a) { return mod(p.n1 * a + p.m, d1) == 0 ? 1 : 0; },
                [&](i64 a) { return mod(p.n1 * a + p.mp, d1p) == 0 ? 1 : 0; });
            first += static_cast<double>(d1 * d1p) * cnt;
        }
    double second = 0;
    for (i64 d2 : divisors(gcd(p.q2, p.q2p * p.n1 - p.m * p.nt)))
        for (i64 d2p : divisors(gcd(p.q2p, p.q2 * p.n1 + p.mp * p.nt))) second += static_cast<double>(d2 * d2p);
    rep.bound_nonzero = first * second;
    rep.ratio_nonzero = mag <= eps ? 0.0 : (rep.bound_nonzero > 0 ? mag / rep.bound_nonzero
                                                                  : std::numeric_limits<double>::infinity());
    rep.holds_nonzero = mag <= rep.bound_nonzero + eps;

    if (p.nt == 0) {
        const i64 qq = p.q1 * p.q2;
        double s = 0;
        for (i64 d : divisors(qq))
            for (i64 dp : divisors(qq)) {
                i64 g = gcd(d, dp);
                if (mod(p.m - p.mp, g) == 0) s += static_cast<double>(g);
            }
        rep.bound_zero = static_cast<double>(p.q1 * p.q2 * p.r) * s;
        rep.ratio_zero = mag <= eps ? 0.0 : mag / rep.bound_zero;
        rep.holds_zero = mag <= rep.bound_zero + eps;
    }
    return rep;
}

}  // namespace oscsum
