#pragma once

#include <complex>
#include <vector>

#include "oscsum/arith.hpp"

namespace oscsum {

// S(m, n; c) = sum over a mod c, (a,c)=1, of e((m a + n abar) / c).
double kloosterman(i64 m, i64 n, i64 c);
// Same sum with a precomputed table of inverses (inv[a] = abar, or -1).
double kloosterman(i64 m, i64 n, i64 c, const std::vector<i64>& inv);
std::vector<i64> inverse_table(i64 c);

// c_q(n) = sum_{d | (n, q)} d mu(q/d).
i64 ramanujan_sum(i64 n, i64 q);

// sum over a mod q, (a,q)=1, of e(m a / q) S(r a, n2; q r / n1). Requires n1 | q r.
std::complex<double> frak_c(i64 n1, i64 n2, i64 m, i64 q, i64 r);
// The same quantity expanded through Ramanujan sums:
// sum_{d|q} d mu(q/d) sum_{alpha mod qr/n1 unit, n1 alpha = -m mod d} e(n2 alphabar / (qr/n1)).
std::complex<double> frak_c_expansion(i64 n1, i64 n2, i64 m, i64 q, i64 r);
// All values frak_c(n1, beta, m, q, r) for beta mod qr/n1 at once.
std::vector<std::complex<double>> frak_c_row(i64 n1, i64 m, i64 q, i64 r);

struct CharSumParams {
    i64 n1 = 1, n2 = 0, m = 0, mp = 0;   // mp is m'
    i64 q = 1, q1 = 1, q2 = 1, q2p = 1;  // q2p is q2'
    i64 r = 1;
    i64 nt = 0;                          // the dual frequency n~2
};

// The Poisson-dual sum, from its definition:
// (1/M) sum_{beta mod M} c(n1,beta,m,q1 q2) conj(c(n1,beta,m',q1 q2')) e(nt beta / M),
// M = q2 q2' q1 r / n1.
std::complex<double> frak_k(const CharSumParams& p);
// The Moebius/divisor expansion as a weighted count of (alpha, alpha') pairs.
double frak_k_expansion(const CharSumParams& p);
// Product of the two coprime-modulus factors. Requires q1 | (n1 r)^inf,
// (q2 q2', n1 r) = 1 and n1 | q1 r.
double frak_k_factored(const CharSumParams& p);
bool frak_k_factorable(const CharSumParams& p);

struct FrakKBoundReport {
    std::complex<double> value;
    double bound_nonzero = 0;  // counting bound, constant 1
    double bound_zero = 0;     // only meaningful for nt = 0
    double ratio_nonzero = 0;  // |value| / bound_nonzero (0 when both vanish)
    double ratio_zero = 0;
    bool holds_nonzero = true;
    bool holds_zero = true;
};

FrakKBoundReport frak_k_bounds(const CharSumParams& p);

}  // namespace oscsum
