#include <cmath>
#include <random>

#include "doctest.h"
#include "oscsum/charsums.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

using namespace oscsum;

namespace {

// Brute force with inverses found by search and plain long double sums.
long double brute_kloosterman(i64 m, i64 n, i64 c) {
    long double s = 0;
    for (i64 a = 0; a < c; ++a) {
        if (std::gcd(a, c) != 1) continue;
        i64 ab = 0;
        while ((a * ab) % c != 1 % c) ++ab;
        long double ph = 2.0L * 3.14159265358979323846264338327950288L *
                         static_cast<long double>(((m * a + n * ab) % c + c) % c) / c;
        s += std::cos(ph);
    }
    return s;
}

std::complex<double> brute_frak_c(i64 n1, i64 n2, i64 m, i64 q, i64 r) {
    const i64 L = q * r / n1;
    std::complex<long double> s = 0;
    const long double tau = 2.0L * 3.14159265358979323846264338327950288L;
    for (i64 a = 0; a < q; ++a) {
        if (std::gcd(a, q) != 1) continue;
        long double kl = brute_kloosterman(r * a, n2, L);
        s += std::polar(1.0L, tau * ((m * a) % q + q) / q) * kl;
    }
    return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

}  // namespace

TEST_CASE("kloosterman small values") {
    CHECK(kloosterman(1, 1, 1) == doctest::Approx(1.0));
    CHECK(kloosterman(1, 1, 3) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(kloosterman(2, 3, 5) == doctest::Approx(2 + 2 * std::cos(4 * kPi / 5)).epsilon(1e-12));
    CHECK(kloosterman(2, 3, 5) == doctest::Approx(0.3819660).epsilon(1e-7));
}

TEST_CASE("kloosterman agrees with brute force and obeys symmetry and Weil") {
    for (i64 c = 1; c <= 120; ++c)
        for (i64 m = -3; m <= 5; ++m)
            for (i64 n = 0; n <= 5; ++n) {
                double k = kloosterman(m, n, c);
                REQUIRE(std::abs(k - static_cast<double>(brute_kloosterman(m, n, c))) < 1e-9);
                REQUIRE(k == kloosterman(n, m, c));
                double weil = static_cast<double>(divisor_count(c)) *
                              std::sqrt(static_cast<double>(gcd(gcd(m, n), c))) * std::sqrt(static_cast<double>(c));
                REQUIRE(std::abs(k) <= weil + 1e-9);
            }
}

TEST_CASE("ramanujan sums") {
    CHECK(ramanujan_sum(7, 1) == 1);
    CHECK(ramanujan_sum(0, 6) == 2);
    CHECK(ramanujan_sum(1, 6) == 1);
    for (i64 q = 1; q <= 60; ++q)
        for (i64 n = -10; n <= 30; ++n) {
            double direct = 0;
            for (i64 a = 0; a < q; ++a)
                if (gcd(a, q) == 1) direct += std::cos(kTwoPi * static_cast<double>(mod(n * a, q)) / q);
            REQUIRE(std::abs(direct - static_cast<double>(ramanujan_sum(n, q))) < 1e-9);
        }
    // multiplicative in q
    for (i64 q1 = 1; q1 <= 20; ++q1)
        for (i64 q2 = 1; q2 <= 20; ++q2) {
            if (gcd(q1, q2) != 1) continue;
            for (i64 n = 0; n <= 40; ++n) REQUIRE(ramanujan_sum(n, q1 * q2) == ramanujan_sum(n, q1) * ramanujan_sum(n, q2));
        }
}

TEST_CASE("frak_c: trivial tuple, brute force, and the two routes") {
    CHECK(std::abs(frak_c(1, 1, 0, 1, 1) - std::complex<double>(1, 0)) < 1e-12);
    CHECK(std::abs(frak_c(1, 2, 1, 3, 1) - brute_frak_c(1, 2, 1, 3, 1)) < 1e-9);
    CHECK_THROWS_AS(frak_c(5, 1, 1, 3, 1), ValidationError);

    std::mt19937_64 rng(42);
    std::uniform_int_distribution<i64> qd(1, 50), rd(1, 6), md(-20, 20);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        i64 q = qd(rng), r = rd(rng);
        auto ds = divisors(q * r);
        i64 n1 = ds[std::uniform_int_distribution<std::size_t>(0, ds.size() - 1)(rng)];
        i64 n2 = md(rng), m = md(rng);
        worst = std::max(worst, std::abs(frak_c(n1, n2, m, q, r) - frak_c_expansion(n1, n2, m, q, r)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("frak_c_row matches pointwise evaluation") {
    auto row = frak_c_row(2, 3, 6, 4);
    REQUIRE(row.size() == 12);
    for (i64 b = 0; b < 12; ++b) CHECK(std::abs(row[b] - frak_c(2, b, 3, 6, 4)) < 1e-10);
}

TEST_CASE("frak_k: trivial tuple and vanishing zero frequency") {
    CharSumParams p;
    p.m = 0;
    p.mp = 0;
    CHECK(std::abs(frak_k(p) - std::complex<double>(1, 0)) < 1e-12);
    p.m = 1;
    p.mp = 2;
    p.q2 = 3;
    p.q2p = 5;
    p.nt = 0;
    CHECK(std::abs(frak_k(p)) < 1e-10);
    CHECK(frak_k_expansion(p) == 0.0);
}

TEST_CASE("frak_k: definition, expansion and factorization agree") {
    std::mt19937_64 rng(7);
    int tested = 0;
    for (int trial = 0; trial < 4000 && tested < 150; ++trial) {
        CharSumParams p;
        std::uniform_int_distribution<i64> d(1, 20), s(-6, 6);
        p.q1 = d(rng);
        p.r = std::uniform_int_distribution<i64>(1, 6)(rng);
        p.q2 = d(rng);
        p.q2p = d(rng);
        auto ds = divisors(p.q1 * p.r);
        p.n1 = ds[std::uniform_int_distribution<std::size_t>(0, ds.size() - 1)(rng)];
        p.m = s(rng);
        p.mp = s(rng);
        p.nt = s(rng);
        if (!frak_k_factorable(p)) continue;
        if (p.q2 * p.q2p * p.q1 * p.r / p.n1 > 4000) continue;
        ++tested;
        auto k = frak_k(p);
        double ex = frak_k_expansion(p), fa = frak_k_factored(p);
        REQUIRE(std::abs(k.imag()) < 1e-9 * std::max(1.0, std::abs(k)));
        REQUIRE(std::abs(k.real() - ex) <= 1e-9 * std::max(1.0, std::abs(ex)));
        REQUIRE(fa == ex);
    }
    CHECK(tested >= 100);
}

TEST_CASE("frak_k bounds on the trivial tuple and a zero-frequency case") {
    CharSumParams p;
    auto rep = frak_k_bounds(p);
    CHECK(rep.holds_nonzero);
    CHECK(rep.holds_zero);
    p.q1 = 2;
    p.r = 2;
    p.n1 = 2;
    p.q2 = 3;
    p.q2p = 3;
    p.m = 1;
    p.mp = 4;
    rep = frak_k_bounds(p);
    CHECK(rep.holds_zero);
}
