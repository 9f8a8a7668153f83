#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "doctest.h"
#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"
#include "oscsum/special.hpp"

using namespace oscsum;
using big = boost::multiprecision::cpp_bin_float_100;

namespace {

// Ascending series at 100 digits, at most 500 terms.
double series_oracle(int v, double xd) {
    big x = xd, h2 = x * x / 4, term = 1;
    for (int k = 1; k <= v; ++k) term *= x / (2 * k);
    big sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= -h2 / (k * (k + v));
        sum += term;
    }
    return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("log_gamma against real lgamma and the functional equation") {
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.3, 20.0, 150.0}) {
        cplx lg = log_gamma(cplx(x, 0));
        CHECK(std::abs(std::exp(lg) - std::tgamma(x)) <= 1e-13 * std::tgamma(x));
    }
    for (double x : {-0.5, -2.5, -7.25}) {
        cplx g = std::exp(log_gamma(cplx(x, 0)));
        CHECK(std::abs(g.real() - std::tgamma(x)) <= 1e-12 * std::abs(std::tgamma(x)));
    }
    // Gamma(z+1) = z Gamma(z) across the plane, including large |Im z|
    for (double re : {-3.7, -0.4, 0.3, 2.0, 11.5})
        for (double im : {-300.0, -40.0, -1.0, 0.2, 3.0, 55.0, 1000.0}) {
            cplx z(re, im);
            cplx lhs = log_gamma(z + 1.0) - log_gamma(z) - std::log(z);
            lhs = std::exp(lhs);
            CHECK(std::abs(lhs - 1.0) < 1e-11);
        }
    // |Gamma(1/2 + i t)|^2 = pi / cosh(pi t)
    for (double t : {0.5, 5.0, 50.0}) {
        double m = std::exp(2 * log_gamma(cplx(0.5, t)).real());
        CHECK(m == doctest::Approx(kPi / std::cosh(kPi * t)).epsilon(1e-11));
    }
    CHECK_THROWS_AS(log_gamma(cplx(-3, 0)), ValidationError);
    CHECK_THROWS_AS(log_gamma(cplx(0, 0)), ValidationError);
}

TEST_CASE("bessel_j basic values") {
    CHECK(bessel_j(0, 0) == 1.0);
    CHECK(bessel_j(3, 0) == 0.0);
    CHECK(std::abs(bessel_j(11, 20) - series_oracle(11, 20)) <= 1e-10 * std::abs(series_oracle(11, 20)));
    CHECK_THROWS_AS(bessel_j(201, 1.0), ValidationError);
    CHECK_THROWS_AS(bessel_j(1, -1.0), ValidationError);
    CHECK_THROWS_AS(bessel_j(1, 2e8), ValidationError);
}

TEST_CASE("bessel_j matches the high-precision series across regimes") {
    // Relative error is measured against max(|J|, local envelope) so that
    // points next to a zero do not demand impossible relative accuracy.
    double worst = 0;
    for (int v : {0, 1, 2, 5, 11, 30, 75, 150, 200})
        for (double x : {0.01, 0.7, 3.0, 9.5, 12.5, 18.0, 26.0, 40.0, 63.0, 90.0, 120.0}) {
            double ref = series_oracle(v, x);
            double env = std::max(std::abs(ref), x > v ? 0.1 * std::sqrt(2 / (kPi * x)) : 0.0);
            if (env < 1e-280) continue;
            double err = std::abs(bessel_j(v, x) - ref) / env;
            worst = std::max(worst, err);
            INFO("v=" << v << " x=" << x);
            CHECK(err <= 1e-10);
        }
    MESSAGE("worst relative error vs series: " << worst);
}

TEST_CASE("bessel_j large arguments agree with Boost") {
    for (int v : {0, 11, 50, 200})
        for (double x : {200.0, 1234.5, 5e4, 3e6, 9.9e7}) {
            double ref = boost::math::cyl_bessel_j(v, x);
            double env = std::sqrt(2 / (kPi * x));
            CHECK(std::abs(bessel_j(v, x) - ref) <= 1e-9 * env);
        }
}

TEST_CASE("bessel_j_asymptotic") {
    CHECK_THROWS_AS(bessel_j_asymptotic(11, 100, 2), ValidationError);
    // leading term is the classical cosine
    for (double x : {130.0, 500.0, 4000.0}) {
        double lead = std::sqrt(2 / (kPi * x)) * std::cos(x - 11 * kPi / 2 - kPi / 4);
        CHECK(bessel_j_asymptotic(11, x, 0).value == doctest::Approx(lead).epsilon(1e-9).scale(1e-3));
    }
    auto a = bessel_j_asymptotic(11, 500, 3);
    CHECK(std::abs(a.value - bessel_j(11, 500)) <= a.error_cap);

    double prev = INFINITY;
    for (int J = 0; J <= 4; ++J) {
        auto r = bessel_j_asymptotic(11, 1000, J);
        double err = std::abs(r.value - bessel_j(11, 1000));
        CHECK(err <= r.error_cap);
        CHECK(err < prev);
        prev = err;
    }
    // error cap covers the truth over a sweep
    for (int v : {0, 1, 4, 11, 20})
        for (double x : {std::max(1.0, 1.0 * v * v), 2.0 * v * v + 3, 777.0, 1e4})
            for (int J = 0; J <= 5; ++J) {
                auto r = bessel_j_asymptotic(v, x, J);
                CHECK(std::abs(r.value - bessel_j(v, x)) <= r.error_cap + 1e-15);
            }
}

TEST_CASE("hankel_symbol matches its gamma-ratio definition") {
    for (double v : {0.0, 1.0, 11.0, 2.25})
        for (int j = 0; j <= 6; ++j) {
            double want = std::tgamma(v + j + 0.5) / (std::tgamma(j + 1.0) * std::tgamma(v - j + 0.5));
            CHECK(hankel_symbol(v, j) == doctest::Approx(want).epsilon(1e-12));
        }
}
