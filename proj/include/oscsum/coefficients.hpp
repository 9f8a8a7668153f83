#pragma once

#include <array>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "oscsum/arith.hpp"

namespace oscsum {

// Level-1 holomorphic Hecke eigenform with exact integer coefficients.
struct GL2Form {
    std::string id;
    int weight = 0;
    i64 limit = 0;
    std::vector<i128> raw;          // raw[n] = a(n), raw[0] = 0
    std::vector<double> normalized; // a(n) / n^{(weight-1)/2}

    double lambda(i64 n) const { return normalized.at(static_cast<std::size_t>(n)); }
};

// Weight-12 discriminant form, a(n) = tau(n), from q * prod (1 - q^n)^24.
GL2Form build_gl2_delta(i64 limit);

// Wraps an explicit coefficient list (used for injected-fault tests and for
// synthetic tables). raw[0] is ignored.
GL2Form gl2_from_raw(std::string id, int weight, std::vector<i128> raw);

// Same shape but with arbitrary real normalized values and no exact data.
GL2Form gl2_from_normalized(std::string id, int weight, std::vector<double> normalized);

// How the archimedean gamma factors of a GL3 object are formed.
//  maass_mu:      the spherical formula driven by the Langlands triple mu.
//  sign_shifted:  L_inf(s) = Gamma_R(s+1) Gamma_C(s+k-1) for a holomorphic
//                 lift of weight k; twisting by sgn moves Gamma_R(s+1) to Gamma_R(s).
enum class GammaConvention { maass_mu, sign_shifted };

const char* to_string(GammaConvention c);

struct GL3Form {
    std::array<std::complex<double>, 3> mu{};
    GammaConvention convention = GammaConvention::maass_mu;
    int base_weight = 0;
    std::shared_ptr<const GL2Form> base;
    i64 limit = 0;

    // A(n1, n2); computable for n1, n2 <= limit (the cache stores n1^2 n2 <= limit).
    double A(i64 n1, i64 n2) const;
    // Local factor A(p^a, p^b) by Jacobi-Trudi.
    double local(i64 p, int a, int b) const;
    // Same local factor by summing Gelfand-Tsetlin patterns; independent guard.
    double local_schur(i64 p, int a, int b) const;

    std::shared_ptr<const Sieve> sieve;
};

GL3Form build_gl3_sym_square(std::shared_ptr<const GL2Form> f, i64 limit);

// Coefficient callbacks for Rankin-Selberg sums.
struct RankinSelbergResult {
    double slope = 0;
    double intercept = 0;
    double max_residual = 0;          // max |S(x) - line(x)| / line(x) on the grid
    double envelope_constant = 0;     // max |S(x) - line(x)| / x^{4/5} on the grid
    std::vector<double> grid, partial_sums;
};

RankinSelbergResult rankin_selberg_average(const GL2Form& f, i64 X);
RankinSelbergResult rankin_selberg_average(const GL3Form& pi, i64 X);

struct HeckeViolation {
    i64 m = 0, n = 0;
    double residual = 0;
};

// Normalized relations, tolerance 1e-10 relative.
std::vector<HeckeViolation> hecke_report(const GL2Form& f);
// Exact relations on raw integers for m*n <= bound; empty when all hold.
std::vector<HeckeViolation> hecke_report_exact(const GL2Form& f, i64 bound);
// GL3 relation A(n,1) A(1,n)-type checks are covered by multiplicativity:
// A(m n1, m' n2) = A(m, m') A(n1, n2) for coprime blocks.
std::vector<HeckeViolation> hecke_report(const GL3Form& pi);

// Cache files. The GL2 cache stores exact integers; the GL3 cache stores
// 17 significant digits per entry.
void write_gl2_cache(const GL2Form& f, const std::string& path);
GL2Form read_gl2_cache(const std::string& path);
void write_gl3_cache(const GL3Form& pi, const std::string& path);

struct CacheVerifyResult {
    bool ok = true;
    i64 rows_checked = 0;
    i64 bad_line = 0;  // 1-based line number of the first mismatch
    std::string message;
};

// Recomputes entries and compares exactly. sample == 0 checks every row;
// otherwise `sample` rows drawn with the given seed plus every row that is
// malformed.
CacheVerifyResult verify_gl2_cache(const std::string& path, std::size_t sample = 0, u64 seed = 1);
CacheVerifyResult verify_gl3_cache(const std::string& path, std::size_t sample = 0, u64 seed = 1);

}  // namespace oscsum
