#include "oscsum/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ntt.hpp"
#include "oscsum/errors.hpp"
#include "oscsum/numeric.hpp"

namespace oscsum {

namespace {

using detail::u32;

constexpr u32 kP[5] = {998244353u, 1004535809u, 754974721u, 469762049u, 167772161u};
constexpr i64 kMaxTransformLimit = i64{1} << 20;  // 2^21-point transforms

template <u32 P, u32 G>
std::vector<u32> eighth_power_of_eta_cubed(i64 limit) {
    // prod (1-q^n)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2}
    std::vector<u32> a(static_cast<std::size_t>(limit), 0);
    for (i64 k = 0;; ++k) {
        i64 e = k * (k + 1) / 2;
        if (e >= limit) break;
        i64 c = (2 * k + 1) % P;
        a[static_cast<std::size_t>(e)] = static_cast<u32>(k % 2 ? (P - c) % P : c);
    }
    const std::size_t keep = static_cast<std::size_t>(limit);
    for (int s = 0; s < 3; ++s) detail::Ntt<P, G>::square_truncated(a, keep);
    return a;
}

u32 inv_mod(u64 a, u32 p) {
    u64 r = 1, e = p - 2, x = a % p;
    while (e) {
        if (e & 1) r = r * x % p;
        x = x * x % p;
        e >>= 1;
    }
    return static_cast<u32>(r);
}

// Garner reconstruction into the symmetric range (-M/2, M/2).
i128 garner(const std::array<u32, 5>& r) {
    std::array<u64, 5> v{};
    for (int k = 0; k < 5; ++k) {
        const u64 p = kP[k];
        // value of the partial mixed-radix number mod p
        u64 acc = 0, radix = 1;
        for (int j = 0; j < k; ++j) {
            acc = (acc + v[j] % p * radix) % p;
            radix = radix * (kP[j] % p) % p;
        }
        u64 diff = (r[k] + p - acc) % p;
        v[k] = diff * inv_mod(radix, kP[k]) % p;
    }
    using u128 = unsigned __int128;
    u128 x = 0, m = 1;
    long double approx = 0, mod_total = 1;
    for (int k = 0; k < 5; ++k) {
        x += static_cast<u128>(v[k]) * m;
        approx += static_cast<long double>(v[k]) * mod_total;
        m *= kP[k];
        mod_total *= kP[k];
    }
    if (approx > mod_total / 2) x -= m;  // both wrap modulo 2^128
    return static_cast<i128>(x);
}

double normalize(i128 a, i64 n, int weight) {
    return static_cast<double>(static_cast<long double>(a) /
                               std::pow(static_cast<long double>(n), (weight - 1) / 2.0L));
}

void fill_normalized(GL2Form& f) {
    f.normalized.assign(f.raw.size(), 0.0);
    for (std::size_t n = 1; n < f.raw.size(); ++n)
        f.normalized[n] = normalize(f.raw[n], static_cast<i64>(n), f.weight);
}

}  // namespace

GL2Form build_gl2_delta(i64 limit) {
    require(limit >= 1, "build_gl2_delta: limit must be >= 1");
    // |tau(n)| <= d(n) n^{11/2}; keep that bound below 2^126 so both the
    // 128-bit storage and the CRT range are safe.
    {
        i64 maxd = 1;
        if (limit > 1) {
            std::vector<std::uint16_t> d(static_cast<std::size_t>(limit + 1), 0);
            for (i64 i = 1; i <= limit; ++i)
                for (i64 j = i; j <= limit; j += i) ++d[static_cast<std::size_t>(j)];
            maxd = *std::max_element(d.begin() + 1, d.end());
        }
        long double bound = maxd * std::pow(static_cast<long double>(limit), 5.5L);
        if (bound >= std::ldexp(1.0L, 126))
            throw ValidationError("build_gl2_delta: limit " + std::to_string(limit) +
                                  " overflows the 128-bit coefficient width");
    }
    if (limit > kMaxTransformLimit)
        throw ValidationError("build_gl2_delta: limit " + std::to_string(limit) + " exceeds the transform length (max " +
                              std::to_string(kMaxTransformLimit) + ")");

    std::array<std::vector<u32>, 5> res = {
        eighth_power_of_eta_cubed<kP[0], 3>(limit), eighth_power_of_eta_cubed<kP[1], 3>(limit),
        eighth_power_of_eta_cubed<kP[2], 11>(limit), eighth_power_of_eta_cubed<kP[3], 3>(limit),
        eighth_power_of_eta_cubed<kP[4], 3>(limit)};

    GL2Form f;
    f.id = "delta";
    f.weight = 12;
    f.limit = limit;
    f.raw.assign(static_cast<std::size_t>(limit + 1), 0);
    for (i64 n = 1; n <= limit; ++n) {
        std::array<u32, 5> r{};
        for (int k = 0; k < 5; ++k) r[k] = res[k][static_cast<std::size_t>(n - 1)];
        f.raw[static_cast<std::size_t>(n)] = garner(r);
    }
    fill_normalized(f);
    return f;
}

GL2Form gl2_from_raw(std::string id, int weight, std::vector<i128> raw) {
    require(raw.size() >= 2, "gl2_from_raw: need at least a(1)");
    GL2Form f;
    f.id = std::move(id);
    f.weight = weight;
    f.limit = static_cast<i64>(raw.size()) - 1;
    f.raw = std::move(raw);
    f.raw[0] = 0;
    fill_normalized(f);
    return f;
}

GL2Form gl2_from_normalized(std::string id, int weight, std::vector<double> normalized) {
    require(normalized.size() >= 2, "gl2_from_normalized: need at least lambda(1)");
    GL2Form f;
    f.id = std::move(id);
    f.weight = weight;
    f.limit = static_cast<i64>(normalized.size()) - 1;
    f.normalized = std::move(normalized);
    f.normalized[0] = 0;
    return f;
}

const char* to_string(GammaConvention c) {
    return c == GammaConvention::maass_mu ? "maass_mu" : "sign_shifted";
}

// ---------------------------------------------------------------------------

double GL3Form::local(i64 p, int a, int b) const {
    if (a == 0 && b == 0) return 1.0;
    const double lp = base->lambda(p);
    const double e1 = lp * lp - 1.0;  // = e2, and e3 = 1
    const int top = a + b + 1;
    double h[64];
    require(top < 62, "GL3Form::local: exponent too large");
    h[0] = 1.0;
    for (int k = 1; k <= top; ++k) {
        double hk = e1 * h[k - 1];
        if (k >= 2) hk -= e1 * h[k - 2];
        if (k >= 3) hk += h[k - 3];
        h[k] = hk;
    }
    double hb_minus = b >= 1 ? h[b - 1] : 0.0;
    return h[a + b] * h[b] - h[a + b + 1] * hb_minus;
}

double GL3Form::local_schur(i64 p, int a, int b) const {
    // Shape (l1, l2, 0) with l1 = a+b, l2 = b; variables (alpha^2, 1, alpha^-2).
    const double lp = std::clamp(base->lambda(p), -2.0, 2.0);
    const double theta = std::acos(lp / 2.0);
    const std::complex<double> x1 = std::polar(1.0, 2 * theta), x2 = 1.0, x3 = std::polar(1.0, -2 * theta);
    const int l1 = a + b, l2 = b;
    std::complex<double> s = 0;
    for (int m1 = l2; m1 <= l1; ++m1)
        for (int m2 = 0; m2 <= l2; ++m2)
            for (int v = m2; v <= m1; ++v)
                s += std::pow(x1, v) * std::pow(x2, m1 + m2 - v) * std::pow(x3, l1 + l2 - m1 - m2);
    return s.real();
}

double GL3Form::A(i64 n1, i64 n2) const {
    require(n1 >= 1 && n2 >= 1, "GL3Form::A: indices must be positive");
    // Any pair with both indices inside the sieve is computable; the cache
    // only stores n1^2 n2 <= limit.
    require(n1 <= limit && n2 <= limit, "GL3Form::A: (" + std::to_string(n1) + "," + std::to_string(n2) +
                                            ") outside limit " + std::to_string(limit));
    double v = 1.0;
    i64 x = n1, y = n2;
    while (x > 1 || y > 1) {
        i64 p = x > 1 ? sieve->spf(x) : sieve->spf(y);
        if (y > 1) p = std::min(p, sieve->spf(y));
        int ea = 0, eb = 0;
        while (x % p == 0) {
            x /= p;
            ++ea;
        }
        while (y % p == 0) {
            y /= p;
            ++eb;
        }
        // the lift is self-dual, so A(p^a, p^b) = A(p^b, p^a); a fixed order
        // makes A(n1, n2) and A(n2, n1) agree to the last bit
        v *= local(p, std::min(ea, eb), std::max(ea, eb));
    }
    return v;
}

GL3Form build_gl3_sym_square(std::shared_ptr<const GL2Form> f, i64 limit) {
    require(f != nullptr, "build_gl3_sym_square: missing base form");
    require(limit >= 1, "build_gl3_sym_square: limit must be >= 1");
    require(f->limit >= limit, "build_gl3_sym_square: base form built to " + std::to_string(f->limit) +
                                   " but limit " + std::to_string(limit) + " requested");
    GL3Form pi;
    pi.base_weight = f->weight;
    const double k1 = f->weight - 1;
    pi.mu = {std::complex<double>(k1, 0), 0.0, std::complex<double>(-k1, 0)};
    pi.base = std::move(f);
    pi.limit = limit;
    pi.sieve = std::make_shared<Sieve>(limit);

    // Guard: Jacobi-Trudi must match the pattern sum on small prime powers.
    for (i64 p : {2, 3, 5, 7, 11, 13}) {
        if (p > limit) break;
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 5; ++b) {
                double u = pi.local(p, a, b), w = pi.local_schur(p, a, b);
                if (std::abs(u - w) > 1e-12 * std::max(1.0, std::abs(w)))
                    throw std::logic_error("build_gl3_sym_square: local factor mismatch at p=" + std::to_string(p) +
                                           " a=" + std::to_string(a) + " b=" + std::to_string(b));
            }
    }
    return pi;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> dyadic_grid(i64 X) {
    std::vector<double> g;
    for (i64 x = 16; x <= X; x *= 2) g.push_back(static_cast<double>(x));
    if (g.empty() || g.back() != static_cast<double>(X)) g.push_back(static_cast<double>(X));
    return g;
}

RankinSelbergResult fit_partial_sums(const std::vector<double>& prefix, i64 X) {
    RankinSelbergResult r;
    r.grid = dyadic_grid(X);
    for (double x : r.grid) r.partial_sums.push_back(prefix[static_cast<std::size_t>(x)]);
    LineFit lf = fit_line(r.grid, r.partial_sums);
    r.slope = lf.slope;
    r.intercept = lf.intercept;
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        double line = lf.intercept + lf.slope * r.grid[i];
        double dev = std::abs(r.partial_sums[i] - line);
        r.max_residual = std::max(r.max_residual, dev / std::max(std::abs(line), 1e-300));
        r.envelope_constant = std::max(r.envelope_constant, dev / std::pow(r.grid[i], 0.8));
    }
    return r;
}

}  // namespace

RankinSelbergResult rankin_selberg_average(const GL2Form& f, i64 X) {
    require(X >= 16, "rankin_selberg_average: X < 16 makes the fit meaningless");
    require(X <= f.limit, "rankin_selberg_average: X exceeds table limit " + std::to_string(f.limit));
    std::vector<double> prefix(static_cast<std::size_t>(X + 1), 0.0);
    Accumulator<double> acc;
    for (i64 n = 1; n <= X; ++n) {
        double l = f.lambda(n);
        acc.add(l * l);
        prefix[static_cast<std::size_t>(n)] = acc.value();
    }
    return fit_partial_sums(prefix, X);
}

RankinSelbergResult rankin_selberg_average(const GL3Form& pi, i64 X) {
    require(X >= 16, "rankin_selberg_average: X < 16 makes the fit meaningless");
    require(X <= pi.limit, "rankin_selberg_average: X exceeds table limit " + std::to_string(pi.limit));
    std::vector<double> bins(static_cast<std::size_t>(X + 1), 0.0);
    for (i64 n1 = 1; n1 * n1 <= X; ++n1)
        for (i64 n2 = 1; n1 * n1 * n2 <= X; ++n2) {
            double a = pi.A(n1, n2);
            bins[static_cast<std::size_t>(n1 * n1 * n2)] += a * a;
        }
    std::vector<double> prefix(bins.size(), 0.0);
    Accumulator<double> acc;
    for (std::size_t k = 1; k < bins.size(); ++k) {
        acc.add(bins[k]);
        prefix[k] = acc.value();
    }
    return fit_partial_sums(prefix, X);
}

// ---------------------------------------------------------------------------

std::vector<HeckeViolation> hecke_report(const GL2Form& f) {
    std::vector<HeckeViolation> out;
    for (i64 m = 2; m * m <= f.limit; ++m)
        for (i64 n = m; m * n <= f.limit; ++n) {
            i64 g = gcd(m, n);
            double rhs = 0;
            for (i64 d : divisors(g)) rhs += f.lambda(m * n / (d * d));
            double lhs = f.lambda(m) * f.lambda(n);
            double res = std::abs(lhs - rhs);
            double tol = 1e-10 * static_cast<double>(divisor_count(g)) * std::max(1.0, std::abs(lhs));
            if (res > tol) out.push_back({m, n, res});
        }
    return out;
}

std::vector<HeckeViolation> hecke_report_exact(const GL2Form& f, i64 bound) {
    require(!f.raw.empty(), "hecke_report_exact: table has no exact coefficients");
    require(bound <= f.limit, "hecke_report_exact: bound exceeds table limit");
    const int k1 = f.weight - 1;
    std::vector<HeckeViolation> out;
    for (i64 m = 2; m * m <= bound; ++m)
        for (i64 n = m; m * n <= bound; ++n) {
            i64 g = gcd(m, n);
            i128 rhs = 0;
            for (i64 d : divisors(g)) {
                i128 dk = 1;
                for (int j = 0; j < k1; ++j) dk *= d;
                rhs += dk * f.raw[static_cast<std::size_t>(m * n / (d * d))];
            }
            i128 lhs = f.raw[static_cast<std::size_t>(m)] * f.raw[static_cast<std::size_t>(n)];
            if (lhs != rhs) out.push_back({m, n, static_cast<double>(lhs - rhs)});
        }
    return out;
}

std::vector<HeckeViolation> hecke_report(const GL3Form& pi) {
    std::vector<HeckeViolation> out;
    for (i64 p = 2; p <= pi.limit && p <= 97; ++p) {
        if (!pi.sieve->is_prime(p)) continue;
        for (int a = 0; a <= 3; ++a)
            for (int b = 0; b <= 3; ++b) {
                double u = pi.local(p, a, b), w = pi.local_schur(p, a, b);
                if (std::abs(u - w) > 1e-10 * std::max(1.0, std::abs(w))) out.push_back({p, a * 10 + b, u - w});
            }
    }
    for (i64 n1 = 1; n1 * n1 <= pi.limit; ++n1)
        for (i64 n2 = 1; n1 * n1 * n2 <= pi.limit; ++n2) {
            if (n2 * n2 * n1 > pi.limit) continue;
            double d = pi.A(n1, n2) - pi.A(n2, n1);
            if (std::abs(d) > 1e-10 * std::max(1.0, std::abs(pi.A(n1, n2)))) out.push_back({n1, n2, d});
        }
    return out;
}

// ---------------------------------------------------------------------------
// cache files

namespace {

struct Header {
    std::string form;
    int weight = 0;
    i64 limit = 0;
};

std::string header_line(const std::string& form, int weight, i64 limit) {
    return "#oscsum-coeffs v1 form=" + form + " weight=" + std::to_string(weight) + " limit=" + std::to_string(limit);
}

Header parse_header(const std::string& line) {
    Header h;
    std::istringstream is(line);
    std::string tag, ver, a, b, c;
    is >> tag >> ver >> a >> b >> c;
    auto val = [&](const std::string& kv, const std::string& key) {
        if (kv.rfind(key + "=", 0) != 0) throw ValidationError("cache line 1: malformed header '" + line + "'");
        return kv.substr(key.size() + 1);
    };
    if (tag != "#oscsum-coeffs" || ver != "v1") throw ValidationError("cache line 1: malformed header '" + line + "'");
    h.form = val(a, "form");
    try {
        h.weight = std::stoi(val(b, "weight"));
        h.limit = std::stoll(val(c, "limit"));
    } catch (const std::logic_error&) {
        throw ValidationError("cache line 1: malformed header '" + line + "'");
    }
    return h;
}

std::string gl3_row(i64 n1, i64 n2, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g", static_cast<long long>(n1), static_cast<long long>(n2), a);
    return buf;
}

// GL3 rows ordered by n1^2 n2, then n1: smaller limits give a prefix.
template <class Fn>
void for_each_gl3_index(i64 limit, Fn fn) {
    std::vector<std::pair<i64, i64>> idx;
    for (i64 n1 = 1; n1 * n1 <= limit; ++n1)
        for (i64 n2 = 1; n1 * n1 * n2 <= limit; ++n2) idx.emplace_back(n1, n2);
    std::sort(idx.begin(), idx.end(), [](auto& x, auto& y) {
        i64 kx = x.first * x.first * x.second, ky = y.first * y.first * y.second;
        return kx != ky ? kx < ky : x.first < y.first;
    });
    for (auto [a, b] : idx) fn(a, b);
}

std::vector<std::size_t> pick_rows(std::size_t total, std::size_t sample, u64 seed) {
    std::vector<std::size_t> rows;
    if (sample == 0 || sample >= total) {
        for (std::size_t i = 0; i < total; ++i) rows.push_back(i);
        return rows;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, total - 1);
    for (std::size_t i = 0; i < sample; ++i) rows.push_back(pick(rng));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open cache file '" + path + "'");
    std::vector<std::string> lines;
    std::string s;
    while (std::getline(in, s)) lines.push_back(s);
    if (lines.empty()) throw ValidationError("cache file '" + path + "' is empty");
    return lines;
}

}  // namespace

void write_gl2_cache(const GL2Form& f, const std::string& path) {
    require(!f.raw.empty(), "write_gl2_cache: table has no exact coefficients");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write cache file '" + path + "'");
    out << header_line(f.id, f.weight, f.limit) << '\n';
    for (i64 n = 1; n <= f.limit; ++n) out << n << ',' << to_string(f.raw[static_cast<std::size_t>(n)]) << '\n';
    if (!out) throw ValidationError("write failed for cache file '" + path + "'");
}

GL2Form read_gl2_cache(const std::string& path) {
    auto lines = read_lines(path);
    Header h = parse_header(lines[0]);
    require(static_cast<i64>(lines.size()) - 1 == h.limit,
            "cache '" + path + "': expected " + std::to_string(h.limit) + " rows, found " +
                std::to_string(lines.size() - 1));
    std::vector<i128> raw(static_cast<std::size_t>(h.limit + 1), 0);
    for (i64 n = 1; n <= h.limit; ++n) {
        const std::string& s = lines[static_cast<std::size_t>(n)];
        auto comma = s.find(',');
        if (comma == std::string::npos || s.substr(0, comma) != std::to_string(n))
            throw ValidationError("cache '" + path + "' line " + std::to_string(n + 1) + ": malformed row");
        try {
            raw[static_cast<std::size_t>(n)] = parse_i128(s.substr(comma + 1));
        } catch (const ValidationError&) {
            throw ValidationError("cache '" + path + "' line " + std::to_string(n + 1) + ": malformed value");
        }
    }
    return gl2_from_raw(h.form, h.weight, std::move(raw));
}

void write_gl3_cache(const GL3Form& pi, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write cache file '" + path + "'");
    out << header_line("sym2-" + pi.base->id, pi.base_weight, pi.limit) << '\n';
    for_each_gl3_index(pi.limit, [&](i64 n1, i64 n2) { out << gl3_row(n1, n2, pi.A(n1, n2)) << '\n'; });
    if (!out) throw ValidationError("write failed for cache file '" + path + "'");
}

CacheVerifyResult verify_gl2_cache(const std::string& path, std::size_t sample, u64 seed) {
    CacheVerifyResult r;
    auto lines = read_lines(path);
    Header h;
    try {
        h = parse_header(lines[0]);
    } catch (const ValidationError& e) {
        return {false, 0, 1, e.what()};
    }
    if (h.form != "delta" || h.weight != 12) return {false, 0, 1, "unsupported form '" + h.form + "'"};
    if (static_cast<i64>(lines.size()) - 1 != h.limit)
        return {false, 0, static_cast<i64>(std::min<std::size_t>(lines.size(), h.limit + 1)) + 1,
                "row count does not match header limit"};
    GL2Form ref = build_gl2_delta(h.limit);
    for (std::size_t i : pick_rows(static_cast<std::size_t>(h.limit), sample, seed)) {
        i64 n = static_cast<i64>(i) + 1;
        std::string expect = std::to_string(n) + "," + to_string(ref.raw[static_cast<std::size_t>(n)]);
        ++r.rows_checked;
        if (lines[static_cast<std::size_t>(n)] != expect) {
            r.ok = false;
            r.bad_line = n + 1;
            r.message = "line " + std::to_string(n + 1) + " (n=" + std::to_string(n) + "): expected '" + expect +
                        "', found '" + lines[static_cast<std::size_t>(n)] + "'";
            return r;
        }
    }
    return r;
}

CacheVerifyResult verify_gl3_cache(const std::string& path, std::size_t sample, u64 seed) {
    CacheVerifyResult r;
    auto lines = read_lines(path);
    Header h;
    try {
        h = parse_header(lines[0]);
    } catch (const ValidationError& e) {
        return {false, 0, 1, e.what()};
    }
    if (h.form != "sym2-delta" || h.weight != 12) return {false, 0, 1, "unsupported form '" + h.form + "'"};
    auto f = std::make_shared<const GL2Form>(build_gl2_delta(h.limit));
    GL3Form pi = build_gl3_sym_square(f, h.limit);
    std::vector<std::string> expect;
    for_each_gl3_index(h.limit, [&](i64 n1, i64 n2) { expect.push_back(gl3_row(n1, n2, pi.A(n1, n2))); });
    if (lines.size() - 1 != expect.size())
        return {false, 0, static_cast<i64>(std::min(lines.size(), expect.size() + 1)) + 1,
                "row count does not match header limit"};
    for (std::size_t i : pick_rows(expect.size(), sample, seed)) {
        ++r.rows_checked;
        if (lines[i + 1] != expect[i]) {
            r.ok = false;
            r.bad_line = static_cast<i64>(i) + 2;
            r.message = "line " + std::to_string(i + 2) + ": expected '" + expect[i] + "', found '" + lines[i + 1] + "'";
            return r;
        }
    }
    return r;
}

}  // namespace oscsum
