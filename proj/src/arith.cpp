#include "oscsum/arith.hpp"

#include <algorithm>
#include <string>

#include "oscsum/errors.hpp"

namespace oscsum {

i64 gcd(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
        i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

i64 mod(i64 a, i64 m) {
    i64 r = a % m;
    return r < 0 ? r + m : r;
}

i64 modinv(i64 a, i64 m) {
    if (m == 1) return 0;
    i64 old_r = mod(a, m), r = m, old_s = 1, s = 0;
    while (r) {
        i64 q = old_r / r;
        i64 t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1) throw ValidationError("modinv: " + std::to_string(a) + " not invertible mod " + std::to_string(m));
    return mod(old_s, m);
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
    std::vector<std::pair<i64, int>> out;
    if (n < 0) n = -n;
    for (i64 p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

int mobius(i64 n) {
    int s = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        s = -s;
    }
    return s;
}

i64 euler_phi(i64 n) {
    i64 r = n;
    for (auto [p, e] : factorize(n)) r = r / p * (p - 1);
    return r;
}

i64 divisor_count(i64 n) {
    i64 d = 1;
    for (auto [p, e] : factorize(n)) d *= e + 1;
    return d;
}

std::vector<i64> divisors(i64 n) {
    std::vector<i64> ds{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t base = ds.size();
        i64 pk = 1;
        for (int k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) ds.push_back(ds[i] * pk);
        }
    }
    std::sort(ds.begin(), ds.end());
    return ds;
}

Sieve::Sieve(i64 limit) : spf_(static_cast<std::size_t>(std::max<i64>(limit, 1) + 1), 0) {
    spf_[1] = 1;
    const i64 n = static_cast<i64>(spf_.size()) - 1;
    for (i64 i = 2; i <= n; ++i) {
        if (spf_[i]) continue;
        for (i64 j = i; j <= n; j += i)
            if (!spf_[j]) spf_[j] = static_cast<std::uint32_t>(i);
    }
}

std::vector<std::pair<i64, int>> Sieve::factorize(i64 n) const {
    std::vector<std::pair<i64, int>> out;
    while (n > 1) {
        i64 p = spf(n);
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    return out;
}

std::vector<i64> Sieve::primes() const {
    std::vector<i64> ps;
    for (i64 i = 2; i <= limit(); ++i)
        if (is_prime(i)) ps.push_back(i);
    return ps;
}

std::string to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    // work with negative values so that the minimum is representable
    std::string s;
    if (!neg) v = -v;
    while (v != 0) {
        int d = static_cast<int>(-(v % 10));
        s.push_back(static_cast<char>('0' + d));
        v /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

i128 parse_i128(const std::string& s) {
    if (s.empty()) throw ValidationError("empty integer");
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw ValidationError("malformed integer '" + s + "'");
    i128 v = 0;
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw ValidationError("malformed integer '" + s + "'");
        if (s.size() > 40) throw ValidationError("integer too wide '" + s + "'");
        v = v * 10 - (s[i] - '0');
    }
    return neg ? v : -v;
}

}  // namespace oscsum
