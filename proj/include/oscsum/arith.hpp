#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oscsum {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

i64 gcd(i64 a, i64 b);
i64 mod(i64 a, i64 m);                 // representative in [0, m)
i64 modinv(i64 a, i64 m);              // requires gcd(a, m) == 1; modinv(x, 1) == 0
int mobius(i64 n);
i64 euler_phi(i64 n);
i64 divisor_count(i64 n);
std::vector<i64> divisors(i64 n);      // ascending
std::vector<std::pair<i64, int>> factorize(i64 n);

// Smallest-prime-factor table, index 0 and 1 hold 0 and 1.
class Sieve {
public:
    explicit Sieve(i64 limit);
    i64 limit() const { return static_cast<i64>(spf_.size()) - 1; }
    i64 spf(i64 n) const { return spf_[static_cast<std::size_t>(n)]; }
    bool is_prime(i64 n) const { return n >= 2 && spf(n) == n; }
    std::vector<std::pair<i64, int>> factorize(i64 n) const;
    std::vector<i64> primes() const;

private:
    std::vector<std::uint32_t> spf_;
};

std::string to_string(i128 v);
i128 parse_i128(const std::string& s);  // throws ValidationError

}  // namespace oscsum
