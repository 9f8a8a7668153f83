#pragma once
// Number-theoretic transforms over a few NTT-friendly primes, enough to
// reconstruct signed integers of magnitude < 2^140 through Garner's algorithm.

#include <array>
#include <cstdint>
#include <vector>

namespace oscsum::detail {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

template <u32 P>
constexpr u32 pow_mod(u32 b, u64 e) {
    u64 r = 1, x = b;
    while (e) {
        if (e & 1) r = r * x % P;
        x = x * x % P;
        e >>= 1;
    }
    return static_cast<u32>(r);
}

template <u32 P, u32 G>
struct Ntt {
    static void transform(std::vector<u32>& a, bool inverse) {
        const std::size_t n = a.size();
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        std::vector<u32> w(n / 2 + 1);
        for (std::size_t len = 2; len <= n; len <<= 1) {
            u32 root = pow_mod<P>(G, (P - 1) / len);
            if (inverse) root = pow_mod<P>(root, P - 2);
            const std::size_t half = len / 2;
            w[0] = 1;
            for (std::size_t k = 1; k < half; ++k) w[k] = static_cast<u32>(static_cast<u64>(w[k - 1]) * root % P);
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    u32 u = a[i + k];
                    u32 v = static_cast<u32>(static_cast<u64>(a[i + k + half]) * w[k] % P);
                    u32 s = u + v;
                    a[i + k] = s >= P ? s - P : s;
                    a[i + k + half] = u >= v ? u - v : u + P - v;
                }
            }
        }
        if (inverse) {
            u32 inv_n = pow_mod<P>(static_cast<u32>(n % P), P - 2);
            for (auto& x : a) x = static_cast<u32>(static_cast<u64>(x) * inv_n % P);
        }
    }

    // a <- a^2 truncated to `keep` coefficients.
    static void square_truncated(std::vector<u32>& a, std::size_t keep) {
        std::size_t n = 1;
        while (n < 2 * a.size()) n <<= 1;
        a.resize(n, 0);
        transform(a, false);
        for (auto& x : a) x = static_cast<u32>(static_cast<u64>(x) * x % P);
        transform(a, true);
        a.resize(keep);
    }
};

}  // namespace oscsum::detail
