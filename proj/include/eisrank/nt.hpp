#pragma once

// Small-integer number theory helpers shared by every module: modular
// arithmetic on 64-bit words, deterministic primality, factorization by
// trial division. Scale is "desk": moduli below 2^63, factored numbers
// below ~10^12, so nothing here needs arbitrary precision.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace eisrank {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

inline u64 addmod(u64 a, u64 b, u64 m) {
    u64 s = a + b;  // a,b < m < 2^63, no wrap
    return s >= m ? s - m : s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + m - b; }

inline u64 powmod(u64 base, u64 exp, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

/** Extended gcd: returns g = gcd(a,b) and x,y with a*x + b*y = g. */
inline i64 egcd(i64 a, i64 b, i64& x, i64& y) {
    if (b == 0) {
        x = a >= 0 ? 1 : -1;
        y = 0;
        return a >= 0 ? a : -a;
    }
    i64 x1 = 0, y1 = 0;
    i64 g = egcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline u64 gcd_u64(u64 a, u64 b) {
    while (b) {
        u64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/** Inverse of a modulo m; throws std::domain_error when gcd(a,m) != 1. */
inline u64 invmod(u64 a, u64 m) {
    i64 x, y;
    i64 g = egcd(i64(a % m), i64(m), x, y);
    if (g != 1) throw std::domain_error("invmod: argument not invertible modulo " + std::to_string(m));
    i64 r = x % i64(m);
    if (r < 0) r += i64(m);
    return u64(r);
}

/** Deterministic Miller-Rabin, valid for all 64-bit inputs. */
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) { d >>= 1; ++s; }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

/** Trial-division factorization, ascending primes; fine for n up to ~10^12. */
inline std::vector<std::pair<u64, int>> factorize(u64 n) {
    std::vector<std::pair<u64, int>> out;
    for (u64 q = 2; q * q <= n; q += (q == 2 ? 1 : 2)) {
        if (n % q) continue;
        int e = 0;
        while (n % q == 0) { n /= q; ++e; }
        out.emplace_back(q, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

/** All positive divisors of n, sorted ascending. */
inline std::vector<u64> divisors(u64 n) {
    std::vector<u64> out{1};
    for (const auto& [q, e] : factorize(n)) {
        const size_t base = out.size();
        u64 qe = 1;
        for (int i = 0; i < e; ++i) {
            qe *= q;
            for (size_t j = 0; j < base; ++j) out.push_back(out[j] * qe);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/** Exponent of the prime p in n (n > 0). */
inline unsigned vp(u64 n, u64 p) {
    unsigned v = 0;
    while (n % p == 0) { n /= p; ++v; }
    return v;
}

/** p^K as a u64, rejecting anything that would not fit below 2^63. */
inline u64 ipow_checked(u64 p, unsigned K) {
    u64 r = 1;
    for (unsigned i = 0; i < K; ++i) {
        if (r > ((u64(1) << 62) / p) * 2) throw std::overflow_error("p^K does not fit in a 63-bit word");
        r *= p;
        if (r >= (u64(1) << 63)) throw std::overflow_error("p^K does not fit in a 63-bit word");
    }
    return r;
}

}  // namespace eisrank
