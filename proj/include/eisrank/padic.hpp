#pragma once

// Exact arithmetic in Z/p^K and in Z[zeta_{p^t}]/p^K, with the pi-adic
// valuation normalized so that v(zeta_{p^t} - 1) = 1 and hence
// v(p) = e = (p-1)p^{t-1}, the ramification index of the p^t-th cyclotomic
// ring (totally ramified above p).
//
// Everything is a machine residue: p^K must fit below 2^63. That covers all
// desk-scale work (p <= 10^4, K <= 16); consumers that need more precision
// retry with doubled K and give up with an explicit "precision exhausted"
// error instead of silently degrading.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eisrank/nt.hpp"

namespace eisrank {

/**
 * Thrown when a computation needs more p-adic precision than the machine-word
 * residue representation can supply (p^K would reach 2^63): the caller's
 * retry-with-doubled-K ladder has nowhere left to go.
 */
struct precision_exhausted_error : std::runtime_error {
    explicit precision_exhausted_error(const std::string& what) : std::runtime_error(what) {}
};

/**
 * A valuation statement: either exactly `amount`, or only the lower bound
 * "at least `amount`" (which happens precisely when the element vanished
 * modulo the working precision, so the true valuation is out of reach).
 * Units are v(pi) = 1 for the cyclotomic valuation and v(p) = 1 for the
 * plain p-adic one.
 */
struct PiValuation {
    enum class Kind { exact, at_least };
    Kind kind = Kind::exact;
    u64 amount = 0;

    bool operator==(const PiValuation&) const = default;
};

/** Residue in Z/p^K with its modulus carried along. */
struct TruncatedPadic {
    u64 p = 0;
    unsigned K = 0;
    u64 pK = 0;     // cached p^K
    u64 value = 0;  // always reduced into [0, p^K)

    TruncatedPadic() = default;
    TruncatedPadic(u64 p_, unsigned K_, u64 value_) : p(p_), K(K_), pK(ipow_checked(p_, K_)) {
        value = value_ % pK;
    }

    /** Build from a possibly negative integer. */
    static TruncatedPadic from_integer(u64 p, unsigned K, i64 n) {
        TruncatedPadic x(p, K, 0);
        i64 r = n % i64(x.pK);
        if (r < 0) r += i64(x.pK);
        x.value = u64(r);
        return x;
    }

    TruncatedPadic with(u64 v) const {
        TruncatedPadic x = *this;
        x.value = v % pK;
        return x;
    }

    TruncatedPadic add(const TruncatedPadic& o) const { return with(addmod(value, o.check(*this), pK)); }
    TruncatedPadic sub(const TruncatedPadic& o) const { return with(submod(value, o.check(*this), pK)); }
    TruncatedPadic mul(const TruncatedPadic& o) const { return with(mulmod(value, o.check(*this), pK)); }

    /** Multiplicative inverse; defined iff the residue is a unit (p does not divide it). */
    TruncatedPadic inv() const {
        if (value % p == 0) throw std::domain_error("TruncatedPadic::inv: residue divisible by p");
        return with(invmod(value, pK));
    }

    bool operator==(const TruncatedPadic&) const = default;

   private:
    u64 check(const TruncatedPadic& other) const {
        if (p != other.p || K != other.K)
            throw std::invalid_argument("TruncatedPadic: mismatched ring parameters");
        return value;
    }
};

/** v_p of a truncated residue: exact unless the residue is 0, where only "at least K" is known. */
inline PiValuation padic_valuation(const TruncatedPadic& x) {
    if (x.value == 0) return {PiValuation::Kind::at_least, x.K};
    return {PiValuation::Kind::exact, vp(x.value, x.p)};
}

/**
 * Element of Z[zeta_{p^t}]/p^K in the power basis 1, zeta, ..., zeta^{e-1}
 * of the p^t-th cyclotomic polynomial, e = (p-1)p^{t-1}. t = 0 is allowed
 * and degenerates to Z/p^K itself (e = 1, zeta = 1), which is occasionally
 * convenient for treating the trivial character uniformly.
 */
struct CyclotomicInt {
    u64 p = 0;
    unsigned t = 0;
    unsigned K = 0;
    u64 pK = 0;
    std::vector<u64> coeffs;  // size e, entries in [0, p^K)

    CyclotomicInt() = default;
    CyclotomicInt(u64 p_, unsigned t_, unsigned K_) : p(p_), t(t_), K(K_), pK(ipow_checked(p_, K_)) {
        coeffs.assign(e(), 0);
    }

    /** Ramification index (p-1)p^{t-1}; the degree of the ring over Z_p. */
    u64 e() const {
        if (t == 0) return 1;
        u64 r = p - 1;
        for (unsigned i = 1; i < t; ++i) r *= p;
        return r;
    }

    /** p^{t-1}, the stride of the cyclotomic relation (1 when t = 0). */
    u64 stride() const {
        u64 r = 1;
        for (unsigned i = 1; i < t; ++i) r *= p;
        return r;
    }

    static CyclotomicInt zero(u64 p, unsigned t, unsigned K) { return CyclotomicInt(p, t, K); }

    static CyclotomicInt one(u64 p, unsigned t, unsigned K) {
        CyclotomicInt x(p, t, K);
        x.coeffs[0] = 1;
        return x;
    }

    /** The canonical primitive p^t-th root of unity (the power-basis generator). */
    static CyclotomicInt zeta(u64 p, unsigned t, unsigned K) {
        CyclotomicInt x(p, t, K);
        if (t == 0)
            x.coeffs[0] = 1;  // zeta_1 = 1
        else
            x.coeffs[1] = 1;
        return x;
    }

    static CyclotomicInt from_integer(u64 p, unsigned t, unsigned K, i64 n) {
        CyclotomicInt x(p, t, K);
        i64 r = n % i64(x.pK);
        if (r < 0) r += i64(x.pK);
        x.coeffs[0] = u64(r);
        return x;
    }

    bool is_zero() const {
        return std::all_of(coeffs.begin(), coeffs.end(), [](u64 c) { return c == 0; });
    }

    bool operator==(const CyclotomicInt&) const = default;
};

inline void require_same_ring(const CyclotomicInt& a, const CyclotomicInt& b) {
    if (a.p != b.p || a.t != b.t || a.K != b.K)
        throw std::invalid_argument("CyclotomicInt: mismatched ring parameters");
}

inline CyclotomicInt cyclo_add(const CyclotomicInt& a, const CyclotomicInt& b) {
    require_same_ring(a, b);
    CyclotomicInt r = a;
    for (size_t j = 0; j < r.coeffs.size(); ++j) r.coeffs[j] = addmod(r.coeffs[j], b.coeffs[j], r.pK);
    return r;
}

inline CyclotomicInt cyclo_sub(const CyclotomicInt& a, const CyclotomicInt& b) {
    require_same_ring(a, b);
    CyclotomicInt r = a;
    for (size_t j = 0; j < r.coeffs.size(); ++j) r.coeffs[j] = submod(r.coeffs[j], b.coeffs[j], r.pK);
    return r;
}

inline CyclotomicInt cyclo_scale(const CyclotomicInt& a, u64 c) {
    CyclotomicInt r = a;
    c %= r.pK;
    for (auto& x : r.coeffs) x = mulmod(x, c, r.pK);
    return r;
}

/**
 * Product reduced modulo the p^t-th cyclotomic polynomial and p^K.
 * Schoolbook convolution, then the relation
 *   zeta^e = -(1 + zeta^m + zeta^{2m} + ... + zeta^{(p-2)m}),  m = p^{t-1},
 * applied from the top degree down (each application strictly lowers the
 * degree, since d - e + (p-2)m = d - m < d).
 */
inline CyclotomicInt cyclo_mul(const CyclotomicInt& a, const CyclotomicInt& b) {
    require_same_ring(a, b);
    const u64 e = a.e();
    const u64 m = a.stride();
    const u64 pK = a.pK;
    std::vector<u64> buf(2 * e - 1, 0);
    for (u64 i = 0; i < e; ++i) {
        if (a.coeffs[i] == 0) continue;
        for (u64 j = 0; j < e; ++j) {
            if (b.coeffs[j] == 0) continue;
            buf[i + j] = addmod(buf[i + j], mulmod(a.coeffs[i], b.coeffs[j], pK), pK);
        }
    }
    for (u64 d = 2 * e - 2; d + 1 > e; --d) {
        u64 c = buf[d];
        if (c == 0) continue;
        buf[d] = 0;
        for (u64 k = 0; k + 1 < a.p; ++k) buf[d - e + k * m] = submod(buf[d - e + k * m], c, pK);
    }
    CyclotomicInt r(a.p, a.t, a.K);
    std::copy(buf.begin(), buf.begin() + e, r.coeffs.begin());
    return r;
}

inline CyclotomicInt cyclo_pow(const CyclotomicInt& a, u64 n) {
    CyclotomicInt r = CyclotomicInt::one(a.p, a.t, a.K);
    CyclotomicInt base = a;
    while (n) {
        if (n & 1) r = cyclo_mul(r, base);
        base = cyclo_mul(base, base);
        n >>= 1;
    }
    return r;
}

/**
 * Coefficients (a_0, ..., a_{e-1}) with a = sum a_j (zeta-1)^j. The change of
 * basis is the integral binomial transform (a Taylor shift by +1) —
 * unimodular and triangular — so it is exact and precision-preserving in both
 * directions. In-place triangular partial sums, O(e^2).
 */
inline std::vector<TruncatedPadic> power_to_pi_basis(const CyclotomicInt& a) {
    const u64 e = a.e();
    const u64 pK = a.pK;
    std::vector<u64> work = a.coeffs;
    for (u64 i = 0; i + 1 < e; ++i)
        for (u64 j = e - 2; j + 1 > i; --j) work[j] = addmod(work[j], work[j + 1], pK);
    std::vector<TruncatedPadic> out;
    out.reserve(e);
    TruncatedPadic proto(a.p, a.K, 0);
    for (u64 j = 0; j < e; ++j) out.push_back(proto.with(work[j]));
    return out;
}

/** Inverse of power_to_pi_basis: the Taylor shift by -1. */
inline CyclotomicInt pi_basis_to_power(u64 p, unsigned t, unsigned K,
                                       const std::vector<TruncatedPadic>& b) {
    CyclotomicInt acc(p, t, K);
    const u64 e = acc.e();
    if (b.size() != e) throw std::invalid_argument("pi_basis_to_power: wrong coefficient count");
    const u64 pK = acc.pK;
    for (u64 j = 0; j < e; ++j) acc.coeffs[j] = b[j].value % pK;
    for (u64 i = 0; i + 1 < e; ++i)
        for (u64 j = e - 2; j + 1 > i; --j) acc.coeffs[j] = submod(acc.coeffs[j], acc.coeffs[j + 1], pK);
    return acc;
}

/**
 * Valuation of a, normalized to v(zeta-1) = 1, v(p) = e. Writing
 * a = sum a_j pi^j over the pi-basis, each nonzero a_j contributes the
 * candidate j + e*v_p(a_j); the candidates are pairwise distinct mod e, so
 * the minimum is attained by a single term and the ultrametric inequality is
 * an equality. Any nonzero candidate is < e*K, which beats every vanished
 * coefficient's lower bound of >= e*K — hence the result is exact whenever a
 * is nonzero at this precision, and "at least e*K" otherwise.
 */
inline PiValuation pi_valuation(const CyclotomicInt& a) {
    const u64 e = a.e();
    auto basis = power_to_pi_basis(a);
    u64 best = ~u64(0);
    for (u64 j = 0; j < e; ++j) {
        if (basis[j].value == 0) continue;
        best = std::min(best, j + e * vp(basis[j].value, a.p));
    }
    if (best == ~u64(0)) return {PiValuation::Kind::at_least, e * a.K};
    return {PiValuation::Kind::exact, best};
}

}  // namespace eisrank
