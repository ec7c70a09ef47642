#pragma once

// Group rings of the two cyclic groups the analysis needs: (Z/N)^x of order
// N-1 with a fixed primitive root g, and its maximal p-power quotient of
// order p^s (written with the image of g as generator). Elements are dense
// exponent-indexed coefficient vectors over Z/p^K; the augmentation
// filtration is handled through the integral (g-1)-power basis, which is a
// Taylor shift in exponent space.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "eisrank/nt.hpp"
#include "eisrank/padic.hpp"

namespace eisrank {

/** Discrete-log tables for (Z/N)^x with the smallest primitive root. */
struct UnitGroupStructure {
    u64 N = 0;
    u64 g = 0;
    std::vector<u32> ind;  // ind[i] = log_g(i) for 1 <= i <= N-1; ind[0] unused
    std::vector<u32> pow;  // pow[m] = g^m mod N for 0 <= m <= N-2
};

/** Whether cand generates (Z/N)^x, by order checks against the factors of N-1. */
inline bool is_primitive_root(u64 cand, u64 N, const std::vector<std::pair<u64, int>>& fac) {
    for (auto [q, e] : fac) {
        (void)e;
        if (powmod(cand, (N - 1) / q, N) == 1) return false;
    }
    return true;
}

/**
 * Build the unit-group tables for a prime N >= 7 on the given primitive
 * root (validated; a non-generator throws).
 */
inline UnitGroupStructure build_unit_group(u64 N, u64 root) {
    if (!is_prime(N)) throw std::invalid_argument("build_unit_group: N = " + std::to_string(N) + " is not prime");
    if (N < 7) throw std::invalid_argument("build_unit_group: N must be at least 7");
    auto fac = factorize(N - 1);
    if (root % N == 0 || !is_primitive_root(root % N, N, fac))
        throw std::invalid_argument("build_unit_group: " + std::to_string(root) +
                                    " does not generate the units modulo " + std::to_string(N));
    UnitGroupStructure u;
    u.N = N;
    u.g = root % N;
    u.ind.assign(N, 0);
    u.pow.assign(N - 1, 0);
    u64 x = 1;
    for (u64 m = 0; m < N - 1; ++m) {
        u.pow[m] = u32(x);
        u.ind[x] = u32(m);
        x = mulmod(x, u.g, N);
    }
    return u;
}

/**
 * Same, choosing the smallest primitive root (deterministic and
 * reproducible).
 */
inline UnitGroupStructure build_unit_group(u64 N) {
    if (!is_prime(N)) throw std::invalid_argument("build_unit_group: N = " + std::to_string(N) + " is not prime");
    if (N < 7) throw std::invalid_argument("build_unit_group: N must be at least 7");
    auto fac = factorize(N - 1);
    for (u64 cand = 2; cand < N; ++cand)
        if (is_primitive_root(cand, N, fac)) return build_unit_group(N, cand);
    throw std::logic_error("build_unit_group: no primitive root found for prime N");
}

/**
 * Element of the group ring Z/p^K[C_n] for a cyclic group C_n with a fixed
 * generator; coeffs[m] is the coefficient of the m-th generator power. The
 * two groups in play are (Z/N)^x (n = N-1, generator the primitive root) and
 * its p-power quotient (n = p^s, generator the image). K = 1 gives F_p.
 */
struct GroupRingElem {
    u64 p = 0;
    unsigned K = 0;
    u64 pK = 0;
    std::vector<u64> coeffs;

    GroupRingElem() = default;
    GroupRingElem(u64 n, u64 p_, unsigned K_) : p(p_), K(K_), pK(ipow_checked(p_, K_)) {
        coeffs.assign(n, 0);
    }

    u64 order() const { return coeffs.size(); }

    static GroupRingElem one(u64 n, u64 p, unsigned K) { return monomial(n, p, K, 0); }

    static GroupRingElem monomial(u64 n, u64 p, unsigned K, u64 m) {
        GroupRingElem x(n, p, K);
        x.coeffs[m % n] = 1;
        return x;
    }

    bool operator==(const GroupRingElem&) const = default;
};

inline void require_same_group_ring(const GroupRingElem& a, const GroupRingElem& b) {
    if (a.p != b.p || a.K != b.K || a.coeffs.size() != b.coeffs.size())
        throw std::invalid_argument("GroupRingElem: mismatched group or coefficient ring");
}

inline GroupRingElem group_add(const GroupRingElem& a, const GroupRingElem& b) {
    require_same_group_ring(a, b);
    GroupRingElem r = a;
    for (size_t m = 0; m < r.coeffs.size(); ++m) r.coeffs[m] = addmod(r.coeffs[m], b.coeffs[m], r.pK);
    return r;
}

inline GroupRingElem group_sub(const GroupRingElem& a, const GroupRingElem& b) {
    require_same_group_ring(a, b);
    GroupRingElem r = a;
    for (size_t m = 0; m < r.coeffs.size(); ++m) r.coeffs[m] = submod(r.coeffs[m], b.coeffs[m], r.pK);
    return r;
}

inline GroupRingElem group_scale(const GroupRingElem& a, u64 c) {
    GroupRingElem r = a;
    c %= r.pK;
    for (auto& x : r.coeffs) x = mulmod(x, c, r.pK);
    return r;
}

/** Cyclic convolution in exponent space. */
inline GroupRingElem group_mul(const GroupRingElem& a, const GroupRingElem& b) {
    require_same_group_ring(a, b);
    const u64 n = a.order();
    GroupRingElem r(n, a.p, a.K);
    for (u64 i = 0; i < n; ++i) {
        if (a.coeffs[i] == 0) continue;
        for (u64 j = 0; j < n; ++j) {
            if (b.coeffs[j] == 0) continue;
            u64 k = i + j;
            if (k >= n) k -= n;
            r.coeffs[k] = addmod(r.coeffs[k], mulmod(a.coeffs[i], b.coeffs[j], r.pK), r.pK);
        }
    }
    return r;
}

/** Sum of coefficients, as a residue mod p^K. */
inline u64 augmentation(const GroupRingElem& x) {
    u64 s = 0;
    for (u64 c : x.coeffs) s = addmod(s, c, x.pK);
    return s;
}

/** [g^k] -> [g^{-k}]: reverses the exponent index. */
inline GroupRingElem inversion_involution(const GroupRingElem& x) {
    GroupRingElem r = x;
    const u64 n = x.order();
    for (u64 m = 1; m < n; ++m) r.coeffs[m] = x.coeffs[n - m];
    return r;
}

/**
 * Coefficients of x in the integral basis {(g-1)^i : 0 <= i <= n-1} of the
 * cyclic group ring. Writing x as a polynomial of degree < n in T = [g], the
 * coefficients in powers of (T-1) are its Taylor shift by +1 — an exact,
 * unimodular, triangular change of basis.
 */
struct AugExpansion {
    std::vector<u64> b;  // size n; x = sum b[i] (g-1)^i
};

inline AugExpansion aug_power_expansion(const GroupRingElem& x) {
    AugExpansion out;
    out.b = x.coeffs;
    const size_t n = out.b.size();
    const u64 pK = x.pK;
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = n - 2; j + 1 > i; --j) out.b[j] = addmod(out.b[j], out.b[j + 1], pK);
    return out;
}

/**
 * First index i >= 1 whose (g-1)-expansion coefficient is a unit mod p;
 * "at least n-1" when every such coefficient vanishes. Requires x to lie
 * in the augmentation ideal mod p.
 *
 * Rather than materializing the full expansion (O(n^2)), each b_i mod p is
 * the binomial-weighted sum  sum_m C(m,i) x_m  and C(m,i) mod p factors over
 * base-p digits, so candidates are tested one i at a time — O(n) per index,
 * and the answer is nearly always found at a tiny i.
 */
inline PiValuation order_of_vanishing(const GroupRingElem& x) {
    const u64 p = x.p;
    const u64 n = x.order();
    u64 aug = 0;
    for (u64 c : x.coeffs) aug = (aug + c) % p;
    if (aug != 0)
        throw std::invalid_argument("order_of_vanishing: element is not in the augmentation ideal mod p");

    std::vector<u64> fact(p), invfact(p);
    fact[0] = 1;
    for (u64 i = 1; i < p; ++i) fact[i] = mulmod(fact[i - 1], i, p);
    invfact[p - 1] = invmod(fact[p - 1], p);
    for (u64 i = p - 1; i > 0; --i) invfact[i - 1] = mulmod(invfact[i], i, p);
    auto binom_digit = [&](u64 a, u64 b) -> u64 {
        if (b > a) return 0;
        return mulmod(fact[a], mulmod(invfact[b], invfact[a - b], p), p);
    };
    auto binom_mod_p = [&](u64 m, u64 i) -> u64 {
        u64 r = 1;
        while (i > 0 || m > 0) {
            r = mulmod(r, binom_digit(m % p, i % p), p);
            if (r == 0) return 0;
            m /= p;
            i /= p;
        }
        return r;
    };

    for (u64 i = 1; i < n; ++i) {
        u64 b = 0;
        for (u64 m = i; m < n; ++m) {
            u64 c = x.coeffs[m] % p;
            if (c == 0) continue;
            b = (b + binom_mod_p(m, i) * c) % p;
        }
        if (b != 0) return {PiValuation::Kind::exact, i};
    }
    return {PiValuation::Kind::at_least, n - 1};
}

/**
 * Push an element of Z/p^K[(Z/N)^x] down to the maximal p-power quotient of
 * order p^s (s = v_p(N-1)): in exponent space the quotient map is reduction
 * mod p^s, so the coefficient of the k-th generator power downstairs is the
 * fiber sum over m = k mod p^s.
 */
inline GroupRingElem project_to_delta(const GroupRingElem& x) {
    const u64 n = x.order();
    const unsigned s = vp(n, x.p);
    u64 ps = 1;
    for (unsigned i = 0; i < s; ++i) ps *= x.p;
    GroupRingElem r(ps, x.p, x.K);
    for (u64 m = 0; m < n; ++m) r.coeffs[m % ps] = addmod(r.coeffs[m % ps], x.coeffs[m], r.pK);
    return r;
}

/**
 * Character of the p-power quotient sending the fixed generator to the
 * canonical primitive p^t-th root of unity; t = 0 is the trivial character.
 */
struct DeltaCharacter {
    u64 p = 0;
    unsigned t = 0;
};

/** Evaluate sum coeffs[k] * zeta_{p^t}^{k mod p^t} in Z[zeta_{p^t}]/p^K. */
inline CyclotomicInt apply_character(const GroupRingElem& x, const DeltaCharacter& chi) {
    if (chi.p != x.p) throw std::invalid_argument("apply_character: character and element prime differ");
    const u64 n = x.order();
    if (chi.t == 0) return CyclotomicInt::from_integer(x.p, 0, x.K, i64(augmentation(x)));
    u64 pt = 1;
    for (unsigned i = 0; i < chi.t; ++i) pt *= x.p;
    if (pt > n) throw std::invalid_argument("apply_character: character order exceeds the group order");
    CyclotomicInt zeta = CyclotomicInt::zeta(x.p, chi.t, x.K);
    std::vector<CyclotomicInt> zpow(pt, CyclotomicInt::one(x.p, chi.t, x.K));
    for (u64 j = 1; j < pt; ++j) zpow[j] = cyclo_mul(zpow[j - 1], zeta);
    CyclotomicInt acc = CyclotomicInt::zero(x.p, chi.t, x.K);
    for (u64 k = 0; k < n; ++k) {
        if (x.coeffs[k] == 0) continue;
        acc = cyclo_add(acc, cyclo_scale(zpow[k % pt], x.coeffs[k]));
    }
    return acc;
}

/**
 * Minimal polynomial of y = [d] + [d^{-1}] - 2 on the inversion-fixed
 * subring of Z/p^K[C_{p^s}]. The subring has the basis
 * u_0 = 1, u_k = [d^k] + [d^{-k}] (1 <= k <= (p^s-1)/2), and y^j = u_j +
 * (lower terms) for j < d = (p^s+1)/2, so 1, y, ..., y^{d-1} is triangular
 * with unit diagonal: the minimal monic degree is exactly d and y^d reduces
 * by exact back-substitution. The polynomial factors as Y * Psi(Y) with Psi
 * monic distinguished and v_p(Psi(0)) = s; both facts are verified here and
 * a violation throws (it would contradict a theorem, i.e. flag a bug).
 */
struct PlusPresentationReport {
    u64 degree = 0;            // degree of the minimal polynomial of y
    unsigned v_p_of_constant = 0;  // v_p(Psi(0))
    std::vector<u64> psi;      // coefficients of Psi, ascending, mod p^K
    bool distinguished = false;
};

inline PlusPresentationReport verify_plus_presentation(u64 p, unsigned s, unsigned K) {
    if (s < 1) throw std::invalid_argument("verify_plus_presentation: s must be >= 1");
    u64 n = 1;
    for (unsigned i = 0; i < s; ++i) n *= p;
    const u64 d = (n + 1) / 2;
    const u64 pK = ipow_checked(p, K);

    GroupRingElem y(n, p, K);
    y.coeffs[1] = addmod(y.coeffs[1], 1, pK);
    y.coeffs[n - 1] = addmod(y.coeffs[n - 1], 1, pK);
    y.coeffs[0] = submod(y.coeffs[0], 2, pK);

    // Powers y^0..y^d, read off in the u_k coordinates (an inversion-fixed
    // element is determined by its coefficients at exponents 0..d-1).
    std::vector<std::vector<u64>> V(d + 1, std::vector<u64>(d));
    GroupRingElem pw = GroupRingElem::one(n, p, K);
    for (u64 j = 0; j <= d; ++j) {
        for (u64 k = 0; k < d; ++k) V[j][k] = pw.coeffs[k];
        if (j < d) pw = group_mul(pw, y);
    }
    for (u64 j = 0; j < d; ++j) {
        if (V[j][j] != 1) throw std::logic_error("verify_plus_presentation: lost triangularity");
        for (u64 k = j + 1; k < d; ++k)
            if (V[j][k] != 0) throw std::logic_error("verify_plus_presentation: lost triangularity");
    }

    // Back-substitute y^d = sum_{j<d} alpha_j y^j.
    std::vector<u64> target = V[d];
    std::vector<u64> alpha(d, 0);
    for (u64 j = d; j-- > 0;) {
        u64 a = target[j];
        alpha[j] = a;
        if (a == 0) continue;
        for (u64 k = 0; k <= j; ++k) target[k] = submod(target[k], mulmod(a, V[j][k], pK), pK);
    }
    if (!std::all_of(target.begin(), target.end(), [](u64 c) { return c == 0; }))
        throw std::logic_error("verify_plus_presentation: power reduction failed");
    if (alpha[0] != 0)
        throw std::logic_error("verify_plus_presentation: minimal polynomial has nonzero constant term");

    // minpoly = Y^d - sum alpha_j Y^j = Y * Psi(Y)  ==>  Psi coefficients.
    PlusPresentationReport rep;
    rep.degree = d;
    rep.psi.assign(d, 0);
    rep.psi[d - 1] = 1;
    for (u64 j = 1; j < d; ++j) rep.psi[j - 1] = submod(0, alpha[j], pK);

    u64 c0 = rep.psi[0];
    if (c0 == 0)
        throw precision_exhausted_error("verify_plus_presentation: precision exhausted at K = " +
                                        std::to_string(K));
    rep.v_p_of_constant = vp(c0, p);

    rep.distinguished = true;
    for (u64 j = 0; j + 1 < d; ++j)
        if (rep.psi[j] % p != 0) rep.distinguished = false;

    if (rep.degree != d || rep.v_p_of_constant != s || !rep.distinguished)
        throw std::logic_error("verify_plus_presentation: presentation shape contradicts the expected lemma");
    return rep;
}

}  // namespace eisrank
