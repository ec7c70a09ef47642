#pragma once

// The zeta element of the unit group ring at a prime level N = 1 (mod p):
//
//   zeta = sum_{i=1}^{N-1} ( -(1/2N) i^2 + (1/2) i - N/12 ) [i]
//
// with coefficients in Z/p^K, indexed in exponent space by the discrete log
// of i. Its reduction mod p lies in the augmentation ideal (the coefficient
// sum is (N-1)/12 and p | N-1), so it has a well-defined order of vanishing
// along the (g-1)-adic filtration. On the maximal p-power quotient the
// congruence element is theta = zeta_Delta + (N/12) eta_Delta, where
// eta_Delta is the pushforward of the sum of all group elements; under the
// level-t character chi_t it evaluates to the L-value at -1 (and to
// (N^2-1)/12 under the trivial character). The central cross-check here:
// whenever ord < e = (p-1)p^{s-1}, the cyclotomic valuation of
// chi_s(theta) equals ord exactly, and otherwise it is at least e.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "eisrank/group_ring.hpp"
#include "eisrank/nt.hpp"
#include "eisrank/padic.hpp"

namespace eisrank {

/** Largest K with p^K < 2^63, the ceiling of the machine-residue ladder. */
inline unsigned max_precision(u64 p) {
    const u64 limit = (u64(1) << 63) - 1;
    unsigned K = 0;
    u64 v = 1;
    while (v <= limit / p) {
        v *= p;
        ++K;
    }
    return K;
}

inline void require_qualifying_pair(u64 N, u64 p) {
    if (p < 5) throw std::invalid_argument("qualifying pair: p must be at least 5");
    if (!is_prime(p)) throw std::invalid_argument("qualifying pair: p must be prime");
    if (!is_prime(N)) throw std::invalid_argument("qualifying pair: N must be prime");
    if (N % p != 1) throw std::invalid_argument("qualifying pair: N must be 1 mod p");
}

struct ZetaElement {
    u64 N = 0;
    u64 p = 0;
    unsigned K = 0;
    UnitGroupStructure units;
    GroupRingElem elem;      // coefficients mod p^K, exponent-indexed
    GroupRingElem elem_bar;  // the same element reduced mod p (K = 1)
};

inline ZetaElement build_zeta(const UnitGroupStructure& U, u64 p, unsigned K) {
    require_qualifying_pair(U.N, p);
    if (K == 0) throw std::invalid_argument("build_zeta: precision K must be positive");
    ZetaElement z;
    z.N = U.N;
    z.p = p;
    z.K = K;
    z.units = U;
    const u64 n = U.N - 1;
    z.elem = GroupRingElem(n, p, K);
    z.elem_bar = GroupRingElem(n, p, 1);
    const u64 pK = z.elem.pK;
    const u64 inv2N = invmod((2 * U.N) % pK, pK);
    const u64 inv2 = invmod(2 % pK, pK);
    const u64 n12 = mulmod(U.N % pK, invmod(12 % pK, pK), pK);  // N/12
    for (u64 i = 1; i < U.N; ++i) {
        const u64 isq = mulmod(i % pK, i % pK, pK);
        u64 c = submod(mulmod(inv2, i % pK, pK), mulmod(inv2N, isq, pK), pK);
        c = submod(c, n12, pK);
        z.elem.coeffs[U.ind[i]] = c;
        z.elem_bar.coeffs[U.ind[i]] = c % p;
    }
    return z;
}

inline ZetaElement build_zeta(u64 N, u64 p, unsigned K) {
    require_qualifying_pair(N, p);
    return build_zeta(build_unit_group(N), p, K);
}

/** Pushforward of zeta to the p-power quotient of order p^s. */
inline GroupRingElem zeta_delta(const ZetaElement& z) { return project_to_delta(z.elem); }

inline PiValuation ord_zeta_bar(const ZetaElement& z) { return order_of_vanishing(z.elem_bar); }

/** Order of vanishing of the mod-p zeta element along the (g-1)-adic filtration. */
inline PiValuation ord_zeta_bar(u64 N, u64 p) { return ord_zeta_bar(build_zeta(N, p, 1)); }

/**
 * L-value at -1 attached to the level-t character: chi_t applied to zeta.
 * Convention for t = 0: the trivial character returns the augmentation
 * (N-1)/12 rather than the bare -1/12.
 */
inline CyclotomicInt l_value_minus1(const ZetaElement& z, unsigned t) {
    if (t > vp(z.N - 1, z.p))
        throw std::invalid_argument("l_value_minus1: character level exceeds s = v_p(N-1)");
    return apply_character(z.elem, DeltaCharacter{z.p, t});
}

inline CyclotomicInt l_value_minus1(u64 N, u64 p, unsigned t, unsigned K) {
    return l_value_minus1(build_zeta(N, p, K), t);
}

struct ThetaElement {
    u64 N = 0;
    u64 p = 0;
    unsigned s = 0;
    unsigned K = 0;
    GroupRingElem theta;  // zeta_Delta + (N/12) eta, over the quotient of order p^s
    GroupRingElem eta;    // pushforward of sum over all units: constant (N-1)/p^s
};

inline ThetaElement build_theta(const ZetaElement& z) {
    ThetaElement th;
    th.N = z.N;
    th.p = z.p;
    th.s = vp(z.N - 1, z.p);
    th.K = z.K;
    GroupRingElem zd = project_to_delta(z.elem);
    const u64 ps = zd.order();
    th.eta = GroupRingElem(ps, z.p, z.K);
    const u64 fiber = (z.N - 1) / ps;
    for (auto& c : th.eta.coeffs) c = fiber % zd.pK;
    const u64 n12 = mulmod(z.N % zd.pK, invmod(12 % zd.pK, zd.pK), zd.pK);
    th.theta = group_add(zd, group_scale(th.eta, n12));
    return th;
}

inline ThetaElement build_theta(u64 N, u64 p, unsigned K) {
    return build_theta(build_zeta(N, p, K));
}

struct OrdResult {
    PiValuation ord;                         // order of vanishing of zeta mod p
    u64 e = 0;                               // ramification index (p-1)p^{s-1}
    std::vector<PiValuation> val_chi_theta;  // entry t-1: v(chi_t(theta)), t = 1..s
    bool consistent = false;                 // ord < e ? v = ord : v >= e
    unsigned K_used = 0;                     // precision at which the values were read
};

/**
 * Compute ord and the cyclotomic valuations of theta under every character
 * layer, raising precision until the distinguished-character valuation is
 * exact whenever the consistency clause needs an exact value (ord < e).
 * The ladder doubles K up to min(64, max_precision(p)) and then gives up
 * with precision_exhausted_error.
 */
inline OrdResult ord_vs_theta_check(u64 N, u64 p, unsigned K0 = 4) {
    require_qualifying_pair(N, p);
    const UnitGroupStructure U = build_unit_group(N);
    const unsigned s = vp(N - 1, p);
    OrdResult out;
    out.e = (p - 1) * ipow_checked(p, s - 1);
    out.ord = ord_zeta_bar(build_zeta(U, p, 1));

    const unsigned Kmax = std::min(64u, max_precision(p));
    unsigned K = std::min(std::max(K0, s + 1), Kmax);
    for (;;) {
        ThetaElement th = build_theta(build_zeta(U, p, K));
        out.val_chi_theta.clear();
        for (unsigned t = 1; t <= s; ++t)
            out.val_chi_theta.push_back(pi_valuation(apply_character(th.theta, DeltaCharacter{p, t})));
        out.K_used = K;

        const PiValuation vs = out.val_chi_theta[s - 1];
        const bool ord_small = out.ord.kind == PiValuation::Kind::exact && out.ord.amount < out.e;
        if (ord_small && vs.kind == PiValuation::Kind::at_least) {
            if (K >= Kmax)
                throw precision_exhausted_error(
                    "ord_vs_theta_check: v(chi_s(theta)) still ambiguous at K = " + std::to_string(K));
            K = std::min(2 * K, Kmax);
            continue;
        }
        out.consistent = ord_small ? vs == PiValuation{PiValuation::Kind::exact, out.ord.amount}
                                   : vs.amount >= out.e;
        return out;
    }
}

}  // namespace eisrank
