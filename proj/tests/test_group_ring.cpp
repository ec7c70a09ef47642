// Group rings over (Z/N)^x and over its maximal p-power quotient: discrete
// logs, the (g-1)-adic expansion, order of vanishing, projection to the
// quotient, characters into cyclotomic rings, and the minimal polynomial of
// [d]+[d^{-1}]-2 on the inversion-fixed subring.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "eisrank/group_ring.hpp"

using namespace eisrank;

TEST_CASE("unit group tables") {
    UnitGroupStructure u7 = build_unit_group(7);
    CHECK(u7.g == 3);
    CHECK(u7.ind[3] == 1);
    CHECK(u7.ind[2] == 2);  // 3^2 = 2 mod 7

    UnitGroupStructure u11 = build_unit_group(11);
    CHECK(u11.g == 2);
    CHECK(u11.ind[2] == 1);

    UnitGroupStructure u181 = build_unit_group(181);
    CHECK(u181.g == 2);
    // Brute-force order check: 2 really has order 180 mod 181.
    u64 x = 1;
    int order = 0;
    do {
        x = (x * 2) % 181;
        ++order;
    } while (x != 1);
    CHECK(order == 180);
    // ind is a bijection [1,180] -> [0,179] inverse to powering.
    std::vector<bool> seen(180, false);
    for (u64 i = 1; i <= 180; ++i) {
        u64 m = u181.ind[i];
        REQUIRE(m < 180);
        REQUIRE(!seen[m]);
        seen[m] = true;
        REQUIRE(powmod(2, m, 181) == i);
    }

    // N = 41: the smallest primitive root is composite (6); the choice rule
    // is "smallest", not "smallest prime".
    CHECK(build_unit_group(41).g == 6);

    CHECK_THROWS_AS(build_unit_group(15), std::invalid_argument);
    CHECK_THROWS_AS(build_unit_group(5), std::invalid_argument);  // below the supported range
}

TEST_CASE("augmentation") {
    // Group of order 10 (N=11), coefficients mod 5^4.
    GroupRingElem one = GroupRingElem::one(10, 5, 4);
    CHECK(augmentation(one) == 1);

    GroupRingElem g = GroupRingElem::monomial(10, 5, 4, 1);
    CHECK(augmentation(group_sub(g, one)) == 0);

    // Uniform element with every coefficient 1 (the image of sum_i [i]).
    GroupRingElem eta(10, 5, 4);
    for (auto& c : eta.coeffs) c = 1;
    CHECK(augmentation(eta) == 10);  // N-1 mod 5^4
}

TEST_CASE("expansion in powers of (g-1)") {
    GroupRingElem one = GroupRingElem::one(10, 5, 4);
    GroupRingElem g = GroupRingElem::monomial(10, 5, 4, 1);
    GroupRingElem g2 = GroupRingElem::monomial(10, 5, 4, 2);

    AugExpansion e1 = aug_power_expansion(group_sub(g, one));
    REQUIRE(e1.b.size() == 10);
    CHECK(e1.b[0] == 0);
    CHECK(e1.b[1] == 1);
    for (size_t i = 2; i < 10; ++i) CHECK(e1.b[i] == 0);

    AugExpansion e2 = aug_power_expansion(group_sub(g2, one));  // (1+(g-1))^2 - 1
    CHECK(e2.b[0] == 0);
    CHECK(e2.b[1] == 2);
    CHECK(e2.b[2] == 1);
    for (size_t i = 3; i < 10; ++i) CHECK(e2.b[i] == 0);
}

TEST_CASE("expansion round-trips through group-ring arithmetic") {
    std::mt19937_64 rng(77);
    for (u64 N : {11ull, 31ull, 13ull}) {
        u64 n = N - 1;
        u64 p = 5;
        unsigned K = 3;
        u64 pK = ipow_checked(p, K);
        GroupRingElem gm1 = group_sub(GroupRingElem::monomial(n, p, K, 1), GroupRingElem::one(n, p, K));
        for (int trial = 0; trial < 20; ++trial) {
            GroupRingElem x(n, p, K);
            for (auto& c : x.coeffs) c = rng() % pK;
            AugExpansion ex = aug_power_expansion(x);
            // Reconstruct sum b_i (g-1)^i with honest multiplications.
            GroupRingElem acc(n, p, K);
            GroupRingElem pw = GroupRingElem::one(n, p, K);
            for (u64 i = 0; i < n; ++i) {
                acc = group_add(acc, group_scale(pw, ex.b[i]));
                if (i + 1 < n) pw = group_mul(pw, gm1);
            }
            REQUIRE(acc == x);
        }
    }
}

TEST_CASE("order of vanishing") {
    u64 n = 30;  // N=31
    u64 p = 5;
    GroupRingElem one = GroupRingElem::one(n, p, 1);
    GroupRingElem g = GroupRingElem::monomial(n, p, 1, 1);
    GroupRingElem gm1 = group_sub(g, one);

    PiValuation v = order_of_vanishing(gm1);
    CHECK(v.kind == PiValuation::Kind::exact);
    CHECK(v.amount == 1);

    // (g-1)^k times a unit has order exactly k.
    std::mt19937_64 rng(5150);
    for (u64 k = 1; k <= 5; ++k) {
        GroupRingElem x = GroupRingElem::one(n, p, 1);
        for (u64 i = 0; i < k; ++i) x = group_mul(x, gm1);
        // Multiply by a random unit of the group ring: 1 + (terms in the
        // augmentation ideal) is always invertible... just use a unit scalar
        // plus an augmentation-zero perturbation of high order.
        u64 unit_scalar = 1 + rng() % (p - 1);
        GroupRingElem y = group_scale(x, unit_scalar);
        PiValuation vk = order_of_vanishing(y);
        REQUIRE(vk.kind == PiValuation::Kind::exact);
        REQUIRE(vk.amount == k);
    }

    // The incremental path must agree with the full expansion.
    for (int trial = 0; trial < 40; ++trial) {
        GroupRingElem x(n, p, 1);
        for (auto& c : x.coeffs) c = rng() % p;
        u64 aug = augmentation(x);
        x.coeffs[0] = submod(x.coeffs[0], aug, p);  // force augmentation zero
        AugExpansion ex = aug_power_expansion(x);
        u64 expected = n - 1;
        bool marker = true;
        for (u64 i = 1; i < n; ++i)
            if (ex.b[i] % p != 0) {
                expected = i;
                marker = false;
                break;
            }
        PiValuation got = order_of_vanishing(x);
        if (marker) {
            REQUIRE(got.kind == PiValuation::Kind::at_least);
            REQUIRE(got.amount == n - 1);
        } else {
            REQUIRE(got.kind == PiValuation::Kind::exact);
            REQUIRE(got.amount == expected);
        }
    }

    CHECK_THROWS_AS(order_of_vanishing(one), std::invalid_argument);
}

TEST_CASE("projection to the p-power quotient") {
    // N=11, p=5: group of order 10 projects onto order 5 via m mod 5.
    GroupRingElem g = GroupRingElem::monomial(10, 5, 4, 1);
    GroupRingElem pg = project_to_delta(g);
    REQUIRE(pg.coeffs.size() == 5);
    CHECK(pg.coeffs[1] == 1);
    CHECK(augmentation(pg) == 1);

    GroupRingElem eta(10, 5, 4);
    for (auto& c : eta.coeffs) c = 1;
    GroupRingElem peta = project_to_delta(eta);
    for (u64 k = 0; k < 5; ++k) CHECK(peta.coeffs[k] == 2);  // (N-1)/p^s = 2

    // Projection preserves augmentation.
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        GroupRingElem x(10, 5, 4);
        for (auto& c : x.coeffs) c = rng() % x.pK;
        CHECK(augmentation(project_to_delta(x)) == augmentation(x));
    }
}

TEST_CASE("characters of the quotient") {
    // Delta of order 25 (p=5, s=2), coefficients mod 5^4.
    u64 p = 5;
    unsigned K = 4;
    u64 ps = 25;

    // chi_t(eta) = 0 for every nontrivial chi.
    GroupRingElem eta(ps, p, K);
    for (auto& c : eta.coeffs) c = 7;
    for (unsigned t = 1; t <= 2; ++t) {
        CyclotomicInt v = apply_character(eta, DeltaCharacter{p, t});
        CHECK(v.is_zero());
    }

    // chi([d] + [d^{-1}]) = zeta + zeta^{-1}.
    GroupRingElem dd = group_add(GroupRingElem::monomial(ps, p, K, 1),
                                 GroupRingElem::monomial(ps, p, K, ps - 1));
    for (unsigned t = 1; t <= 2; ++t) {
        u64 pt = (t == 1) ? 5 : 25;
        CyclotomicInt z = CyclotomicInt::zeta(p, t, K);
        CyclotomicInt expect = cyclo_add(z, cyclo_pow(z, pt - 1));
        CHECK(apply_character(dd, DeltaCharacter{p, t}) == expect);
    }

    // chi(1) = 1; trivial character (t=0) returns the augmentation.
    CHECK(apply_character(GroupRingElem::one(ps, p, K), DeltaCharacter{p, 2}) ==
          CyclotomicInt::one(p, 2, K));
    CyclotomicInt aug = apply_character(eta, DeltaCharacter{p, 0});
    CHECK(aug.coeffs[0] == (7 * 25) % aug.pK);

    // Ring homomorphism on random pairs.
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        GroupRingElem x(ps, p, K), y(ps, p, K);
        for (auto& c : x.coeffs) c = rng() % x.pK;
        for (auto& c : y.coeffs) c = rng() % y.pK;
        for (unsigned t = 0; t <= 2; ++t) {
            DeltaCharacter chi{p, t};
            CyclotomicInt lhs = apply_character(group_mul(x, y), chi);
            CyclotomicInt rhs = cyclo_mul(apply_character(x, chi), apply_character(y, chi));
            REQUIRE(lhs == rhs);
        }
    }
}

TEST_CASE("inversion involution") {
    GroupRingElem x(10, 5, 4);
    for (u64 m = 0; m < 10; ++m) x.coeffs[m] = m + 1;
    GroupRingElem y = inversion_involution(x);
    CHECK(y.coeffs[0] == 1);
    for (u64 m = 1; m < 10; ++m) CHECK(y.coeffs[m] == 10 - m + 1);
    CHECK(inversion_involution(y) == x);
}

TEST_CASE("plus-subring presentation") {
    // minpoly(y) = y * Psi(y) on the inversion-fixed subring, with
    // deg = (p^s+1)/2 and v_p(Psi(0)) = s; Psi distinguished.
    struct Case {
        u64 p;
        unsigned s;
        u64 degree;
    };
    for (Case c : {Case{5, 1, 3}, Case{5, 2, 13}, Case{7, 1, 4}, Case{11, 1, 6}}) {
        PlusPresentationReport rep = verify_plus_presentation(c.p, c.s, 4);
        CHECK(rep.degree == c.degree);
        CHECK(rep.v_p_of_constant == c.s);
        CHECK(rep.distinguished);
        REQUIRE(rep.psi.size() == c.degree);  // Psi has degree d-1, so d coefficients
        CHECK(rep.psi.back() == 1);           // monic
        for (size_t i = 0; i + 1 < rep.psi.size(); ++i) CHECK(rep.psi[i] % c.p == 0);
    }
}
