// Cross-cutting invariant suites, each exercising an identity that the
// main pipeline depends on but does not re-derive at runtime: valuation
// multiplicativity in the cyclotomic rings, independence of the order of
// vanishing from the generator choice, the character interpolation table,
// the reflection symmetry of the zeta coefficients, commutativity of the
// Hecke action, the closed-form dimension bookkeeping, agreement of the
// plus and minus eigenspace dimensions, and the distinguished-polynomial
// presentation of the inversion-fixed subring.

#pragma once

#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eisrank/analysis.hpp"
#include "eisrank/modsym.hpp"
#include "eisrank/zeta_theta.hpp"

namespace eisrank {

struct SelfcheckResult {
    std::string name;
    bool ok = false;
    std::string detail;  // failure description, or a check count on success
};

namespace detail {

/** Collects failures; renders either "ok (<n> checks)" or the first failures. */
class CheckCollector {
  public:
    explicit CheckCollector(std::string name) : name_(std::move(name)) {}

    void expect(bool cond, const std::function<std::string()>& describe) {
        ++checks_;
        if (cond) return;
        ++failures_;
        if (failures_ <= 5) {
            if (!detail_.empty()) detail_ += "; ";
            detail_ += describe();
        }
    }

    SelfcheckResult finish() const {
        SelfcheckResult r;
        r.name = name_;
        r.ok = failures_ == 0;
        r.detail = r.ok ? std::to_string(checks_) + " checks"
                        : std::to_string(failures_) + " of " + std::to_string(checks_) +
                              " checks failed: " + detail_;
        return r;
    }

  private:
    std::string name_;
    std::string detail_;
    u64 checks_ = 0;
    u64 failures_ = 0;
};

inline SelfcheckResult guarded(const std::string& name,
                               const std::function<void(CheckCollector&)>& body) {
    CheckCollector c(name);
    try {
        body(c);
    } catch (const std::exception& e) {
        SelfcheckResult r;
        r.name = name;
        r.ok = false;
        r.detail = std::string("exception: ") + e.what();
        return r;
    }
    return c.finish();
}

/** Qualifying (N, p) pairs with N below the bound, for p in {5, 7, 11, 13}. */
inline std::vector<std::pair<u64, u64>> qualifying_pairs_below(u64 bound) {
    std::vector<std::pair<u64, u64>> pairs;
    for (u64 p : {u64(5), u64(7), u64(11), u64(13)})
        for (u64 N : qualifying_levels(p, 7, bound - 1)) pairs.emplace_back(N, p);
    return pairs;
}

}  // namespace detail

/** v(ab) = v(a) + v(b) whenever the sum stays below the truncation cap. */
inline SelfcheckResult selfcheck_valuation_multiplicativity() {
    return detail::guarded("valuation-multiplicativity", [](detail::CheckCollector& c) {
        std::mt19937_64 rng(20260819);
        const unsigned K = 4;
        for (auto [p, t] : std::vector<std::pair<u64, unsigned>>{{5, 1}, {5, 2}, {7, 1}, {11, 1}, {13, 1}}) {
            CyclotomicInt a = CyclotomicInt::zero(p, t, K), b = a;
            const u64 e = a.e();
            const u64 pK = a.pK;
            u64 qualifying = 0;
            for (int trial = 0; trial < 1000; ++trial) {
                for (auto& x : a.coeffs) x = rng() % pK;
                for (auto& x : b.coeffs) x = rng() % pK;
                const PiValuation va = pi_valuation(a), vb = pi_valuation(b);
                if (va.kind != PiValuation::Kind::exact || vb.kind != PiValuation::Kind::exact ||
                    va.amount + vb.amount >= e * K)
                    continue;
                ++qualifying;
                const PiValuation vab = pi_valuation(cyclo_mul(a, b));
                c.expect(vab == PiValuation{PiValuation::Kind::exact, va.amount + vb.amount}, [&] {
                    std::ostringstream os;
                    os << "p=" << p << " t=" << t << " trial " << trial << ": v(ab) != v(a)+v(b)";
                    return os.str();
                });
            }
            c.expect(qualifying >= 900, [&] {
                std::ostringstream os;
                os << "p=" << p << " t=" << t << ": only " << qualifying << " of 1000 pairs usable";
                return os.str();
            });
        }
    });
}

/** The order of vanishing does not depend on which generator indexes the group. */
inline SelfcheckResult selfcheck_ord_generator_independence() {
    return detail::guarded("ord-generator-independence", [](detail::CheckCollector& c) {
        for (auto [N, p] : detail::qualifying_pairs_below(100)) {
            const PiValuation reference = ord_zeta_bar(build_zeta(build_unit_group(N), p, 1));
            const auto fac = factorize(N - 1);
            for (u64 g = 2; g < N; ++g) {
                if (!is_primitive_root(g, N, fac)) continue;
                const PiValuation got = ord_zeta_bar(build_zeta(build_unit_group(N, g), p, 1));
                c.expect(got == reference, [&, N = N, p = p, g] {
                    std::ostringstream os;
                    os << "N=" << N << " p=" << p << " generator " << g << " changes ord";
                    return os.str();
                });
            }
        }
    });
}

/**
 * The interpolation table: under the trivial character the zeta element
 * gives (N-1)/12 and eta gives N-1; under every nontrivial character eta
 * vanishes and the congruence element agrees with the projected zeta —
 * equivalently theta is the projected zeta times an element of trivial
 * nontrivial-character values whose trivial-character value is 1 + N.
 */
inline SelfcheckResult selfcheck_character_interpolation() {
    return detail::guarded("character-interpolation", [](detail::CheckCollector& c) {
        for (auto [N, p] : detail::qualifying_pairs_below(300)) {
            const unsigned K = 6;
            const ZetaElement z = build_zeta(N, p, K);
            const ThetaElement th = build_theta(z);
            const GroupRingElem zd = project_to_delta(z.elem);
            const unsigned s = unsigned(vp(N - 1, p));
            const u64 pK = z.elem.pK;
            const auto named = [&, N = N, p = p](const char* what, unsigned t) {
                return [=] {
                    std::ostringstream os;
                    os << "N=" << N << " p=" << p << " t=" << t << ": " << what;
                    return os.str();
                };
            };

            // Trivial character: zeta -> (N-1)/12, eta -> N-1, theta -> (N^2-1)/12.
            const u64 inv12 = invmod(12 % pK, pK);
            const u64 aug_zeta = mulmod((N - 1) % pK, inv12, pK);
            const u64 aug_theta = mulmod(mulmod((N - 1) % pK, (N + 1) % pK, pK), inv12, pK);
            c.expect(apply_character(zd, DeltaCharacter{p, 0}).coeffs[0] == aug_zeta,
                     named("trivial character of zeta", 0));
            c.expect(apply_character(th.eta, DeltaCharacter{p, 0}).coeffs[0] == (N - 1) % pK,
                     named("trivial character of eta", 0));
            c.expect(apply_character(th.theta, DeltaCharacter{p, 0}).coeffs[0] == aug_theta,
                     named("trivial character of theta", 0));

            for (unsigned t = 1; t <= s; ++t) {
                const DeltaCharacter chi{p, t};
                c.expect(apply_character(th.eta, chi).is_zero(), named("eta must vanish", t));
                const CyclotomicInt lhs = apply_character(th.theta, chi);
                const CyclotomicInt rhs = apply_character(zd, chi);
                c.expect(lhs == rhs, named("theta vs projected zeta", t));
                c.expect(rhs == l_value_minus1(z, t), named("projected zeta vs L-value", t));
            }
        }
    });
}

/** Coefficient reflection: the weight of [i] equals the weight of [N-i]. */
inline SelfcheckResult selfcheck_zeta_reflection_symmetry() {
    return detail::guarded("zeta-reflection-symmetry", [](detail::CheckCollector& c) {
        for (auto [N, p] : detail::qualifying_pairs_below(300)) {
            const ZetaElement z = build_zeta(N, p, 4);
            for (u64 i = 1; i < N; ++i) {
                c.expect(z.elem.coeffs[z.units.ind[i]] == z.elem.coeffs[z.units.ind[N - i]],
                         [&, N = N, p = p, i] {
                             std::ostringstream os;
                             os << "N=" << N << " p=" << p << " i=" << i << ": reflection broken";
                             return os.str();
                         });
            }
        }
    });
}

/** The Hecke operators commute with each other and with the star involution. */
inline SelfcheckResult selfcheck_hecke_commutativity() {
    return detail::guarded("hecke-commutativity", [](detail::CheckCollector& c) {
        for (auto [M, p] : std::vector<std::pair<u64, u64>>{{11, 5}, {31, 5}, {121, 5}, {29, 7}}) {
            const ModularSymbolSpace sp = build_space(M, p);
            const FpMatrix S = star_matrix(sp);
            const auto named = [M = M, p = p](const char* what) {
                return [=] {
                    std::ostringstream os;
                    os << "M=" << M << " p=" << p << ": " << what;
                    return os.str();
                };
            };
            c.expect(fp_mul(S, S) == FpMatrix::identity(S.rows, p), named("star is not an involution"));
            std::vector<FpMatrix> ops;
            for (u64 ell : {u64(2), u64(3), u64(5), u64(7)}) {
                if (M % ell == 0) continue;
                ops.push_back(hecke_matrix(sp, ell));
            }
            for (size_t i = 0; i < ops.size(); ++i) {
                c.expect(fp_mul(S, ops[i]) == fp_mul(ops[i], S), named("star fails to commute"));
                for (size_t j = i + 1; j < ops.size(); ++j)
                    c.expect(fp_mul(ops[i], ops[j]) == fp_mul(ops[j], ops[i]),
                             named("operators fail to commute"));
            }
        }
    });
}

/** dim = 2g + c - 1 with the genus from the closed-form invariants, and the built space matches. */
inline SelfcheckResult selfcheck_dimension_closed_forms() {
    return detail::guarded("dimension-closed-forms", [](detail::CheckCollector& c) {
        for (auto [M, p] : std::vector<std::pair<u64, u64>>{
                 {11, 5}, {31, 5}, {49, 5}, {121, 5}, {169, 5}, {41, 7}, {961, 7}}) {
            const LevelShape sh = level_shape(M);
            const auto named = [M = M, p = p](const char* what) {
                return [=] {
                    std::ostringstream os;
                    os << "M=" << M << " p=" << p << ": " << what;
                    return os.str();
                };
            };
            c.expect(12 * sh.genus == 12 + sh.mu - 3 * sh.nu2 - 4 * sh.nu3 - 6 * sh.ncusps,
                     named("genus relation broken"));
            c.expect(sh.dim == 2 * sh.genus + sh.ncusps - 1, named("dimension formula broken"));
            const ModularSymbolSpace sp = build_space(M, p);
            c.expect(sp.basis_symbols.size() == sh.dim, named("built basis size deviates"));
            c.expect(sp.to_basis.rows == sp.p1.reps.size() && sp.to_basis.cols == sh.dim,
                     named("projection shape deviates"));
        }
    });
}

/** The plus and minus generalized eigenspaces carry the same dimension. */
inline SelfcheckResult selfcheck_plus_minus_rank_agreement() {
    return detail::guarded("plus-minus-rank-agreement", [](detail::CheckCollector& c) {
        for (auto [N, p] : std::vector<std::pair<u64, u64>>{{11, 5}, {31, 5}, {29, 7}}) {
            const ModularSymbolSpace sp = build_space(N, p);
            const GenEigenResult plus = eisenstein_generalized_eigenspace(sp, plus_cuspidal_subspace(sp));
            const GenEigenResult minus = eisenstein_generalized_eigenspace(sp, minus_cuspidal_subspace(sp));
            c.expect(plus.stabilized && minus.stabilized && plus.dim == minus.dim, [&, N = N, p = p] {
                std::ostringstream os;
                os << "N=" << N << " p=" << p << ": plus dim " << plus.dim << " vs minus dim "
                   << minus.dim;
                return os.str();
            });
        }
    });
}

/** Minimal polynomial of the inversion-fixed generator: degree (p^s+1)/2, distinguished, v_p at 0 equal to s. */
inline SelfcheckResult selfcheck_plus_presentation() {
    return detail::guarded("plus-presentation", [](detail::CheckCollector& c) {
        for (auto [p, s] : std::vector<std::pair<u64, unsigned>>{{5, 1}, {5, 2}, {7, 1}, {11, 1}}) {
            const PlusPresentationReport rep = verify_plus_presentation(p, s, 4);
            const u64 ps = ipow_checked(p, s);
            c.expect(rep.degree == (ps + 1) / 2 && rep.v_p_of_constant == s && rep.distinguished,
                     [&, p = p, s = s] {
                         std::ostringstream os;
                         os << "p=" << p << " s=" << s << ": degree " << rep.degree << " v_p "
                            << rep.v_p_of_constant << (rep.distinguished ? "" : " not distinguished");
                         return os.str();
                     });
        }
    });
}

/** All suites, in a fixed order; the callback sees each result as it lands. */
inline std::vector<SelfcheckResult> run_selfcheck(
    const std::function<void(const SelfcheckResult&)>& progress = {}) {
    std::vector<SelfcheckResult> results;
    const auto run = [&](SelfcheckResult (*suite)()) {
        results.push_back(suite());
        if (progress) progress(results.back());
    };
    run(&selfcheck_valuation_multiplicativity);
    run(&selfcheck_ord_generator_independence);
    run(&selfcheck_character_interpolation);
    run(&selfcheck_zeta_reflection_symmetry);
    run(&selfcheck_hecke_commutativity);
    run(&selfcheck_dimension_closed_forms);
    run(&selfcheck_plus_minus_rank_agreement);
    run(&selfcheck_plus_presentation);
    return results;
}

}  // namespace eisrank
