// Orchestration: one report per qualifying level (N, p) combining the
// order of vanishing of the mod-p zeta element, the cyclotomic valuations
// of the congruence element, and the Hecke-algebra rank from modular
// symbols; regime classification with the level-square Galois-orbit
// prediction; the counting identities forced by the rank; and a parallel
// scanner with per-level fault isolation.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "eisrank/modsym.hpp"
#include "eisrank/nt.hpp"
#include "eisrank/zeta_theta.hpp"

namespace eisrank {

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

enum class Regime { merel, lecouturier, equal_three, spoiler, higher };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::merel: return "merel";
        case Regime::lecouturier: return "lecouturier";
        case Regime::equal_three: return "equal-three";
        case Regime::spoiler: return "spoiler";
        case Regime::higher: return "higher";
    }
    throw std::logic_error("regime_name: unreachable");
}

/**
 * Whether a valuation statement equals k. A lower-bound marker decides the
 * question only when the bound already exceeds k; an undecidable marker is
 * a caller error (markers produced here are always far above the thresholds
 * the classification compares against).
 */
inline bool pi_equals(PiValuation v, u64 k) {
    if (v.kind == PiValuation::Kind::exact) return v.amount == k;
    if (v.amount > k) return false;
    throw std::invalid_argument("pi_equals: lower bound " + std::to_string(v.amount) +
                                " cannot decide equality with " + std::to_string(k));
}

/**
 * Predicted Galois-orbit structure of the new Eisenstein-congruent
 * eigenforms at level N^2: one orbit per character layer t = 1..s, each a
 * totally ramified extension of degree (1/2)(p-1)p^{t-1}(r-2), the orbit
 * size equal to the field degree. The sizes automatically sum to
 * (1/2)(p^s-1)(r-2).
 */
struct TheoremCPrediction {
    struct Orbit {
        unsigned t = 0;
        u64 field_degree = 0;
        u64 orbit_size = 0;
    };
    u64 orbits = 0;  // = s
    std::vector<Orbit> per_orbit;
};

struct RegimeClassification {
    Regime regime = Regime::higher;
    std::optional<TheoremCPrediction> prediction;  // spoiler regime only
};

/**
 * The five regimes, in terms of ord and the rank r:
 *   merel        iff r = 2 and ord = 1
 *   lecouturier  iff r = 3 and ord = 2
 *   equal-three  iff ord = 3 and r - 1 = 3
 *   spoiler      iff exactly one of ord and r - 1 equals 3
 *   higher       otherwise
 * The orbit prediction is attached only in the spoiler regime (its
 * hypothesis); when ord = r - 1 = 3 the prediction is deliberately
 * withheld — the conclusion is known to fail there.
 */
inline RegimeClassification classify_regime(PiValuation ord, u64 r, u64 p, unsigned s) {
    const bool ord1 = pi_equals(ord, 1);
    const bool ord2 = pi_equals(ord, 2);
    const bool ord3 = pi_equals(ord, 3);
    const bool rm1_3 = (r == 4);

    RegimeClassification out;
    if (r == 2 && ord1) {
        out.regime = Regime::merel;
    } else if (r == 3 && ord2) {
        out.regime = Regime::lecouturier;
    } else if (ord3 && rm1_3) {
        out.regime = Regime::equal_three;
    } else if (ord3 != rm1_3) {
        out.regime = Regime::spoiler;
        TheoremCPrediction pred;
        pred.orbits = s;
        u64 pt1 = 1;  // p^{t-1}
        for (unsigned t = 1; t <= s; ++t) {
            const u64 deg = (p - 1) * pt1 * (r - 2) / 2;
            pred.per_orbit.push_back({t, deg, deg});
            pt1 *= p;
        }
        out.prediction = std::move(pred);
    } else {
        out.regime = Regime::higher;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Counting identities
// ---------------------------------------------------------------------------

struct EisensteinCounts {
    u64 rank_T = 0;          // (1/2)(p^s + 1) r
    u64 new_eisenstein = 0;  // (1/2)(p^s - 1)(r - 2)
};

/**
 * The two counts forced by a rank-r algebra over the plus part of the
 * p-power quotient, cross-checked against the eigensystem tally
 * rank_T = p^s + (r - 1) + new_eisenstein.
 */
inline EisensteinCounts eisenstein_counts(u64 p, unsigned s, u64 r) {
    if (r < 2) throw std::invalid_argument("eisenstein_counts: rank must be at least 2");
    const u64 ps = ipow_checked(p, s);
    EisensteinCounts c;
    c.rank_T = (ps + 1) * r / 2;
    c.new_eisenstein = (ps - 1) * (r - 2) / 2;
    if (c.rank_T != ps + (r - 1) + c.new_eisenstein)
        throw std::logic_error("eisenstein_counts: eigensystem tally violated");
    return c;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct ReportError {
    std::string kind;  // invalid-input | precision-exhausted | dimension-cap | stabilization | internal
    std::string message;
};

struct Timings {
    double ord_ms = 0;
    double rank_ms = 0;
    double total_ms = 0;
};

/**
 * Everything computed for one level. Absent optionals mean "not computed"
 * (rank-side fields under --ord-only, or anything past the point where an
 * error struck); the error field carries the failure, never silence.
 */
struct AnalysisReport {
    u64 N = 0;
    u64 p = 0;
    unsigned s = 0;
    std::optional<PiValuation> ord;
    std::vector<std::pair<unsigned, PiValuation>> val_chi_theta;  // (t, v(chi_t(Theta))), t = 1..s
    std::optional<u64> r;
    std::optional<Regime> regime;
    std::optional<bool> merel_ok;        // (r = 2) iff (ord = 1)
    std::optional<bool> lecouturier_ok;  // (r = 3) iff (ord = 2)
    std::optional<bool> prop51_ok;       // ord < e ? v(chi_s(Theta)) = ord : v >= e
    std::optional<u64> rank_T;
    std::optional<u64> new_eisenstein;
    std::optional<TheoremCPrediction> theoremC;
    std::optional<Timings> timings;
    std::optional<ReportError> error;
};

struct AnalyzeOptions {
    unsigned precision = 4;  // starting K for the valuation ladder
    bool ord_only = false;   // skip the modular-symbol rank
    std::string cache_dir;   // empty disables the matrix cache
    std::vector<u64> hecke_budget = kDefaultHeckeBudget;
    bool timings = false;  // attach wall-clock timings (breaks byte-stability)
};

/**
 * Full analysis of one qualifying level. Precondition violations throw
 * invalid_argument naming the offending condition; computational limits
 * (precision ladder, dimension cap, stabilization budget) come back as
 * structured error fields on the report with everything computed so far
 * still filled in. A theorem-contradicting result throws logic_error —
 * that is always a bug, never data.
 */
inline AnalysisReport analyze(u64 N, u64 p, const AnalyzeOptions& opt = {}) {
    require_qualifying_pair(N, p);
    using clock = std::chrono::steady_clock;
    const auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };

    AnalysisReport rep;
    rep.N = N;
    rep.p = p;
    rep.s = unsigned(vp(N - 1, p));

    Timings tm;
    const auto t_start = clock::now();
    try {
        const auto t0 = clock::now();
        OrdResult ores = ord_vs_theta_check(N, p, opt.precision);
        tm.ord_ms = ms_since(t0);
        rep.ord = ores.ord;
        for (unsigned t = 1; t <= rep.s; ++t) rep.val_chi_theta.emplace_back(t, ores.val_chi_theta[t - 1]);
        rep.prop51_ok = ores.consistent;
    } catch (const precision_exhausted_error& e) {
        rep.error = ReportError{"precision-exhausted", e.what()};
        if (opt.timings) {
            tm.total_ms = ms_since(t_start);
            rep.timings = tm;
        }
        return rep;
    }

    if (!opt.ord_only) {
        try {
            const auto t0 = clock::now();
            const u64 r = eisenstein_rank(N, p, opt.cache_dir, opt.hecke_budget);
            tm.rank_ms = ms_since(t0);
            rep.r = r;
            RegimeClassification cls = classify_regime(*rep.ord, r, p, rep.s);
            rep.regime = cls.regime;
            rep.theoremC = std::move(cls.prediction);
            rep.merel_ok = ((r == 2) == pi_equals(*rep.ord, 1));
            rep.lecouturier_ok = ((r == 3) == pi_equals(*rep.ord, 2));
            EisensteinCounts counts = eisenstein_counts(p, rep.s, r);
            rep.rank_T = counts.rank_T;
            rep.new_eisenstein = counts.new_eisenstein;
        } catch (const dimension_cap_error& e) {
            rep.error = ReportError{"dimension-cap", e.what()};
        } catch (const stabilization_error& e) {
            rep.error = ReportError{"stabilization", e.what()};
        }
    }

    if (opt.timings) {
        tm.total_ms = ms_since(t_start);
        rep.timings = tm;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Scanning
// ---------------------------------------------------------------------------

/** Primes N with n_min <= N <= n_max and N = 1 mod p (so N is a qualifying level for p). */
inline std::vector<u64> qualifying_levels(u64 p, u64 n_min, u64 n_max) {
    if (p < 5 || !is_prime(p)) throw std::invalid_argument("qualifying_levels: p must be a prime >= 5");
    std::vector<u64> out;
    // The first qualifying residue >= max(n_min, p+1).
    u64 start = std::max<u64>(n_min, p + 1);
    u64 first = (start / p) * p + 1;
    if (first < start) first += p;
    for (u64 n = first; n <= n_max; n += p)
        if (is_prime(n)) out.push_back(n);
    return out;
}

struct ScanOptions : AnalyzeOptions {
    unsigned jobs = 1;
};

/**
 * Analyze every qualifying level in [n_min, n_max], in parallel when
 * jobs > 1. Reports are handed to `emit` (and returned) in increasing N
 * regardless of worker scheduling; a failure at one level becomes that
 * level's error field and the scan continues.
 */
inline std::vector<AnalysisReport> scan(u64 p, u64 n_min, u64 n_max, const ScanOptions& opt = {},
                                        const std::function<void(const AnalysisReport&)>& emit = {}) {
    const std::vector<u64> levels = qualifying_levels(p, n_min, n_max);
    const size_t n = levels.size();

    const auto analyze_captured = [&](u64 N) -> AnalysisReport {
        try {
            return analyze(N, p, opt);
        } catch (const std::invalid_argument& e) {
            AnalysisReport rep;
            rep.N = N;
            rep.p = p;
            rep.error = ReportError{"invalid-input", e.what()};
            return rep;
        } catch (const std::exception& e) {
            AnalysisReport rep;
            rep.N = N;
            rep.p = p;
            rep.error = ReportError{"internal", e.what()};
            return rep;
        }
    };

    std::vector<std::optional<AnalysisReport>> slots(n);
    std::vector<AnalysisReport> results;
    results.reserve(n);
    size_t emitted = 0;
    std::mutex mu;
    const auto flush_ready = [&] {  // call with mu held
        while (emitted < n && slots[emitted].has_value()) {
            if (emit) emit(*slots[emitted]);
            results.push_back(std::move(*slots[emitted]));
            slots[emitted].reset();
            ++emitted;
        }
    };

    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, unsigned(std::max<size_t>(n, 1))));
    if (jobs == 1) {
        for (size_t i = 0; i < n; ++i) {
            slots[i] = analyze_captured(levels[i]);
            std::lock_guard<std::mutex> lk(mu);
            flush_ready();
        }
        return results;
    }

    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                AnalysisReport rep = analyze_captured(levels[i]);
                std::lock_guard<std::mutex> lk(mu);
                slots[i] = std::move(rep);
                flush_ready();
            }
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

// ---------------------------------------------------------------------------
// Level-square dimension report
// ---------------------------------------------------------------------------

/**
 * The generalized-eigenspace dimensions at level N^2 tied to the rank at
 * level N: the old part contributes 2(r-1), and the new part must match
 * the (1/2)(p^s-1)(r-2) count — two independent computations agreeing.
 */
struct LevelSquareReport {
    u64 N = 0;
    u64 p = 0;
    unsigned s = 0;
    u64 r = 0;
    u64 dim_total = 0;
    u64 dim_old = 0;
    u64 dim_new = 0;
    u64 new_expected = 0;
    bool identity_ok = false;
    bool stabilized = false;  // false when the prime budget ran out while still cutting
    std::vector<u64> primes_used;
};

inline LevelSquareReport level_square_report(u64 N, u64 p,
                                             const std::vector<u64>& budget = kDefaultHeckeBudget,
                                             const std::string& cache_dir = "") {
    require_qualifying_pair(N, p);
    LevelSquareDims dims = level_square_dims(N, p, budget, cache_dir);
    LevelSquareReport rep;
    rep.N = N;
    rep.p = p;
    rep.s = unsigned(vp(N - 1, p));
    rep.r = dims.r;
    rep.dim_total = dims.dim_total;
    rep.dim_old = dims.dim_old;
    rep.dim_new = dims.dim_new;
    rep.new_expected = eisenstein_counts(p, rep.s, dims.r).new_eisenstein;
    rep.identity_ok = rep.dim_old == 2 * (dims.r - 1) && rep.dim_total == rep.dim_old + rep.dim_new &&
                      rep.dim_new == rep.new_expected;
    rep.stabilized = dims.stabilized;
    rep.primes_used = dims.primes_used;
    return rep;
}

}  // namespace eisrank
