#pragma once

// Weight-two modular symbols for Gamma_0(M) over F_p, for M a prime N or a
// prime square N^2. Symbols are indexed by the projective line over Z/M;
// the two-term and three-term relations are eliminated sparsely (each
// generator column sits in at most two relation rows, so elimination is
// linear-time) and every symbol is re-expressed over the surviving free
// generators. On top of that sit the star involution, the boundary map to
// cusps, Hecke operators from determinant-ell integer matrices, and the
// generalized eigenspace where every T_ell acts as ell + 1 — whose dimension
// on the cuspidal part is one less than the rank being computed.
//
// Every closed-form count (projective line size, cusp count, genus, space
// dimension) is checked against the construction at runtime; disagreement
// throws logic_error rather than returning silently wrong answers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "eisrank/cache.hpp"
#include "eisrank/fp_linalg.hpp"
#include "eisrank/nt.hpp"

namespace eisrank {

/** Thrown before any heavy work when a space would exceed the size cap. */
struct dimension_cap_error : std::runtime_error {
    explicit dimension_cap_error(const std::string& what) : std::runtime_error(what) {}
};

/** Thrown when the eigenspace chain is still shrinking at the end of the prime budget. */
struct stabilization_error : std::runtime_error {
    explicit stabilization_error(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr u64 kDimensionCap = 12000;
inline const std::vector<u64> kDefaultHeckeBudget{2, 3, 5, 7, 11, 13};

// ---------------------------------------------------------------------------
// Closed-form shape data for levels N and N^2 (N prime, N >= 5)
// ---------------------------------------------------------------------------

struct LevelShape {
    u64 M = 0;       // the level itself
    u64 N = 0;       // its prime
    u64 mu = 0;      // index of Gamma_0(M), i.e. |P^1(Z/M)|
    u64 ncusps = 0;  // number of cusps
    u64 nu2 = 0;     // elliptic points of order 2
    u64 nu3 = 0;     // elliptic points of order 3
    u64 genus = 0;   // genus of X_0(M)
    u64 dim = 0;     // dim of weight-2 modular symbols = 2*genus + ncusps - 1
};

inline LevelShape level_shape(u64 M) {
    u64 N = 0;
    bool square = false;
    if (is_prime(M)) {
        N = M;
    } else {
        u64 r = u64(std::llround(std::sqrt(double(M))));
        for (u64 c : {r > 0 ? r - 1 : 0, r, r + 1})
            if (c >= 2 && c <= 0xFFFFFFFFull && c * c == M) N = c;
        if (N == 0 || !is_prime(N))
            throw std::invalid_argument("level_shape: level must be a prime or the square of a prime");
        square = true;
    }
    if (N < 5) throw std::invalid_argument("level_shape: the level's prime must be at least 5");
    LevelShape s;
    s.M = M;
    s.N = N;
    s.mu = square ? N * (N + 1) : N + 1;
    s.ncusps = square ? N + 1 : 2;
    s.nu2 = (N % 4 == 1) ? 2 : 0;  // solutions of x^2 = -1 persist mod N^2
    s.nu3 = (N % 3 == 1) ? 2 : 0;  // solutions of x^2 + x + 1 = 0 likewise
    u64 g12 = 12 + s.mu - 3 * s.nu2 - 4 * s.nu3 - 6 * s.ncusps;
    if (g12 % 12 != 0) throw std::logic_error("level_shape: genus formula did not land on an integer");
    s.genus = g12 / 12;
    s.dim = 2 * s.genus + s.ncusps - 1;
    return s;
}

// ---------------------------------------------------------------------------
// The projective line over Z/M
// ---------------------------------------------------------------------------

/**
 * Canonical representative of the class of (u : v) under unit scaling, or
 * (0, 0) when gcd(u, v, M) > 1 so the pair is not a point at all. The
 * representative has first coordinate gcd(u, M) (so (0 : 1) for u = 0) and,
 * among all unit rescalings fixing that, the smallest second coordinate.
 */
inline std::pair<u32, u32> p1_normalize(u64 M, i64 ui, i64 vi) {
    const i64 Mi = i64(M);
    u64 u = u64(((ui % Mi) + Mi) % Mi);
    u64 v = u64(((vi % Mi) + Mi) % Mi);
    if (u == 0) {
        if (gcd_u64(v, M) != 1) return {0, 0};
        return {0, 1};
    }
    u64 g = gcd_u64(u, M);
    if (gcd_u64(g, v) != 1) return {0, 0};
    u64 Mg = M / g;
    u64 t = invmod((u / g) % Mg, Mg);
    while (gcd_u64(t, M) != 1) t += Mg;  // lift to a unit mod M (terminates within g steps)
    const u64 scaled = mulmod(v, t, M);
    u64 best = scaled;
    for (u64 k = 1; k < g; ++k) {
        u64 tk = 1 + k * Mg;  // the stabilizer of the first coordinate
        if (gcd_u64(tk, M) != 1) continue;
        u64 w = mulmod(scaled, tk, M);
        if (w < best) best = w;
    }
    return {u32(g), u32(best)};
}

struct P1Line {
    static constexpr u32 npos = 0xFFFFFFFFu;
    u64 M = 0;
    std::vector<std::pair<u32, u32>> reps;
    std::unordered_map<u64, u32> position;  // key u*M + v of a canonical rep

    u32 index(i64 u, i64 v) const {
        auto [nu, nv] = p1_normalize(M, u, v);
        if (nu == 0 && nv == 0) return npos;
        auto it = position.find(u64(nu) * M + nv);
        return it == position.end() ? npos : it->second;
    }
};

inline P1Line build_p1(u64 M) {
    if (M < 2 || M > 0xFFFFFFFFull)
        throw std::invalid_argument("build_p1: level must be between 2 and 2^32 - 1");
    P1Line p1;
    p1.M = M;
    auto add = [&](std::pair<u32, u32> r) {
        u64 key = u64(r.first) * M + r.second;
        auto [it, fresh] = p1.position.try_emplace(key, u32(p1.reps.size()));
        (void)it;
        if (fresh) p1.reps.push_back(r);
    };
    add({0, 1});
    for (u64 g : divisors(M)) {
        if (g == M) continue;
        for (u64 v = 0; v < M; ++v) {
            auto r = p1_normalize(M, i64(g), i64(v));
            if (r.first == 0 && r.second == 0) continue;
            add(r);
        }
    }
    return p1;
}

// ---------------------------------------------------------------------------
// Determinant-ell integer matrices for the Hecke action
// ---------------------------------------------------------------------------

/** All [a b; c d] with det = ell, a > b >= 0, d > c >= 0. */
inline std::vector<std::array<i64, 4>> heilbronn_merel(u64 ell) {
    if (ell < 2) throw std::invalid_argument("heilbronn_merel: ell must be at least 2");
    std::vector<std::array<i64, 4>> out;
    const i64 L = i64(ell);
    for (i64 a = 1; a <= L; ++a)
        for (i64 b = 0; b < a; ++b)
            for (i64 c = 0; c <= L; ++c) {
                i64 num = L + b * c;
                if (num % a != 0) continue;
                i64 d = num / a;
                if (d > c) out.push_back({a, b, c, d});
            }
    return out;
}

// ---------------------------------------------------------------------------
// The space itself: symbols modulo the two- and three-term relations
// ---------------------------------------------------------------------------

struct ModularSymbolSpace {
    u64 M = 0, p = 0;
    LevelShape shape;
    P1Line p1;
    std::vector<u32> basis_symbols;  // the free generator symbol behind each coordinate
    FpMatrix to_basis;               // row i = expansion of symbol i over the basis
};

inline ModularSymbolSpace build_space(u64 M, u64 p) {
    if (p < 5 || !is_prime(p))
        throw std::invalid_argument("build_space: the coefficient prime must be a prime at least 5");
    LevelShape shape = level_shape(M);
    if (M % p == 0)
        throw std::invalid_argument("build_space: the coefficient prime must not divide the level");
    if (shape.dim > kDimensionCap)
        throw dimension_cap_error("build_space: dimension " + std::to_string(shape.dim) +
                                  " at level " + std::to_string(M) + " exceeds the cap of " +
                                  std::to_string(kDimensionCap));

    ModularSymbolSpace sp;
    sp.M = M;
    sp.p = p;
    sp.shape = shape;
    sp.p1 = build_p1(M);
    const u32 nsym = u32(sp.p1.reps.size());
    if (nsym != shape.mu)
        throw std::logic_error("build_space: projective line size disagrees with the closed form");
    constexpr u32 npos = P1Line::npos;

    // Two-term relations x + x|sigma = 0 with sigma(c:d) = (d:-c): symbols
    // pair off (the partner carries coefficient -1); fixed symbols vanish
    // because 2 is invertible.
    std::vector<u32> rep(nsym, npos);
    std::vector<std::uint16_t> sgn(nsym, 0);
    std::vector<char> paired(nsym, 0);
    std::vector<u32> generators;
    for (u32 i = 0; i < nsym; ++i) {
        if (paired[i]) continue;
        auto [c, d] = sp.p1.reps[i];
        u32 j = sp.p1.index(i64(d), -i64(c));
        if (j == npos) throw std::logic_error("build_space: sigma image left the projective line");
        if (j == i) {
            paired[i] = 1;  // sgn stays 0: the symbol is zero in the quotient
            continue;
        }
        paired[i] = 1;
        paired[j] = 1;
        rep[i] = i;
        sgn[i] = 1;
        rep[j] = i;
        sgn[j] = std::uint16_t(p - 1);
        generators.push_back(i);
    }
    const u32 ngen = u32(generators.size());
    std::vector<u32> col_of(nsym, npos);
    for (u32 k = 0; k < ngen; ++k) col_of[generators[k]] = k;

    // Three-term relations x + x|tau + x|tau^2 = 0 with tau(c:d) = (d:-c-d),
    // one row per tau-orbit, written over the generator columns.
    using SparseRow = std::vector<std::pair<u32, std::uint16_t>>;
    std::vector<SparseRow> rows;
    std::vector<char> seen(nsym, 0);
    for (u32 i = 0; i < nsym; ++i) {
        if (seen[i]) continue;
        auto [c, d] = sp.p1.reps[i];
        u32 j = sp.p1.index(i64(d), -i64(c) - i64(d));
        u32 k = sp.p1.index(-i64(c) - i64(d), i64(c));
        if (j == npos || k == npos)
            throw std::logic_error("build_space: tau image left the projective line");
        seen[i] = 1;
        seen[j] = 1;
        seen[k] = 1;
        SparseRow row;
        for (u32 m : {i, j, k}) {
            if (sgn[m] == 0) continue;
            u32 col = col_of[rep[m]];
            bool merged = false;
            for (auto& e : row)
                if (e.first == col) {
                    e.second = std::uint16_t((e.second + sgn[m]) % p);
                    merged = true;
                    break;
                }
            if (!merged) row.push_back({col, sgn[m]});
        }
        row.erase(std::remove_if(row.begin(), row.end(),
                                 [](const std::pair<u32, std::uint16_t>& e) { return e.second == 0; }),
                  row.end());
        std::sort(row.begin(), row.end());
        if (!row.empty()) rows.push_back(std::move(row));
    }

    // Sparse elimination. Each generator column lies in at most two rows
    // (its symbol and the sigma-partner each belong to one tau-orbit), and
    // solving a row for its smallest column preserves that bound, so the
    // whole elimination touches each coefficient a bounded number of times.
    std::vector<std::array<u32, 2>> occ(ngen, std::array<u32, 2>{npos, npos});
    auto occ_add = [&](u32 col, u32 row_id) {
        auto& o = occ[col];
        if (o[0] == npos)
            o[0] = row_id;
        else if (o[1] == npos)
            o[1] = row_id;
        else
            throw std::logic_error("build_space: a generator column entered a third relation row");
    };
    auto occ_remove = [&](u32 col, u32 row_id) {
        auto& o = occ[col];
        if (o[0] == row_id)
            o[0] = npos;
        else if (o[1] == row_id)
            o[1] = npos;
    };
    for (u32 r = 0; r < u32(rows.size()); ++r)
        for (auto& e : rows[r]) occ_add(e.first, r);

    std::vector<char> solved(ngen, 0);
    std::vector<SparseRow> expr_of(ngen);  // solved column = sum of these terms
    std::vector<u32> solved_order;
    solved_order.reserve(ngen);

    for (u32 r = 0; r < u32(rows.size()); ++r) {
        SparseRow row = std::move(rows[r]);
        rows[r].clear();
        if (row.empty()) continue;
        const u32 piv = row.front().first;
        const u64 inv = invmod(row.front().second, p);
        SparseRow expr;
        expr.reserve(row.size() - 1);
        for (std::size_t t = 1; t < row.size(); ++t)
            expr.push_back({row[t].first, std::uint16_t((p - row[t].second) * inv % p)});
        for (auto& e : row) occ_remove(e.first, r);
        const u32 other = occ[piv][0] != npos ? occ[piv][0] : occ[piv][1];
        solved[piv] = 1;
        solved_order.push_back(piv);
        expr_of[piv] = expr;
        if (other == npos) continue;

        // Substitute the solved column into the one remaining row holding it.
        SparseRow& target = rows[other];
        u64 f = 0;
        SparseRow rest;
        rest.reserve(target.size() + expr.size());
        for (auto& e : target) {
            if (e.first == piv)
                f = e.second;
            else
                rest.push_back(e);
        }
        if (f == 0) throw std::logic_error("build_space: column occupancy out of sync");
        SparseRow mergedRow;
        mergedRow.reserve(rest.size() + expr.size());
        std::size_t a = 0, b = 0;
        while (a < rest.size() || b < expr.size()) {
            if (b == expr.size() || (a < rest.size() && rest[a].first < expr[b].first)) {
                mergedRow.push_back(rest[a++]);
            } else if (a == rest.size() || expr[b].first < rest[a].first) {
                mergedRow.push_back({expr[b].first, std::uint16_t(f * expr[b].second % p)});
                ++b;
            } else {
                u64 val = (rest[a].second + f * expr[b].second) % p;
                if (val) mergedRow.push_back({rest[a].first, std::uint16_t(val)});
                ++a;
                ++b;
            }
        }
        for (auto& e : target) occ_remove(e.first, other);
        target = std::move(mergedRow);
        for (auto& e : target) occ_add(e.first, other);
    }

    // Free columns are the basis; the count must match the closed form.
    std::vector<u32> basis_index(ngen, npos);
    std::vector<u32> free_cols;
    for (u32 c = 0; c < ngen; ++c)
        if (!solved[c]) {
            basis_index[c] = u32(free_cols.size());
            free_cols.push_back(c);
        }
    const std::size_t dim = free_cols.size();
    if (dim != shape.dim)
        throw std::logic_error("build_space: elimination left " + std::to_string(dim) +
                               " free generators but the closed form says " +
                               std::to_string(shape.dim));

    // Back-substitute in reverse: every term of a solved column's expression
    // is either free or was solved later, so one reverse pass resolves all.
    std::vector<u32> slot(ngen, npos);
    for (u32 s = 0; s < u32(solved_order.size()); ++s) slot[solved_order[s]] = s;
    FpMatrix resolved(solved_order.size(), dim, p);
    std::vector<u64> acc(dim);
    for (auto it = solved_order.rbegin(); it != solved_order.rend(); ++it) {
        const u32 colv = *it;
        std::fill(acc.begin(), acc.end(), 0);
        for (auto& [c, coef] : expr_of[colv]) {
            if (basis_index[c] != npos) {
                acc[basis_index[c]] += coef;
            } else {
                const std::uint16_t* src = resolved.row(slot[c]);
                for (std::size_t k = 0; k < dim; ++k) acc[k] += u64(coef) * src[k];
            }
        }
        std::uint16_t* dst = resolved.row(slot[colv]);
        for (std::size_t k = 0; k < dim; ++k) dst[k] = std::uint16_t(acc[k] % p);
    }

    sp.basis_symbols.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) sp.basis_symbols[k] = generators[free_cols[k]];
    sp.to_basis = FpMatrix(nsym, dim, p);
    for (u32 i = 0; i < nsym; ++i) {
        if (sgn[i] == 0) continue;
        const u32 col = col_of[rep[i]];
        std::uint16_t* dst = sp.to_basis.row(i);
        if (basis_index[col] != npos) {
            dst[basis_index[col]] = sgn[i];
        } else if (sgn[i] == 1) {
            const std::uint16_t* src = resolved.row(slot[col]);
            std::copy(src, src + dim, dst);
        } else {
            const std::uint16_t* src = resolved.row(slot[col]);
            for (std::size_t k = 0; k < dim; ++k)
                dst[k] = src[k] ? std::uint16_t(p - src[k]) : 0;
        }
    }
    return sp;
}

// ---------------------------------------------------------------------------
// Star involution and the boundary map to cusps
// ---------------------------------------------------------------------------

inline FpMatrix star_matrix(const ModularSymbolSpace& sp) {
    const std::size_t dim = sp.to_basis.cols;
    FpMatrix s(dim, dim, sp.p);
    for (std::size_t j = 0; j < dim; ++j) {
        auto [c, d] = sp.p1.reps[sp.basis_symbols[j]];
        u32 img = sp.p1.index(-i64(c), i64(d));
        if (img == P1Line::npos) throw std::logic_error("star image left the projective line");
        std::copy(sp.to_basis.row(img), sp.to_basis.row(img) + dim, s.row(j));
    }
    return s;
}

/**
 * Completion of the coprime pair (c, d) mod M to an integer matrix
 * [[a, b], [c, d']] of determinant one with d' = d mod M.
 */
inline std::array<i64, 4> sl2_lift(u64 M, u64 cu, u64 du) {
    i64 c = i64(cu), d = i64(du);
    u64 guard = 0;
    while (std::gcd(c, d) != 1) {
        d += i64(M);
        if (++guard > M + 2) throw std::logic_error("sl2_lift: failed to reach a coprime pair");
    }
    i64 x = 0, y = 0;
    egcd(d, c, x, y);  // x d + y c = 1
    return {x, -y, c, d};
}

/** Gamma_0(M)-equivalence of the cusps a1/c1 and a2/c2 (fractions in lowest terms). */
inline bool cusps_equivalent(u64 M, i64 a1, i64 c1, i64 a2, i64 c2) {
    auto s_of = [](i64 a, i64 c) -> i64 {
        if (c == 0) return a;  // a is +-1
        if (c == 1) return 0;
        i64 am = ((a % c) + c) % c;
        return i64(invmod(u64(am), u64(c)));
    };
    const i64 s1 = s_of(a1, c1);
    const i64 s2 = s_of(a2, c2);
    const u64 g = gcd_u64(u64(c1) * u64(c2), M);
    const i64 gi = i64(g);
    i64 diff = s1 * c2 - s2 * c1;
    return ((diff % gi) + gi) % gi == 0;
}

/**
 * Matrix of the boundary map in basis coordinates: row j lists the cusp
 * classes hit by the two endpoints of basis symbol j (+1 and -1). Cusp
 * classes are discovered on the fly and their count is checked against the
 * closed form.
 */
inline FpMatrix boundary_matrix(const ModularSymbolSpace& sp) {
    const std::size_t dim = sp.to_basis.cols;
    std::vector<std::pair<i64, i64>> classes;  // canonical (numerator, denominator >= 0)
    auto class_of = [&](i64 a, i64 c) -> std::size_t {
        if (c < 0) {
            a = -a;
            c = -c;
        }
        if (c == 0) a = 1;
        for (std::size_t k = 0; k < classes.size(); ++k)
            if (cusps_equivalent(sp.M, a, c, classes[k].first, classes[k].second)) return k;
        classes.push_back({a, c});
        return classes.size() - 1;
    };
    std::vector<std::pair<std::size_t, std::size_t>> ends(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        auto [cu, du] = sp.p1.reps[sp.basis_symbols[j]];
        auto m = sl2_lift(sp.M, cu, du);
        ends[j] = {class_of(m[0], m[2]), class_of(m[1], m[3])};
    }
    if (classes.size() != sp.shape.ncusps)
        throw std::logic_error("boundary_matrix: found " + std::to_string(classes.size()) +
                               " cusp classes but the closed form says " +
                               std::to_string(sp.shape.ncusps));
    FpMatrix b(dim, classes.size(), sp.p);
    for (std::size_t j = 0; j < dim; ++j) {
        b.at(j, ends[j].first) = std::uint16_t(addmod(b.at(j, ends[j].first), 1, sp.p));
        b.at(j, ends[j].second) = std::uint16_t(addmod(b.at(j, ends[j].second), sp.p - 1, sp.p));
    }
    return b;
}

// ---------------------------------------------------------------------------
// Cuspidal star eigenspaces and Hecke operators
// ---------------------------------------------------------------------------

struct Subspace {
    FpMatrix basis;           // reduced-echelon rows spanning the subspace
    std::vector<u32> pivots;  // pivot columns of that basis
};

inline Subspace star_eigen_cuspidal(const ModularSymbolSpace& sp, bool plus_part) {
    FpMatrix s = star_matrix(sp);
    for (std::size_t i = 0; i < s.rows; ++i)
        s.at(i, i) = std::uint16_t(plus_part ? submod(s.at(i, i), 1, sp.p)
                                             : addmod(s.at(i, i), 1, sp.p));
    FpMatrix joint = hstack(s, boundary_matrix(sp));
    FpMatrix w = left_kernel(joint);
    std::vector<u32> piv = rref_in_place(w);
    if (w.rows != sp.shape.genus)
        throw std::logic_error("cuspidal star eigenspace dimension disagrees with the genus");
    return Subspace{std::move(w), std::move(piv)};
}

inline Subspace plus_cuspidal_subspace(const ModularSymbolSpace& sp) {
    return star_eigen_cuspidal(sp, true);
}

inline Subspace minus_cuspidal_subspace(const ModularSymbolSpace& sp) {
    return star_eigen_cuspidal(sp, false);
}

inline FpMatrix hecke_matrix(const ModularSymbolSpace& sp, u64 ell) {
    if (ell == 0 || sp.M % ell == 0)
        throw std::invalid_argument("hecke_matrix: ell must be nonzero and prime to the level");
    const auto mats = heilbronn_merel(ell);
    const std::size_t dim = sp.to_basis.cols;
    FpMatrix t(dim, dim, sp.p);
    std::vector<u64> acc(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        auto [c, d] = sp.p1.reps[sp.basis_symbols[j]];
        std::fill(acc.begin(), acc.end(), 0);
        for (const auto& h : mats) {
            u32 img = sp.p1.index(i64(c) * h[0] + i64(d) * h[2], i64(c) * h[1] + i64(d) * h[3]);
            if (img == P1Line::npos) continue;  // image not a point: the term drops
            const std::uint16_t* src = sp.to_basis.row(img);
            for (std::size_t k = 0; k < dim; ++k) acc[k] += src[k];
        }
        std::uint16_t* dst = t.row(j);
        for (std::size_t k = 0; k < dim; ++k) dst[k] = std::uint16_t(acc[k] % sp.p);
    }
    return t;
}

/**
 * Matrix of T_ell acting on the given star-eigenspace, in the coordinates of
 * its echelon basis. The action is audited: the image rows must lie back in
 * the subspace (checked exactly when it is small, on sampled rows when
 * large), since a non-invariant subspace would silently corrupt everything
 * downstream. Results are cached on disk when a cache directory is given.
 */
inline FpMatrix restricted_hecke(const ModularSymbolSpace& sp, const Subspace& sub, u64 ell,
                                 const std::string& cache_dir = "") {
    const u64 fingerprint =
        fnv1a64(sub.basis.a.data(), sub.basis.a.size() * sizeof(std::uint16_t));
    const std::string key = "restricted-hecke:v1:M=" + std::to_string(sp.M) +
                            ":p=" + std::to_string(sp.p) + ":ell=" + std::to_string(ell) +
                            ":rows=" + std::to_string(sub.basis.rows) +
                            ":basis=" + hex16(fingerprint);
    if (!cache_dir.empty()) {
        FpMatrix cached;
        if (cache_load_matrix(cache_dir, key, sp.M, sp.p, cached) &&
            cached.rows == sub.basis.rows)
            return cached;
    }

    FpMatrix t = hecke_matrix(sp, ell);
    FpMatrix u = fp_mul(sub.basis, t);
    FpMatrix b = select_columns(u, sub.pivots);

    const std::size_t k = u.rows;
    std::vector<std::size_t> check_rows;
    if (k <= 512) {
        check_rows.resize(k);
        std::iota(check_rows.begin(), check_rows.end(), std::size_t(0));
    } else {
        for (std::size_t i = 0; i < 32; ++i) check_rows.push_back(i * k / 32);
    }
    std::vector<u64> acc(sub.basis.cols);
    for (std::size_t r : check_rows) {
        std::fill(acc.begin(), acc.end(), 0);
        for (std::size_t j = 0; j < k; ++j) {
            u64 w = b.at(r, j);
            if (w == 0) continue;
            const std::uint16_t* src = sub.basis.row(j);
            for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += w * src[c];
        }
        const std::uint16_t* urow = u.row(r);
        for (std::size_t c = 0; c < acc.size(); ++c)
            if (acc[c] % sp.p != urow[c])
                throw std::logic_error("hecke operator does not preserve the star eigenspace");
    }

    if (!cache_dir.empty()) cache_store_matrix(cache_dir, key, sp.M, sp.p, b);
    return b;
}

// ---------------------------------------------------------------------------
// The generalized eigenspace where every T_ell acts as ell + 1
// ---------------------------------------------------------------------------

struct GenEigenResult {
    u64 dim = 0;
    bool stabilized = false;
    std::vector<u64> primes_used;
    FpMatrix coords;  // rows express the eigenspace in the subspace's coordinates
};

/**
 * Iteratively intersect, over the primes in the budget (skipping divisors of
 * the level), the generalized eigenspaces of T_ell - (ell + 1) on the given
 * subspace. Stops once two consecutive primes bring no further cut, or once
 * the space is empty; `stabilized` records whether that happened inside the
 * budget. One no-drop prime is not enough: a single operator can fail to
 * cut by accident (observed at level 71^2 mod 5, where T_3 adds nothing to
 * T_2 yet T_5 and T_7 shrink the space further).
 */
inline GenEigenResult eisenstein_generalized_eigenspace(
    const ModularSymbolSpace& sp, const Subspace& sub,
    const std::vector<u64>& budget = kDefaultHeckeBudget, const std::string& cache_dir = "") {
    const u64 p = sp.p;
    const std::size_t g = sub.basis.rows;
    GenEigenResult res;
    FpMatrix v = FpMatrix::identity(g, p);
    std::vector<u32> vpiv(g);
    std::iota(vpiv.begin(), vpiv.end(), u32(0));
    u64 last = g;
    unsigned no_drop_streak = 0;
    for (u64 ell : budget) {
        if (sp.M % ell == 0) continue;
        FpMatrix a = restricted_hecke(sp, sub, ell, cache_dir);
        const u64 shift = (ell + 1) % p;
        for (std::size_t i = 0; i < g; ++i)
            a.at(i, i) = std::uint16_t(submod(a.at(i, i), shift, p));
        FpMatrix bv;
        if (v.rows == g) {
            bv = a;  // the running space is still everything, so v is the identity
        } else {
            FpMatrix u = fp_mul(v, a);
            bv = select_columns(u, vpiv);
            if (fp_mul(bv, v) != u)
                throw std::logic_error("hecke operator does not preserve the running eigenspace");
        }
        FpMatrix grown = iterated_kernel(bv);
        FpMatrix nv = fp_mul(grown, v);
        vpiv = rref_in_place(nv);
        v = std::move(nv);
        res.primes_used.push_back(ell);
        const u64 d = v.rows;
        no_drop_streak = (d == last) ? no_drop_streak + 1 : 0;
        last = d;
        if (no_drop_streak >= 2 || d == 0) {
            res.stabilized = true;
            break;
        }
    }
    res.dim = v.rows;
    res.coords = std::move(v);
    return res;
}

/**
 * The rank: one more than the dimension of the generalized (ell + 1)-
 * eigenspace on the plus cuspidal part at prime level N. The minus part is
 * computed as well and must agree — a disagreement means a bug, not data.
 */
struct RankResult {
    u64 r = 0;
    bool stabilized = false;  // both chains settled inside the budget
    std::vector<u64> primes_used;
};

inline RankResult eisenstein_rank_detailed(u64 N, u64 p, const std::string& cache_dir = "",
                                           const std::vector<u64>& budget = kDefaultHeckeBudget) {
    if (!is_prime(N))
        throw std::invalid_argument("eisenstein_rank_detailed: the level must be prime");
    ModularSymbolSpace sp = build_space(N, p);
    Subspace plus = plus_cuspidal_subspace(sp);
    GenEigenResult pe = eisenstein_generalized_eigenspace(sp, plus, budget, cache_dir);
    Subspace minus = minus_cuspidal_subspace(sp);
    GenEigenResult me = eisenstein_generalized_eigenspace(sp, minus, budget, cache_dir);
    if (pe.dim != me.dim)
        throw std::logic_error("plus and minus eisenstein eigenspaces have different dimensions");
    RankResult out;
    out.r = 1 + pe.dim;
    out.stabilized = pe.stabilized && me.stabilized;
    out.primes_used = std::move(pe.primes_used);
    return out;
}

inline u64 eisenstein_rank(u64 N, u64 p, const std::string& cache_dir = "",
                           const std::vector<u64>& budget = kDefaultHeckeBudget) {
    RankResult rr = eisenstein_rank_detailed(N, p, cache_dir, budget);
    if (!rr.stabilized)
        throw stabilization_error(
            "eisenstein_rank: eigenspace still shrinking after the prime budget");
    return rr.r;
}

// ---------------------------------------------------------------------------
// Old/new split of the eigenspace at the squared level
// ---------------------------------------------------------------------------

struct LevelSquareDims {
    u64 dim_total = 0;  // generalized eigenspace dimension at level N^2
    u64 dim_old = 0;    // contribution of level N, always 2*(r-1)
    u64 dim_new = 0;    // what is genuinely new at N^2
    u64 r = 0;          // the rank at level N
    bool stabilized = false;  // every chain settled inside the prime budget
    std::vector<u64> primes_used;
};

/**
 * With a deliberately small budget the chains may still be shrinking when the
 * primes run out; the end-of-budget dimensions are reported anyway (they are
 * upper bounds) with `stabilized` false, and the caller decides what that is
 * worth. The old/new counting identity holding across two levels computed
 * independently is itself strong evidence of convergence.
 */
inline LevelSquareDims level_square_dims(u64 N, u64 p,
                                         const std::vector<u64>& budget = kDefaultHeckeBudget,
                                         const std::string& cache_dir = "") {
    if (!is_prime(N)) throw std::invalid_argument("level_square_dims: the level must be prime");
    LevelSquareDims out;
    RankResult rank = eisenstein_rank_detailed(N, p, cache_dir, budget);
    out.r = rank.r;
    ModularSymbolSpace sp = build_space(N * N, p);
    Subspace plus = plus_cuspidal_subspace(sp);
    GenEigenResult ge = eisenstein_generalized_eigenspace(sp, plus, budget, cache_dir);
    out.stabilized = rank.stabilized && ge.stabilized;
    out.dim_total = ge.dim;
    out.dim_old = 2 * (out.r - 1);
    if (out.dim_total < out.dim_old)
        throw std::logic_error("old eisenstein part exceeds the total at the squared level");
    out.dim_new = out.dim_total - out.dim_old;
    out.primes_used = ge.primes_used;
    return out;
}

}  // namespace eisrank
