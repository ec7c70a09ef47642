#pragma once

// Dense linear algebra over F_p with 16-bit entries. Products accumulate in
// 64-bit words (a full 12000-term row of maximal entries stays below 2^63),
// and row reduction uses a multiply-high reduction instead of hardware
// division so the large echelon computations stay fast. Kernels are returned
// as row bases; iterated_kernel grows ker(B) to the full generalized
// eigenspace of eigenvalue zero by repeated preimages.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "eisrank/nt.hpp"

namespace eisrank {

/** Exact x mod p for x < 2^32 via Lemire's multiply-high trick (no div). */
struct FpReducer {
    u64 magic;  // floor(2^64 / p) + 1
    explicit FpReducer(u64 p) : magic(~u64(0) / p + 1) {}
    inline u32 mod(u64 x, u64 p) const {
        u64 low = magic * x;
        return u32((u128(low) * p) >> 64);
    }
};

struct FpMatrix {
    u64 p = 0;
    std::size_t rows = 0, cols = 0;
    std::vector<std::uint16_t> a;  // row-major

    FpMatrix() = default;
    FpMatrix(std::size_t r, std::size_t c, u64 modulus)
        : p(modulus), rows(r), cols(c) {
        if (modulus < 2 || modulus > 65535)
            throw std::invalid_argument("FpMatrix: modulus must be between 2 and 65535");
        a.assign(r * c, 0);
    }

    std::uint16_t& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    std::uint16_t at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
    std::uint16_t* row(std::size_t r) { return a.data() + r * cols; }
    const std::uint16_t* row(std::size_t r) const { return a.data() + r * cols; }

    static FpMatrix identity(std::size_t n, u64 modulus) {
        FpMatrix m(n, n, modulus);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    bool operator==(const FpMatrix&) const = default;
};

inline void require_same_modulus(const FpMatrix& x, const FpMatrix& y, const char* who) {
    if (x.p != y.p) throw std::invalid_argument(std::string(who) + ": mixed moduli");
}

inline FpMatrix fp_mul(const FpMatrix& x, const FpMatrix& y) {
    require_same_modulus(x, y, "fp_mul");
    if (x.cols != y.rows) throw std::invalid_argument("fp_mul: inner dimensions disagree");
    FpMatrix r(x.rows, y.cols, x.p);
    std::vector<u64> acc(y.cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::fill(acc.begin(), acc.end(), 0);
        const std::uint16_t* xrow = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) {
            u64 w = xrow[j];
            if (w == 0) continue;
            const std::uint16_t* yrow = y.row(j);
            for (std::size_t c = 0; c < y.cols; ++c) acc[c] += w * yrow[c];
        }
        std::uint16_t* rrow = r.row(i);
        for (std::size_t c = 0; c < y.cols; ++c) rrow[c] = std::uint16_t(acc[c] % x.p);
    }
    return r;
}

inline FpMatrix transpose(const FpMatrix& m) {
    FpMatrix t(m.cols, m.rows, m.p);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
    return t;
}

inline FpMatrix hstack(const FpMatrix& x, const FpMatrix& y) {
    require_same_modulus(x, y, "hstack");
    if (x.rows != y.rows) throw std::invalid_argument("hstack: row counts disagree");
    FpMatrix r(x.rows, x.cols + y.cols, x.p);
    for (std::size_t i = 0; i < x.rows; ++i) {
        std::copy(x.row(i), x.row(i) + x.cols, r.row(i));
        std::copy(y.row(i), y.row(i) + y.cols, r.row(i) + x.cols);
    }
    return r;
}

inline FpMatrix vstack(const FpMatrix& x, const FpMatrix& y) {
    require_same_modulus(x, y, "vstack");
    if (x.cols != y.cols) throw std::invalid_argument("vstack: column counts disagree");
    FpMatrix r(x.rows + y.rows, x.cols, x.p);
    std::copy(x.a.begin(), x.a.end(), r.a.begin());
    std::copy(y.a.begin(), y.a.end(), r.a.begin() + std::ptrdiff_t(x.a.size()));
    return r;
}

/** New matrix holding the given columns of m, in the given order. */
inline FpMatrix select_columns(const FpMatrix& m, const std::vector<u32>& cols) {
    for (u32 c : cols)
        if (c >= m.cols) throw std::invalid_argument("select_columns: column out of range");
    FpMatrix r(m.rows, cols.size(), m.p);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = 0; k < cols.size(); ++k) r.at(i, k) = m.at(i, cols[k]);
    return r;
}

/**
 * In-place reduced row echelon form. Returns the pivot columns in increasing
 * order and trims the matrix to its nonzero rows, so on return m.rows is the
 * rank and m restricted to the pivot columns is the identity.
 */
inline std::vector<u32> rref_in_place(FpMatrix& m) {
    const u64 p = m.p;
    const FpReducer red(p);
    std::vector<u32> pivots;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < m.cols && rank < m.rows; ++col) {
        std::size_t sel = rank;
        while (sel < m.rows && m.at(sel, col) == 0) ++sel;
        if (sel == m.rows) continue;
        if (sel != rank) std::swap_ranges(m.row(sel), m.row(sel) + m.cols, m.row(rank));
        std::uint16_t* prow = m.row(rank);
        if (prow[col] != 1) {
            u64 inv = invmod(prow[col], p);
            for (std::size_t c = col; c < m.cols; ++c)
                prow[c] = std::uint16_t(red.mod(inv * prow[c], p));
        }
        for (std::size_t r2 = 0; r2 < m.rows; ++r2) {
            if (r2 == rank) continue;
            u64 f = m.at(r2, col);
            if (f == 0) continue;
            u64 g = p - f;
            std::uint16_t* rrow = m.row(r2);
            for (std::size_t c = col; c < m.cols; ++c)
                rrow[c] = std::uint16_t(red.mod(rrow[c] + g * prow[c], p));
        }
        pivots.push_back(u32(col));
        ++rank;
    }
    m.rows = rank;
    m.a.resize(rank * m.cols);
    return pivots;
}

/** Row basis of {v : m v^T = 0}, one row per non-pivot column of m. */
inline FpMatrix right_kernel(FpMatrix m) {
    std::vector<u32> pivots = rref_in_place(m);
    std::vector<char> is_pivot(m.cols, 0);
    for (u32 c : pivots) is_pivot[c] = 1;
    FpMatrix k(m.cols - pivots.size(), m.cols, m.p);
    std::size_t r = 0;
    for (std::size_t f = 0; f < m.cols; ++f) {
        if (is_pivot[f]) continue;
        k.at(r, f) = 1;
        for (std::size_t i = 0; i < pivots.size(); ++i) {
            std::uint16_t v = m.at(i, f);
            if (v) k.at(r, pivots[i]) = std::uint16_t(m.p - v);
        }
        ++r;
    }
    return k;
}

/** Row basis of {v : v m = 0}. */
inline FpMatrix left_kernel(const FpMatrix& m) { return right_kernel(transpose(m)); }

/**
 * Row basis (in reduced echelon form) of the union of ker(B^k) over all k,
 * i.e. the generalized eigenspace of eigenvalue zero of the square matrix B.
 * Each pass replaces the current space K by the preimage {x : x B in span K},
 * which strictly grows until it stabilizes.
 */
inline FpMatrix iterated_kernel(const FpMatrix& b) {
    if (b.rows != b.cols) throw std::invalid_argument("iterated_kernel: matrix must be square");
    FpMatrix k = left_kernel(b);
    rref_in_place(k);
    for (;;) {
        if (k.rows == 0 || k.rows == b.rows) return k;
        FpMatrix stacked = vstack(b, k);
        FpMatrix w = left_kernel(stacked);
        // The x-parts of (x | y) with x B + y K = 0 span the preimage of
        // span(K); they are independent because K has independent rows.
        FpMatrix x(w.rows, b.rows, b.p);
        for (std::size_t r = 0; r < w.rows; ++r)
            std::copy(w.row(r), w.row(r) + b.rows, x.row(r));
        rref_in_place(x);
        if (x.rows == k.rows) return k;
        k = std::move(x);
    }
}

}  // namespace eisrank
