// Dense matrices over F_p with 16-bit entries: products, reduced row
// echelon form, left/right kernels, and the iterated kernel that computes
// the generalized eigenspace of eigenvalue zero.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "eisrank/fp_linalg.hpp"

using namespace eisrank;

namespace {

FpMatrix from_rows(u64 p, std::vector<std::vector<int>> rows) {
    FpMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size(), p);
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) {
            int v = rows[r][c] % int(p);
            if (v < 0) v += int(p);
            m.at(r, c) = uint16_t(v);
        }
    return m;
}

}  // namespace

TEST_CASE("matrix product reduces mod p") {
    FpMatrix a = from_rows(5, {{1, 2}, {3, 4}});
    FpMatrix b = from_rows(5, {{2, 0}, {1, 3}});
    FpMatrix ab = fp_mul(a, b);
    CHECK(ab == from_rows(5, {{4, 1}, {0, 2}}));  // [[4,6],[10,12]] mod 5

    FpMatrix id = FpMatrix::identity(2, 5);
    CHECK(fp_mul(a, id) == a);
    CHECK(fp_mul(id, a) == a);

    // Accumulation uses 64-bit sums: a long row of maximal entries must not wrap.
    u64 q = 9973;
    FpMatrix ones(1, 12000, q), col(12000, 1, q);
    for (size_t j = 0; j < 12000; ++j) {
        ones.at(0, j) = uint16_t(q - 1);
        col.at(j, 0) = uint16_t(q - 1);
    }
    FpMatrix dot = fp_mul(ones, col);
    CHECK(dot.at(0, 0) == uint16_t((12000 * ((q - 1) * (q - 1) % q)) % q));
}

TEST_CASE("rref produces unit pivots in increasing columns") {
    FpMatrix m = from_rows(5, {{0, 2, 1}, {0, 4, 2}, {3, 1, 0}});
    std::vector<u32> piv = rref_in_place(m);
    REQUIRE(piv == std::vector<u32>{0, 1});
    REQUIRE(m.rows == 2);  // rank 2, zero rows trimmed
    // Pivot columns carry the identity.
    for (size_t r = 0; r < m.rows; ++r)
        for (size_t k = 0; k < piv.size(); ++k) CHECK(m.at(r, piv[k]) == (r == k ? 1 : 0));

    // Already-echelon input is untouched.
    FpMatrix e = from_rows(7, {{1, 0, 3}, {0, 1, 5}});
    FpMatrix e2 = e;
    rref_in_place(e2);
    CHECK(e2 == e);
}

TEST_CASE("right kernel times matrix vanishes") {
    FpMatrix m = from_rows(5, {{1, 2}, {2, 4}});
    FpMatrix k = right_kernel(m);
    REQUIRE(k.rows == 1);
    CHECK(k.cols == 2);
    // Kernel rows are vectors v with m v^T = 0; check by multiplying.
    FpMatrix prod = fp_mul(m, transpose(k));
    for (size_t r = 0; r < prod.rows; ++r)
        for (size_t c = 0; c < prod.cols; ++c) CHECK(prod.at(r, c) == 0);

    FpMatrix full = FpMatrix::identity(3, 7);
    CHECK(right_kernel(full).rows == 0);
}

TEST_CASE("left kernel rows annihilate from the left") {
    FpMatrix m = from_rows(5, {{1, 2, 0}, {2, 4, 0}, {0, 0, 1}});
    FpMatrix k = left_kernel(m);
    REQUIRE(k.rows == 1);
    REQUIRE(k.cols == 3);
    FpMatrix prod = fp_mul(k, m);
    for (size_t c = 0; c < prod.cols; ++c) CHECK(prod.at(0, c) == 0);

    // Random sanity: rank(kernel) + rank(m) == rows(m).
    std::mt19937_64 rng(20260819);
    for (int trial = 0; trial < 25; ++trial) {
        FpMatrix r(6, 4, 13);
        for (auto& x : r.a) x = uint16_t(rng() % 13);
        FpMatrix copy = r;
        size_t rank = rref_in_place(copy).size();
        CHECK(left_kernel(r).rows + rank == 6);
    }
}

TEST_CASE("hstack and vstack and column selection") {
    FpMatrix a = from_rows(5, {{1, 2}, {3, 4}});
    FpMatrix b = from_rows(5, {{0}, {1}});
    FpMatrix h = hstack(a, b);
    CHECK(h.cols == 3);
    CHECK(h.at(1, 2) == 1);
    FpMatrix v = vstack(a, from_rows(5, {{4, 4}}));
    CHECK(v.rows == 3);
    CHECK(v.at(2, 0) == 4);
    FpMatrix sel = select_columns(h, {2, 0});
    CHECK(sel == from_rows(5, {{0, 1}, {1, 3}}));
}

TEST_CASE("iterated kernel finds the full generalized eigenspace of zero") {
    // Jordan block J_2(0) plus an invertible part: generalized eigenspace has
    // dimension 2 even though ker itself has dimension 1.
    FpMatrix b = from_rows(5, {{0, 1, 0}, {0, 0, 0}, {0, 0, 3}});
    FpMatrix g = iterated_kernel(b);
    REQUIRE(g.rows == 2);
    CHECK(g == from_rows(5, {{1, 0, 0}, {0, 1, 0}}));

    // Nilpotent full block: everything.
    FpMatrix n = from_rows(7, {{0, 1}, {0, 0}});
    CHECK(iterated_kernel(n).rows == 2);

    // Invertible: nothing.
    FpMatrix inv = from_rows(7, {{2, 1}, {1, 1}});
    CHECK(iterated_kernel(inv).rows == 0);
}

TEST_CASE("matrices reject moduli that do not fit sixteen bits") {
    CHECK_THROWS_AS(FpMatrix(2, 2, 65536), std::invalid_argument);
    CHECK_NOTHROW(FpMatrix(2, 2, 65521));
}
