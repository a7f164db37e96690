#include <doctest.h>

#include "hyperhead/blocked.hpp"
#include "hyperhead/labels.hpp"
#include "hyperhead/verify.hpp"

using namespace hyperhead;

TEST_CASE("to_offset right-aligns each causal prefix") {
    // T = 3, block of all three rows
    Matrix left(3, 3, {1, 0, 0,
                       2, 3, 0,
                       4, 5, 6});
    const OffsetBlock off = to_offset(left, 0, 3);
    CHECK(off.m_rows == 3);
    // row 0: prefix of length 1 lands at the last column
    CHECK(off.data(0, 0) == 0.0);
    CHECK(off.data(0, 1) == 0.0);
    CHECK(off.data(0, 2) == 1.0);
    // row 1: [2,3,.] -> [0,2,3]
    CHECK(off.data(1, 0) == 0.0);
    CHECK(off.data(1, 1) == 2.0);
    CHECK(off.data(1, 2) == 3.0);
    // last row is unchanged (already right-aligned)
    CHECK(off.data(2, 0) == 4.0);
    CHECK(off.data(2, 1) == 5.0);
    CHECK(off.data(2, 2) == 6.0);
    // diagonal element always sits at the last column
    for (std::size_t r = 0; r < 3; ++r) CHECK(off.data(r, 2) == left(r, r));
}

TEST_CASE("offset roundtrip is exact and clears the acausal region") {
    Rng rng(1);
    const std::size_t T = 17;
    for (std::size_t row_start : {std::size_t{0}, std::size_t{5}, std::size_t{12}}) {
        const std::size_t M = std::min<std::size_t>(6, T - row_start);
        Matrix left = rng.normal_matrix(M, T, 1.0);
        // zero the acausal part so the roundtrip is the identity
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = row_start + m + 1; c < T; ++c) left(m, c) = 0.0;
        const Matrix back = from_offset(to_offset(left, row_start, T));
        CHECK(max_abs_diff(back, left) == 0.0);
    }
    // from_offset zeroes whatever leaked past the diagonal
    OffsetBlock junk = to_offset(Matrix(2, 4), 0, 4);
    junk.data = rng.normal_matrix(2, 4, 1.0);
    const Matrix cleaned = from_offset(junk);
    CHECK(cleaned(0, 1) == 0.0);
    CHECK(cleaned(0, 2) == 0.0);
    CHECK(cleaned(0, 3) == 0.0);
    CHECK(cleaned(1, 2) == 0.0);
}

TEST_CASE("to_offset validates block bounds") {
    CHECK_THROWS_AS(to_offset(Matrix(2, 4), 3, 4), DimensionError);  // rows overflow T
    CHECK_THROWS_AS(to_offset(Matrix(2, 3), 0, 4), DimensionError);  // cols != T
}

TEST_CASE("blocked forward matches the serial reference at degenerate block sizes") {
    Rng rng(2);
    for (int trial = 0; trial < 8; ++trial) {
        const HeadConfig c = sample_config(rng, ConfigSampler{});
        const std::size_t T = 5 + rng.next_below(12);
        std::vector<HeadParams> heads;
        for (std::size_t h = 0; h < c.n_head; ++h) heads.push_back(sample_params(rng, c, T));
        const Matrix seq = rng.normal_matrix(T, c.d, 1.0);
        const Matrix ref = seq_forward(seq, heads, c);
        const double denom = max_abs(ref) + 1e-30;
        CHECK(max_abs_diff(blocked_seq_forward(seq, heads, c, T), ref) / denom < 1e-12);
        CHECK(max_abs_diff(blocked_seq_forward(seq, heads, c, 1), ref) / denom < 1e-12);
        CHECK(max_abs_diff(blocked_seq_forward(seq, heads, c, 3), ref) / denom < 1e-12);
    }
}

TEST_CASE("blocked forward matches the serial reference on the full feature set") {
    Rng rng(3);
    const HeadConfig c = to_config(parse_label("G-pcg-q-12o"), 32, 2, 4);
    const std::size_t T = 96;
    std::vector<HeadParams> heads;
    for (std::size_t h = 0; h < c.n_head; ++h) heads.push_back(sample_params(rng, c, T));
    const Matrix seq = rng.normal_matrix(T, c.d, 1.0);
    const Matrix ref = seq_forward(seq, heads, c);
    CHECK(max_abs_diff(blocked_seq_forward(seq, heads, c, 32), ref) / (max_abs(ref) + 1e-30) <
          1e-12);
}

TEST_CASE("the poison hook breaks the layout and reset restores it") {
    Matrix left(1, 4, {1, 2, 3, 4});
    const OffsetBlock clean = to_offset(left, 3, 4);
    set_blocked_poison(true);
    const OffsetBlock bad = to_offset(left, 3, 4);
    set_blocked_poison(false);
    CHECK(max_abs_diff(clean.data, bad.data) > 0.0);
    CHECK(max_abs_diff(to_offset(left, 3, 4).data, clean.data) == 0.0);
}
