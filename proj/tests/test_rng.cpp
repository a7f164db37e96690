#include <doctest.h>

#include <cmath>

#include "hyperhead/rng.hpp"

using namespace hyperhead;

TEST_CASE("seeded_normal is deterministic") {
    const Matrix a = seeded_normal(42, 8, 8, 0.02);
    const Matrix b = seeded_normal(42, 8, 8, 0.02);
    CHECK(max_abs_diff(a, b) == 0.0);
    const Matrix c = seeded_normal(43, 8, 8, 0.02);
    CHECK(max_abs_diff(a, c) > 0.0);
}

TEST_CASE("zero std gives the zero matrix") {
    CHECK(max_abs(seeded_normal(42, 5, 5, 0.0)) == 0.0);
}

TEST_CASE("sample statistics at 200x200") {
    const Matrix m = seeded_normal(42, 200, 200, 0.02);
    double mean = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) mean += m.data()[i];
    mean /= static_cast<double>(m.size());
    CHECK(std::abs(mean) < 5.0 * 0.02 / 200.0); // 5 std / sqrt(rows*cols)
    double var = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        var += (m.data()[i] - mean) * (m.data()[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(m.size() - 1));
    CHECK(sd > 0.019);
    CHECK(sd < 0.021);
}

TEST_CASE("uniform draws stay in range") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(rng.next_below(13) < 13);
    }
}
