#pragma once

#include <cstdint>

#include "hyperhead/matrix.hpp"
#include "hyperhead/rng.hpp"

namespace hyperhead {

// Input-conditioned diagonal-plus-low-rank mixing operator over a lag-ordered
// prefix of length t <= L_max:
//   R(x) = (I + Diag(p_{1:t})) + A_{1:t} Diag(s(x)) B_{1:t}^T,
//   s(x) = sigmoid(x W_S), length r_s.
// p, A, B are lag-indexed and sliced by prefix length at use sites.
struct DPLRParams {
    std::size_t L_max = 0;
    std::size_t r_s = 0;
    Matrix p;   // L_max x 1
    Matrix A;   // L_max x r_s
    Matrix B;   // L_max x r_s
    Matrix W_S; // d x r_s
};

// p = 0 (so R = I + small low-rank at init, the shortcut form); A, B, W_S
// drawn normal(0, std_dev).
DPLRParams init_dplr(Rng& rng, std::size_t L_max, std::size_t r_s, std::size_t d,
                     double std_dev = 0.02);

// Optional multiply counter for the overhead assertions; pass nullptr to skip.
struct MulCounter {
    std::uint64_t mults = 0;
};

// s(x) = sigmoid(x W_S).
Matrix gate_vector(const Matrix& x, const DPLRParams& params);

// Dense t x t materialization; reference/oracle path only.
Matrix materialize(const DPLRParams& params, const Matrix& s, std::size_t t);

// y R, computed as yD + ((yA) (.) s^T) B^T in O(t * r_s); no t x t intermediate.
Matrix mix_right(const Matrix& y, const DPLRParams& params, const Matrix& s,
                 MulCounter* counter = nullptr);
// y R^T = yD + ((yB) (.) s^T) A^T.
Matrix mix_right_transpose(const Matrix& y, const DPLRParams& params, const Matrix& s,
                           MulCounter* counter = nullptr);

// R^T X (transpose=false) or R X (transpose=true) on lag rows, column-wise via
// the fast vector products.
Matrix mix_rows(const Matrix& x_lag, const DPLRParams& params, const Matrix& s, bool transpose);

// Prefix extension to length T: p padded with -1 (zero diagonal beyond t),
// A/B zero-padded, so materialize(extended, s, T) embeds the original R as the
// top-left t x t block, exactly.
DPLRParams extend(const DPLRParams& params, std::size_t t, std::size_t T);

} // namespace hyperhead
