#pragma once

#include "hyperhead/head.hpp"

namespace hyperhead {

// Row block of a causal score-like plane in offset (skew) layout: global row
// r = row_start + m keeps its causal prefix right-aligned, with the diagonal
// element at the last column and exact zeros left of the prefix.
struct OffsetBlock {
    std::size_t m_rows = 0;
    std::size_t T = 0;
    std::size_t row_start = 0;
    Matrix data; // m_rows x T
};

// X_off[m, tau] = X_left[m, c] with c = tau + r - (T-1), zero where c < 0.
OffsetBlock to_offset(const Matrix& block_left, std::size_t row_start, std::size_t T);
// Inverse map; the acausal region (c > r) is set to zero.
Matrix from_offset(const OffsetBlock& block);

// Row-blocked teacher forcing over the full sequence. Produces the same
// output as seq_forward within roundoff; never materializes a T x T mixing
// operator (per-block working set is O(M*T + M*r_s)). Blocks run in parallel.
Matrix blocked_seq_forward(const Matrix& seq, const std::vector<HeadParams>& heads,
                           const HeadConfig& config, std::size_t M);

// Fault-injection hook for the verification harness: corrupts one skew index
// inside to_offset so layout bijectivity fails detectably.
void set_blocked_poison(bool enabled);

} // namespace hyperhead
