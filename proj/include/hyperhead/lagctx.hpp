#pragma once

#include "hyperhead/matrix.hpp"

namespace hyperhead {

// Lag-ordered context prefix: row 0 is the NEWEST token x_t, row t-1 the
// oldest x_1. Stored physically in lag order so truncation to the most recent
// t' tokens is a leading-rows slice. Immutable value type.
class LagContext {
public:
    LagContext() = default;
    // rows already in lag order.
    explicit LagContext(Matrix lag_rows);

    std::size_t t() const { return rows_.rows(); }
    std::size_t d() const { return rows_.cols(); }
    const Matrix& rows() const { return rows_; }

private:
    Matrix rows_;
};

// Reverse a chronological sequence into lag order. Empty input is an error.
LagContext from_forward(const Matrix& seq);
// Back to chronological order.
Matrix to_forward(const LagContext& ctx);
// Keep the t' most recent tokens (leading rows).
LagContext truncate(const LagContext& ctx, std::size_t t_prime);
// Push a new most-recent token; previous rows shift down.
LagContext append_newest(const LagContext& ctx, const Matrix& x);

} // namespace hyperhead
