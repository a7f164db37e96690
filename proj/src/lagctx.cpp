#include "hyperhead/lagctx.hpp"

#include <algorithm>

namespace hyperhead {

LagContext::LagContext(Matrix lag_rows) : rows_(std::move(lag_rows)) {
    if (rows_.rows() == 0) throw DimensionError("LagContext: empty context");
}

LagContext from_forward(const Matrix& seq) {
    if (seq.rows() == 0) throw DimensionError("from_forward: empty sequence");
    Matrix lag(seq.rows(), seq.cols());
    for (std::size_t r = 0; r < seq.rows(); ++r)
        std::copy(seq.row_ptr(seq.rows() - 1 - r), seq.row_ptr(seq.rows() - 1 - r) + seq.cols(),
                  lag.row_ptr(r));
    return LagContext(std::move(lag));
}

Matrix to_forward(const LagContext& ctx) {
    Matrix fwd(ctx.t(), ctx.d());
    for (std::size_t r = 0; r < ctx.t(); ++r)
        std::copy(ctx.rows().row_ptr(ctx.t() - 1 - r), ctx.rows().row_ptr(ctx.t() - 1 - r) + ctx.d(),
                  fwd.row_ptr(r));
    return fwd;
}

LagContext truncate(const LagContext& ctx, std::size_t t_prime) {
    if (t_prime < 1 || t_prime > ctx.t())
        throw DimensionError("truncate: t'=" + std::to_string(t_prime) + " out of [1," +
                             std::to_string(ctx.t()) + "]");
    Matrix out(t_prime, ctx.d());
    std::copy(ctx.rows().data(), ctx.rows().data() + t_prime * ctx.d(), out.data());
    return LagContext(std::move(out));
}

LagContext append_newest(const LagContext& ctx, const Matrix& x) {
    if (ctx.t() == 0) {
        if (x.rows() != 1) throw DimensionError("append_newest: x must be a single row");
        return LagContext(x);
    }
    if (x.rows() != 1 || x.cols() != ctx.d())
        throw DimensionError("append_newest: row " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()) + " into width " + std::to_string(ctx.d()));
    Matrix out(ctx.t() + 1, ctx.d());
    std::copy(x.data(), x.data() + ctx.d(), out.row_ptr(0));
    std::copy(ctx.rows().data(), ctx.rows().data() + ctx.t() * ctx.d(), out.row_ptr(1));
    return LagContext(std::move(out));
}

} // namespace hyperhead
