#include "hyperhead/memory.hpp"

#include <algorithm>
#include <cmath>

namespace hyperhead {

namespace {
double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix row_sigmoid(const Matrix& z) {
    Matrix out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = sigmoid_scalar(out.data()[i]);
    return out;
}

Matrix reverse_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(x.rows() - 1 - r, c);
    return out;
}

// R^T applied to slot-indexed rows under the configured layout (forward-indexed
// parameters act through a row reversal on either side).
Matrix mixed_core(const Matrix& core, const Matrix& x, const DPLRParams& dplr, bool lag_layout) {
    const Matrix s = gate_vector(x, dplr);
    if (lag_layout) return mix_rows(core, dplr, s, /*transpose=*/true);
    return reverse_rows(mix_rows(reverse_rows(core), dplr, s, /*transpose=*/true));
}

// beta batch: rows of V mapped through the readout chain W_v, M2 gate, W_o^T.
Matrix beta_rows(const Matrix& v, const Matrix& x, const HeadParams& params,
                 const HeadConfig& config) {
    Matrix o = matmul(v, params.W_v);
    if (config.use_core_gates) {
        const Matrix m = row_sigmoid(matmul(x, params.W_M2));
        for (std::size_t r = 0; r < o.rows(); ++r)
            for (std::size_t c = 0; c < o.cols(); ++c) o(r, c) *= m(0, c);
    }
    return matmul_nt(o, params.W_o);
}
} // namespace

std::size_t MemoryPoolView::active_count() const {
    return static_cast<std::size_t>(std::count(gates.begin(), gates.end(), true));
}

MemoryPoolView instantiate_pool(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                                const HeadConfig& config) {
    if (ctx.t() == 0) throw DimensionError("instantiate_pool: empty context");
    if (config.use_rope)
        throw DimensionError("instantiate_pool: rotary positions act on the projected core and "
                             "have no model-space slot representation");
    MemoryPoolView view;
    const Matrix k_core = k_side_core(ctx, params, config);
    const Matrix v_core = v_side_core(ctx, params, config);
    view.u = config.tmix_1 ? mixed_core(k_core, x, params.dplr1, config.lag_layout) : k_core;
    view.v = config.tmix_2 ? mixed_core(v_core, x, params.dplr2, config.lag_layout) : v_core;
    Matrix q = matmul(x, params.W_q);
    if (config.use_core_gates) q = hadamard(q, row_sigmoid(matmul(x, params.W_M1)));
    view.alpha = matmul_nt(q, matmul(view.u, params.W_k));
    view.gates.resize(ctx.t());
    double ss = 0.0;
    for (std::size_t i = 0; i < ctx.t(); ++i) {
        view.gates[i] = view.alpha(0, i) > 0.0;
        ss += view.alpha(0, i) * view.alpha(0, i);
    }
    view.rho = std::sqrt(ss + config.eps);
    return view;
}

Matrix readout_via_pool(const MemoryPoolView& view, const Matrix& x, const HeadParams& params,
                        const HeadConfig& config) {
    Matrix coeffs(1, view.size());
    for (std::size_t i = 0; i < view.size(); ++i)
        coeffs(0, i) = std::max(view.alpha(0, i), 0.0) / view.rho;
    return beta_rows(matmul(coeffs, view.v), x, params, config);
}

Matrix linear_readout(const MemoryPoolView& view, const Matrix& x, const HeadParams& params,
                      const HeadConfig& config) {
    return beta_rows(scale(matmul(view.alpha, view.v), 1.0 / view.rho), x, params, config);
}

std::size_t tv_mass(const MemoryPoolView& view, MassKind which) {
    return which == MassKind::Pool ? view.size() : view.active_count();
}

LagContext append_registers(const LagContext& ctx, const Matrix& registers) {
    if (registers.rows() == 0) return ctx;
    if (ctx.t() > 0 && registers.cols() != ctx.d())
        throw DimensionError("append_registers: register width " +
                             std::to_string(registers.cols()) + " vs context width " +
                             std::to_string(ctx.d()));
    Matrix out(ctx.t() + registers.rows(), registers.cols());
    for (std::size_t r = 0; r < ctx.t(); ++r) out.set_row(r, ctx.rows().row(r));
    for (std::size_t r = 0; r < registers.rows(); ++r)
        out.set_row(ctx.t() + r, registers.row(r));
    return LagContext(out);
}

bool margin_stable(const Matrix& h0, const Matrix& h1, double delta) {
    if (delta <= 0.0) throw DimensionError("margin_stable: delta must be positive");
    if (!h0.same_shape(h1))
        throw DimensionError("margin_stable: shape mismatch between h0 and h1");
    for (std::size_t i = 0; i < h0.size(); ++i)
        if (std::abs(h0.data()[i]) < delta) return false;
    for (std::size_t i = 0; i < h0.size(); ++i)
        if (std::abs(h1.data()[i] - h0.data()[i]) >= delta) return false;
    for (std::size_t i = 0; i < h0.size(); ++i)
        if ((h0.data()[i] > 0.0) != (h1.data()[i] > 0.0))
            throw std::logic_error("margin_stable: sign flip despite a verified margin");
    return true;
}

namespace {
WarpedExample build_example(double c, bool static_gate) {
    WarpedExample ex;
    ex.c = c;
    ex.static_gate = static_gate;
    ex.config.d = 2;
    ex.config.n_head = 1;
    ex.config.d_qk = 2;
    ex.config.d_vo = 2;
    ex.config.r_s = 1;
    ex.config.base = BaseAct::ReluL2;
    ex.config.tmix_1 = true;
    ex.config.lag_layout = true;
    ex.params.W_q = Matrix::identity(2);
    ex.params.W_k = Matrix::identity(2);
    ex.params.W_v = Matrix::identity(2);
    ex.params.W_o = Matrix::identity(2);
    ex.params.W_M1 = Matrix(2, 2);
    ex.params.W_M2 = Matrix(2, 2);
    // R = I + e1 sigmoid(W_S^T x) e2^T as a rank-1 gated mixer.
    ex.params.dplr1.L_max = 2;
    ex.params.dplr1.r_s = 1;
    ex.params.dplr1.p = Matrix(2, 1);
    ex.params.dplr1.A = Matrix(2, 1, {1.0, 0.0});
    ex.params.dplr1.B = Matrix(2, 1, {0.0, 1.0});
    ex.params.dplr1.W_S = static_gate ? Matrix(2, 1) : Matrix(2, 1, {c, 0.0});
    ex.params.dplr2 = ex.params.dplr1; // unused (tmix_2 off)
    ex.ctx = LagContext(Matrix::identity(2));
    return ex;
}
} // namespace

bool WarpedExample::slot2_active(double x1, double x2) const {
    const Matrix x(1, 2, {x1, x2});
    return instantiate_pool(x, ctx, params, config).gates[1];
}

bool WarpedExample::predicate(double x1, double x2) const {
    const double phi = static_gate ? 0.5 : sigmoid_scalar(c * x1);
    return x2 + phi * x1 > 0.0;
}

WarpedExample warped_boundary_example(double c) {
    if (c == 0.0) throw DimensionError("warped_boundary_example: c must be nonzero");
    return build_example(c, /*static_gate=*/false);
}

WarpedExample make_static_control(double c) { return build_example(c, /*static_gate=*/true); }

namespace {
double bisect(const std::function<bool(double, double)>& gate, double ax, double ay, double bx,
              double by, int iters) {
    // returns parameter in [0,1] along the a->b segment at the sign change
    double lo = 0.0, hi = 1.0;
    const bool at_lo = gate(ax, ay);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool g = gate(ax + mid * (bx - ax), ay + mid * (by - ay));
        if (g == at_lo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}
} // namespace

std::vector<std::array<double, 2>> boundary_points(
    const std::function<bool(double, double)>& gate, double lo, double hi, double step,
    int bisect_iters) {
    std::vector<std::array<double, 2>> points;
    const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5));
    std::vector<std::vector<bool>> g(steps + 1, std::vector<bool>(steps + 1));
    for (std::size_t i = 0; i <= steps; ++i)
        for (std::size_t j = 0; j <= steps; ++j) g[i][j] = gate(lo + i * step, lo + j * step);
    for (std::size_t i = 0; i <= steps; ++i) {
        for (std::size_t j = 0; j <= steps; ++j) {
            const double x = lo + i * step, y = lo + j * step;
            if (i < steps && g[i][j] != g[i + 1][j]) {
                const double s = bisect(gate, x, y, x + step, y, bisect_iters);
                points.push_back({x + s * step, y});
            }
            if (j < steps && g[i][j] != g[i][j + 1]) {
                const double s = bisect(gate, x, y, x, y + step, bisect_iters);
                points.push_back({x, y + s * step});
            }
        }
    }
    return points;
}

double collinearity_residual(const std::vector<std::array<double, 2>>& points) {
    if (points.size() < 3) return 0.0;
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        mx += p[0];
        my += p[1];
    }
    mx /= static_cast<double>(points.size());
    my /= static_cast<double>(points.size());
    Matrix cov(2, 2);
    for (const auto& p : points) {
        const double dx = p[0] - mx, dy = p[1] - my;
        cov(0, 0) += dx * dx;
        cov(0, 1) += dx * dy;
        cov(1, 0) += dx * dy;
        cov(1, 1) += dy * dy;
    }
    Matrix vecs;
    symmetric_eigen(cov, vecs); // principal direction = first eigenvector column
    const double ux = vecs(0, 0), uy = vecs(1, 0);
    double worst = 0.0;
    for (const auto& p : points) {
        const double dx = p[0] - mx, dy = p[1] - my;
        worst = std::max(worst, std::abs(dx * uy - dy * ux)); // perpendicular component
    }
    return worst;
}

namespace {
Matrix relu(const Matrix& z) {
    Matrix out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], 0.0);
    return out;
}

Matrix low_rank(Rng& rng, std::size_t rows, std::size_t cols, std::size_t r) {
    if (r == 0) return Matrix(rows, cols);
    return matmul(rng.normal_matrix(rows, r, 0.5), rng.normal_matrix(r, cols, 0.5));
}

// Component of y orthogonal to the row space spanned by the orthonormal rows q.
Matrix orth_complement(const Matrix& y, const Matrix& q) {
    if (q.rows() == 0) return y;
    return sub(y, matmul(matmul_nt(y, q), q));
}
} // namespace

BudgetAsymmetryResult budget_asymmetry_check(std::uint64_t seed, std::size_t d, std::size_t h,
                                             std::size_t r) {
    if (r >= std::min(d, h))
        throw DimensionError("budget_asymmetry_check: need r < min(d, h)");
    Rng rng(seed);
    BudgetAsymmetryResult res;
    constexpr int kTrials = 20;
    {
        // Low-rank second layer: f(x) - x must stay in Row(W2).
        const Matrix w1 = rng.normal_matrix(d, h, 0.5);
        const Matrix w2 = low_rank(rng, h, d, r);
        const Matrix q = orthonormal_rowspace(w2);
        for (int trial = 0; trial < kTrials; ++trial) {
            const Matrix x = rng.normal_matrix(1, d, 1.0);
            const Matrix delta_f = matmul(relu(matmul(x, w1)), w2);
            res.subspace_residual =
                std::max(res.subspace_residual, frobenius_norm(orth_complement(delta_f, q)));
        }
    }
    {
        // Low-rank first layer: f(x + delta) = f(x) + delta for delta _|_ Col(W1).
        const Matrix w1 = low_rank(rng, d, h, r);
        const Matrix w2 = rng.normal_matrix(h, d, 0.5);
        const Matrix q = orthonormal_rowspace(w1.transpose()); // basis of Col(W1)
        auto f = [&](const Matrix& x) { return add(x, matmul(relu(matmul(x, w1)), w2)); };
        for (int trial = 0; trial < kTrials; ++trial) {
            const Matrix x = rng.normal_matrix(1, d, 1.0);
            const Matrix delta = orth_complement(rng.normal_matrix(1, d, 1.0), q);
            const Matrix expect = add(f(x), delta);
            res.quotient_violation =
                std::max(res.quotient_violation, frobenius_norm(sub(f(add(x, delta)), expect)));
        }
    }
    return res;
}

std::size_t lora_update_span_check(std::uint64_t seed, std::size_t d, std::size_t t,
                                   std::size_t r) {
    if (r >= d) throw DimensionError("lora_update_span_check: need r < d");
    Rng rng(seed);
    const Matrix w1 = rng.normal_matrix(d, t, 0.5);
    const Matrix delta_w2 = low_rank(rng, t, d, r);
    constexpr std::size_t kSamples = 50;
    Matrix deltas(kSamples, d);
    for (std::size_t i = 0; i < kSamples; ++i) {
        const Matrix x = rng.normal_matrix(1, d, 1.0);
        deltas.set_row(i, matmul(relu(matmul(x, w1)), delta_w2));
    }
    return numerical_rank(deltas);
}

} // namespace hyperhead
