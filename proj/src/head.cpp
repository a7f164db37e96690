#include "hyperhead/head.hpp"

#include <cmath>

namespace hyperhead {

namespace {
double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
double softplus_scalar(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

Matrix row_sigmoid(const Matrix& z) {
    Matrix out = z;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = sigmoid_scalar(out.data()[i]);
    return out;
}

Matrix reverse_row(const Matrix& y) {
    Matrix out(1, y.cols());
    for (std::size_t i = 0; i < y.cols(); ++i) out(0, i) = y(0, y.cols() - 1 - i);
    return out;
}

Matrix reverse_rows(const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(x.rows() - 1 - r, c);
    return out;
}
} // namespace

std::size_t glu_branch_rank(const HeadConfig& config) {
    return config.d_qk >= 2 ? config.d_qk / 2 : 1;
}

HeadParams init_head_params(Rng& rng, const HeadConfig& config, std::size_t L_max,
                            double std_dev) {
    const std::size_t dq = config.base == BaseAct::Glu ? glu_branch_rank(config) : config.d_qk;
    HeadParams p;
    p.W_q = rng.normal_matrix(config.d, dq, std_dev);
    p.W_k = rng.normal_matrix(config.d, dq, std_dev);
    p.W_v = rng.normal_matrix(config.d, config.d_vo, std_dev);
    p.W_o = rng.normal_matrix(config.d, config.d_vo, std_dev);
    p.W_M1 = rng.normal_matrix(config.d, dq, std_dev);
    p.W_M2 = rng.normal_matrix(config.d, config.d_vo, std_dev);
    p.dplr1 = init_dplr(rng, L_max, config.r_s, config.d, std_dev);
    p.dplr2 = init_dplr(rng, L_max, config.r_s, config.d, std_dev);
    // Identity tap plus noise so the conv starts near a pass-through.
    p.conv_k = rng.normal_matrix(config.d, 4, std_dev);
    p.conv_v = rng.normal_matrix(config.d, 4, std_dev);
    for (std::size_t ch = 0; ch < config.d; ++ch) {
        p.conv_k(ch, 0) += 1.0;
        p.conv_v(ch, 0) += 1.0;
    }
    if (config.base == BaseAct::Glu) {
        p.W_q2 = rng.normal_matrix(config.d, dq, std_dev);
        p.W_k2 = rng.normal_matrix(config.d, dq, std_dev);
        p.W_M1b = rng.normal_matrix(config.d, dq, std_dev);
    }
    return p;
}

Matrix l2norm(const Matrix& z, double eps) {
    double ss = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) ss += z.data()[i] * z.data()[i];
    return scale(z, 1.0 / std::sqrt(ss + eps));
}

Matrix act_relu_l2(const Matrix& z, double eps) {
    Matrix out = l2norm(z, eps);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(out.data()[i], 0.0);
    return out;
}

Matrix act_hyperglu(const Matrix& h_scale, const Matrix& h_gate, double eps) {
    Matrix out = act_relu_l2(h_gate, eps);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] *= softplus_scalar(h_scale.data()[i]);
    return out;
}

Matrix softmax_row(const Matrix& z) {
    double mx = z.data()[0];
    for (std::size_t i = 1; i < z.size(); ++i) mx = std::max(mx, z.data()[i]);
    Matrix out = z;
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = std::exp(out.data()[i] - mx);
        sum += out.data()[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] /= sum;
    return out;
}

Matrix rope_rotate(const Matrix& core, const std::vector<std::size_t>& positions) {
    if (core.cols() % 2 != 0)
        throw DimensionError("rope_rotate: width " + std::to_string(core.cols()) + " is odd");
    if (positions.size() != core.rows())
        throw DimensionError("rope_rotate: positions length vs rows");
    const std::size_t D = core.cols();
    Matrix out(core.rows(), D);
    for (std::size_t r = 0; r < core.rows(); ++r) {
        for (std::size_t i = 0; i * 2 < D; ++i) {
            const double theta =
                std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(D));
            const double ang = static_cast<double>(positions[r]) * theta;
            const double c = std::cos(ang), s = std::sin(ang);
            const double v0 = core(r, 2 * i), v1 = core(r, 2 * i + 1);
            out(r, 2 * i) = v0 * c - v1 * s;
            out(r, 2 * i + 1) = v0 * s + v1 * c;
        }
    }
    return out;
}

Matrix depthwise_causal_conv(const Matrix& core, const Matrix& kernels) {
    if (kernels.rows() != core.cols())
        throw DimensionError("depthwise_causal_conv: " + std::to_string(kernels.rows()) +
                             " kernels vs width " + std::to_string(core.cols()));
    const std::size_t t = core.rows(), C = core.cols(), K = kernels.cols();
    Matrix out(t, C);
    // Lag row i mixes lag rows i..i+K-1 (older); beyond the oldest row is zero.
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < K && i + j < t; ++j)
            for (std::size_t ch = 0; ch < C; ++ch)
                out(i, ch) += kernels(ch, j) * core(i + j, ch);
    return out;
}

Matrix k_side_core(const LagContext& ctx, const HeadParams& params, const HeadConfig& config) {
    return config.use_conv ? depthwise_causal_conv(ctx.rows(), params.conv_k) : ctx.rows();
}

Matrix v_side_core(const LagContext& ctx, const HeadParams& params, const HeadConfig& config) {
    return config.use_conv ? depthwise_causal_conv(ctx.rows(), params.conv_v) : ctx.rows();
}

Matrix apply_tmix_row(const Matrix& row, const DPLRParams& params, const Matrix& s,
                      bool transpose, bool lag_layout, MulCounter* counter) {
    if (lag_layout)
        return transpose ? mix_right_transpose(row, params, s, counter)
                         : mix_right(row, params, s, counter);
    // Forward layout: the mixing parameters index forward positions, so the
    // slot axis is reversed around the mix.
    Matrix rev = reverse_row(row);
    rev = transpose ? mix_right_transpose(rev, params, s, counter)
                    : mix_right(rev, params, s, counter);
    return reverse_row(rev);
}

namespace {
std::vector<std::size_t> lag_positions(std::size_t t) {
    std::vector<std::size_t> pos(t);
    for (std::size_t i = 0; i < t; ++i) pos[i] = t - 1 - i; // forward position of lag row i
    return pos;
}

// One score branch with explicit projection weights (shared by the Glu
// gate/scale branches and the plain path).
Matrix score_branch(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                    const HeadConfig& config, const Matrix& W_q, const Matrix& W_k,
                    const Matrix& W_m1, MulCounter* counter) {
    Matrix q = matmul(x, W_q);
    if (config.use_core_gates) q = hadamard(q, row_sigmoid(matmul(x, W_m1)));
    Matrix k = matmul(k_side_core(ctx, params, config), W_k);
    if (config.use_rope) {
        q = rope_rotate(q, {ctx.t() - 1});
        k = rope_rotate(k, lag_positions(ctx.t()));
    }
    Matrix h = matmul_nt(q, k);
    if (config.tmix_1) {
        const Matrix s = gate_vector(x, params.dplr1);
        h = apply_tmix_row(h, params.dplr1, s, /*transpose=*/false, config.lag_layout, counter);
    }
    return h;
}
} // namespace

Matrix score(const Matrix& x, const LagContext& ctx, const HeadParams& params,
             const HeadConfig& config, MulCounter* counter) {
    return score_branch(x, ctx, params, config, params.W_q, params.W_k, params.W_M1, counter);
}

Matrix readout(const Matrix& a, const Matrix& x, const LagContext& ctx, const HeadParams& params,
               const HeadConfig& config, MulCounter* counter) {
    if (a.cols() != ctx.t())
        throw DimensionError("readout: activation length " + std::to_string(a.cols()) + " vs t=" +
                             std::to_string(ctx.t()));
    Matrix w = a;
    if (config.tmix_2) {
        const Matrix s = gate_vector(x, params.dplr2);
        w = apply_tmix_row(w, params.dplr2, s, /*transpose=*/true, config.lag_layout, counter);
    }
    Matrix o = matmul(matmul(w, v_side_core(ctx, params, config)), params.W_v);
    if (config.use_core_gates) o = hadamard(o, row_sigmoid(matmul(x, params.W_M2)));
    return matmul_nt(o, params.W_o);
}

Matrix head_forward(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                    const HeadConfig& config, MulCounter* counter) {
    Matrix a;
    switch (config.base) {
    case BaseAct::Softmax:
        a = softmax_row(score(x, ctx, params, config, counter));
        break;
    case BaseAct::ReluL2:
        a = act_relu_l2(score(x, ctx, params, config, counter), config.eps);
        break;
    case BaseAct::Glu: {
        const Matrix h_gate = score(x, ctx, params, config, counter);
        const Matrix h_scale =
            score_branch(x, ctx, params, config, params.W_q2, params.W_k2, params.W_M1b, counter);
        a = act_hyperglu(h_scale, h_gate, config.eps);
        break;
    }
    }
    return readout(a, x, ctx, params, config, counter);
}

Matrix multihead_forward(const Matrix& x, const LagContext& ctx,
                         const std::vector<HeadParams>& heads, const HeadConfig& config,
                         MulCounter* counter) {
    Matrix out(1, config.d);
    for (const HeadParams& h : heads) add_inplace(out, head_forward(x, ctx, h, config, counter));
    return out;
}

Matrix seq_forward(const Matrix& seq, const std::vector<HeadParams>& heads,
                   const HeadConfig& config) {
    if (seq.rows() == 0) throw DimensionError("seq_forward: empty sequence");
    Matrix out(seq.rows(), config.d);
    LagContext ctx;
    for (std::size_t t = 0; t < seq.rows(); ++t) {
        const Matrix x = seq.row(t);
        ctx = append_newest(ctx, x);
        out.set_row(t, multihead_forward(x, ctx, heads, config));
    }
    return out;
}

namespace {
Matrix flip_matrix(std::size_t t) {
    Matrix j(t, t);
    for (std::size_t i = 0; i < t; ++i) j(i, t - 1 - i) = 1.0;
    return j;
}

// Dense t x t operator equivalent to apply_tmix_row with transpose=false.
Matrix dense_mix_operator(const Matrix& x, const DPLRParams& params, const HeadConfig& config,
                          std::size_t t) {
    Matrix r = materialize(params, gate_vector(x, params), t);
    if (!config.lag_layout) {
        const Matrix j = flip_matrix(t);
        r = matmul(matmul(j, r), j);
    }
    return r;
}

// Dense first-layer weights W1 = L1(x) X_core^T R1(x), d x t, for one branch.
Matrix dense_w1(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                const HeadConfig& config, const Matrix& W_q, const Matrix& W_k,
                const Matrix& W_m1) {
    Matrix q_lin = W_q; // d x dq
    if (config.use_core_gates) {
        const Matrix m = row_sigmoid(matmul(x, W_m1));
        for (std::size_t r = 0; r < q_lin.rows(); ++r)
            for (std::size_t c = 0; c < q_lin.cols(); ++c) q_lin(r, c) *= m(0, c);
    }
    Matrix k = matmul(k_side_core(ctx, params, config), W_k);
    if (config.use_rope) {
        // Fold the query rotation into the linear map by rotating each row of
        // q_lin at the query position.
        std::vector<std::size_t> qpos(q_lin.rows(), ctx.t() - 1);
        q_lin = rope_rotate(q_lin, qpos);
        k = rope_rotate(k, lag_positions(ctx.t()));
    }
    Matrix w1 = matmul_nt(q_lin, k); // d x t
    if (config.tmix_1) w1 = matmul(w1, dense_mix_operator(x, params.dplr1, config, ctx.t()));
    return w1;
}
} // namespace

Matrix materialized_forward(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                            const HeadConfig& config) {
    const std::size_t t = ctx.t();
    Matrix a;
    switch (config.base) {
    case BaseAct::Softmax:
        a = softmax_row(matmul(x, dense_w1(x, ctx, params, config, params.W_q, params.W_k,
                                           params.W_M1)));
        break;
    case BaseAct::ReluL2:
        a = act_relu_l2(
            matmul(x, dense_w1(x, ctx, params, config, params.W_q, params.W_k, params.W_M1)),
            config.eps);
        break;
    case BaseAct::Glu: {
        const Matrix h_gate =
            matmul(x, dense_w1(x, ctx, params, config, params.W_q, params.W_k, params.W_M1));
        const Matrix h_scale =
            matmul(x, dense_w1(x, ctx, params, config, params.W_q2, params.W_k2, params.W_M1b));
        a = act_hyperglu(h_scale, h_gate, config.eps);
        break;
    }
    }
    // W2 = R2^T X_core L2^T, t x d.
    Matrix w2 = v_side_core(ctx, params, config);
    if (config.tmix_2)
        w2 = matmul(dense_mix_operator(x, params.dplr2, config, t).transpose(), w2);
    w2 = matmul(w2, params.W_v);
    if (config.use_core_gates) {
        const Matrix m = row_sigmoid(matmul(x, params.W_M2));
        for (std::size_t r = 0; r < w2.rows(); ++r)
            for (std::size_t c = 0; c < w2.cols(); ++c) w2(r, c) *= m(0, c);
    }
    w2 = matmul_nt(w2, params.W_o);
    return matmul(a, w2);
}

} // namespace hyperhead
