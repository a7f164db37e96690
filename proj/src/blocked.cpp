#include "hyperhead/blocked.hpp"

#include <atomic>
#include <cmath>

namespace hyperhead {

namespace {
std::atomic<bool> g_poison_skew{false};

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
} // namespace

void set_blocked_poison(bool enabled) { g_poison_skew.store(enabled); }

OffsetBlock to_offset(const Matrix& block_left, std::size_t row_start, std::size_t T) {
    if (block_left.cols() != T)
        throw DimensionError("to_offset: block width " + std::to_string(block_left.cols()) +
                             " vs T=" + std::to_string(T));
    if (row_start + block_left.rows() > T)
        throw DimensionError("to_offset: rows " + std::to_string(row_start) + ".." +
                             std::to_string(row_start + block_left.rows() - 1) + " exceed T=" +
                             std::to_string(T));
    OffsetBlock out;
    out.m_rows = block_left.rows();
    out.T = T;
    out.row_start = row_start;
    out.data = Matrix(out.m_rows, T);
    for (std::size_t m = 0; m < out.m_rows; ++m) {
        const std::size_t r = row_start + m;
        for (std::size_t tau = 0; tau < T; ++tau) {
            const std::ptrdiff_t c =
                static_cast<std::ptrdiff_t>(tau + r) - static_cast<std::ptrdiff_t>(T - 1);
            if (c >= 0) out.data(m, tau) = block_left(m, static_cast<std::size_t>(c));
        }
    }
    if (g_poison_skew.load() && out.m_rows > 0 && T >= 2)
        std::swap(out.data(0, T - 1), out.data(0, T - 2));
    return out;
}

Matrix from_offset(const OffsetBlock& block) {
    Matrix out(block.m_rows, block.T);
    for (std::size_t m = 0; m < block.m_rows; ++m) {
        const std::size_t r = block.row_start + m;
        for (std::size_t tau = 0; tau < block.T; ++tau) {
            const std::ptrdiff_t c =
                static_cast<std::ptrdiff_t>(tau + r) - static_cast<std::ptrdiff_t>(block.T - 1);
            if (c >= 0) out(m, static_cast<std::size_t>(c)) = block.data(m, tau);
        }
    }
    return out;
}

namespace {
// Causal FIR over the chronological sequence; equals the per-step lag-ordered
// depthwise conv because the window depends only on the absolute position.
Matrix forward_conv(const Matrix& seq, const Matrix& kernels) {
    const std::size_t T = seq.rows(), C = seq.cols(), K = kernels.cols();
    Matrix out(T, C);
    for (std::size_t p = 0; p < T; ++p)
        for (std::size_t j = 0; j < K && j <= p; ++j)
            for (std::size_t ch = 0; ch < C; ++ch)
                out(p, ch) += kernels(ch, j) * seq(p - j, ch);
    return out;
}

void mask_causal(Matrix& plane, std::size_t row_start) {
    for (std::size_t m = 0; m < plane.rows(); ++m)
        for (std::size_t c = row_start + m + 1; c < plane.cols(); ++c) plane(m, c) = 0.0;
}

// Plane-level DPLR mixing: out[m,c] = in[m,c]*(1+p[idx(c)]) + sum_k z[m,k]*V[idx(c),k]
// with z = (in * U[idx]) (.) s per row; (U,V) = (A,B) for R, (B,A) for R^T.
void mix_plane_inplace(Matrix& plane, const DPLRParams& dplr, const Matrix& s_panel,
                       bool transpose, bool reverse_index) {
    const std::size_t M = plane.rows(), T = plane.cols(), R = dplr.r_s;
    if (T > dplr.L_max) throw DimensionError("mix_plane: T exceeds L_max");
    const Matrix& u = transpose ? dplr.B : dplr.A;
    const Matrix& v = transpose ? dplr.A : dplr.B;
    auto idx = [&](std::size_t c) { return reverse_index ? T - 1 - c : c; };
    Matrix z(M, R);
    for (std::size_t m = 0; m < M; ++m) {
        const double* prow = plane.row_ptr(m);
        double* zrow = z.row_ptr(m);
        for (std::size_t c = 0; c < T; ++c) {
            const double* urow = u.row_ptr(idx(c));
            for (std::size_t k = 0; k < R; ++k) zrow[k] += prow[c] * urow[k];
        }
        for (std::size_t k = 0; k < R; ++k) zrow[k] *= s_panel(m, k);
    }
    for (std::size_t m = 0; m < M; ++m) {
        double* prow = plane.row_ptr(m);
        const double* zrow = z.row_ptr(m);
        for (std::size_t c = 0; c < T; ++c) {
            const std::size_t i = idx(c);
            double acc = prow[c] * (1.0 + dplr.p(i, 0));
            const double* vrow = v.row_ptr(i);
            for (std::size_t k = 0; k < R; ++k) acc += zrow[k] * vrow[k];
            prow[c] = acc;
        }
    }
}

// Apply the per-row temporal mixer to a left-layout causal plane: forward-
// indexed parameters act in place; lag-indexed ones act through the offset
// layout where the lag coordinate is uniform across rows.
void mix_block(Matrix& plane, std::size_t row_start, const DPLRParams& dplr,
               const Matrix& s_panel, bool transpose, bool lag_layout) {
    const std::size_t T = plane.cols();
    if (lag_layout) {
        OffsetBlock off = to_offset(plane, row_start, T);
        mix_plane_inplace(off.data, dplr, s_panel, transpose, /*reverse_index=*/true);
        plane = from_offset(off);
    } else {
        mix_plane_inplace(plane, dplr, s_panel, transpose, /*reverse_index=*/false);
    }
    mask_causal(plane, row_start);
}

// Query-side projections for one block: rows (x_r W_q (.) M1 gate), rotated.
Matrix block_queries(const Matrix& seq, std::size_t row_start, std::size_t M, const Matrix& w_q,
                     const Matrix& w_m1, const HeadConfig& config) {
    Matrix q(M, w_q.cols());
    for (std::size_t m = 0; m < M; ++m) {
        Matrix row = matmul(seq.row(row_start + m), w_q);
        if (config.use_core_gates) {
            Matrix g = matmul(seq.row(row_start + m), w_m1);
            for (std::size_t c = 0; c < g.size(); ++c)
                row.data()[c] *= sigmoid_scalar(g.data()[c]);
        }
        q.set_row(m, row);
    }
    if (config.use_rope) {
        std::vector<std::size_t> pos(M);
        for (std::size_t m = 0; m < M; ++m) pos[m] = row_start + m;
        q = rope_rotate(q, pos);
    }
    return q;
}

Matrix gate_panel(const Matrix& seq, std::size_t row_start, std::size_t M,
                  const DPLRParams& dplr) {
    Matrix s(M, dplr.r_s);
    for (std::size_t m = 0; m < M; ++m)
        s.set_row(m, gate_vector(seq.row(row_start + m), dplr));
    return s;
}

// One branch's score plane (masked, mixed): rows = queries, columns = forward
// key positions.
Matrix score_plane(const Matrix& seq, const Matrix& keys, std::size_t row_start, std::size_t M,
                   const Matrix& w_q, const Matrix& w_m1, const HeadParams& params,
                   const HeadConfig& config) {
    Matrix plane = matmul_nt(block_queries(seq, row_start, M, w_q, w_m1, config), keys);
    mask_causal(plane, row_start);
    if (config.tmix_1)
        mix_block(plane, row_start, params.dplr1, gate_panel(seq, row_start, M, params.dplr1),
                  /*transpose=*/false, config.lag_layout);
    return plane;
}

void activate_rows(Matrix& plane, std::size_t row_start, const HeadConfig& config,
                   const Matrix* scale_plane) {
    for (std::size_t m = 0; m < plane.rows(); ++m) {
        const std::size_t n = row_start + m + 1; // causal prefix length
        double* row = plane.row_ptr(m);
        switch (config.base) {
        case BaseAct::Softmax: {
            double mx = row[0];
            for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, row[c]);
            double sum = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                row[c] = std::exp(row[c] - mx);
                sum += row[c];
            }
            for (std::size_t c = 0; c < n; ++c) row[c] /= sum;
            break;
        }
        case BaseAct::ReluL2:
        case BaseAct::Glu: {
            double ss = 0.0;
            for (std::size_t c = 0; c < n; ++c) ss += row[c] * row[c];
            const double inv = 1.0 / std::sqrt(ss + config.eps);
            for (std::size_t c = 0; c < n; ++c) row[c] = std::max(row[c] * inv, 0.0);
            if (config.base == BaseAct::Glu)
                for (std::size_t c = 0; c < n; ++c)
                    row[c] *= softplus_scalar((*scale_plane)(m, c));
            break;
        }
        }
    }
}
} // namespace

Matrix blocked_seq_forward(const Matrix& seq, const std::vector<HeadParams>& heads,
                           const HeadConfig& config, std::size_t M) {
    const std::size_t T = seq.rows();
    if (T == 0) throw DimensionError("blocked_seq_forward: empty sequence");
    if (M == 0 || M > T)
        throw DimensionError("blocked_seq_forward: block height " + std::to_string(M) +
                             " outside [1, " + std::to_string(T) + "]");
    Matrix out(T, config.d);
    for (const HeadParams& params : heads) {
        // Context-wide projections, shared by every block of this head.
        const Matrix k_core =
            config.use_conv ? forward_conv(seq, params.conv_k) : seq;
        const Matrix v_core =
            config.use_conv ? forward_conv(seq, params.conv_v) : seq;
        Matrix keys = matmul(k_core, params.W_k);
        Matrix keys2; // Glu scale branch
        if (config.base == BaseAct::Glu) keys2 = matmul(k_core, params.W_k2);
        if (config.use_rope) {
            std::vector<std::size_t> pos(T);
            for (std::size_t p = 0; p < T; ++p) pos[p] = p;
            keys = rope_rotate(keys, pos);
            if (config.base == BaseAct::Glu) keys2 = rope_rotate(keys2, pos);
        }
        const std::size_t n_blocks = (T + M - 1) / M;
#pragma omp parallel for schedule(dynamic)
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t row_start = b * M;
            const std::size_t m_rows = std::min(M, T - row_start);
            Matrix plane = score_plane(seq, keys, row_start, m_rows, params.W_q, params.W_M1,
                                       params, config);
            if (config.base == BaseAct::Glu) {
                const Matrix scale = score_plane(seq, keys2, row_start, m_rows, params.W_q2,
                                                 params.W_M1b, params, config);
                activate_rows(plane, row_start, config, &scale);
            } else {
                activate_rows(plane, row_start, config, nullptr);
            }
            if (config.tmix_2)
                mix_block(plane, row_start, params.dplr2,
                          gate_panel(seq, row_start, m_rows, params.dplr2),
                          /*transpose=*/true, config.lag_layout);
            Matrix o = matmul(matmul(plane, v_core), params.W_v);
            if (config.use_core_gates) {
                for (std::size_t m = 0; m < m_rows; ++m) {
                    const Matrix g = matmul(seq.row(row_start + m), params.W_M2);
                    for (std::size_t c = 0; c < o.cols(); ++c)
                        o(m, c) *= sigmoid_scalar(g(0, c));
                }
            }
            o = matmul_nt(o, params.W_o);
            // Blocks touch disjoint output rows; no synchronization needed.
            for (std::size_t m = 0; m < m_rows; ++m)
                for (std::size_t c = 0; c < config.d; ++c) out(row_start + m, c) += o(m, c);
        }
    }
    return out;
}

} // namespace hyperhead
