#pragma once

#include <vector>

#include "hyperhead/dplr.hpp"
#include "hyperhead/lagctx.hpp"
#include "hyperhead/matrix.hpp"
#include "hyperhead/rng.hpp"

namespace hyperhead {

enum class BaseAct { Softmax, ReluL2, Glu };

// Full specification of one sequence-mixing head family, usually decoded from
// a design-study label (see labels.hpp).
struct HeadConfig {
    std::size_t d = 0;
    std::size_t n_head = 2;
    std::size_t d_qk = 0; // routing rank per head
    std::size_t d_vo = 0; // readout rank per head
    std::size_t r_s = 16; // temporal mixing rank
    BaseAct base = BaseAct::Softmax;
    bool use_rope = false;
    bool use_conv = false; // depthwise causal conv, kernel length 4
    bool use_core_gates = false;
    bool tmix_1 = false;
    bool tmix_2 = false;
    bool lag_layout = false; // true: R is lag-indexed; false: forward-indexed
    bool overparam = false;
    double eps = 1e-12;
};

// Per-head parameters. For the Glu base, W_q/W_k/W_M1 form the gate branch
// and W_q2/W_k2/W_M1b the scale branch, each of rank glu_branch_rank(config);
// both branches share the readout side.
struct HeadParams {
    Matrix W_q, W_k;   // d x d_qk (or branch rank for Glu)
    Matrix W_v, W_o;   // d x d_vo
    Matrix W_M1;       // d x d_qk gate projection (diagonal core M1)
    Matrix W_M2;       // d x d_vo gate projection (diagonal core M2)
    DPLRParams dplr1, dplr2;
    Matrix conv_k, conv_v; // d x 4 depthwise kernels for the two cores
    Matrix W_q2, W_k2, W_M1b; // Glu scale branch only
};

std::size_t glu_branch_rank(const HeadConfig& config);
HeadParams init_head_params(Rng& rng, const HeadConfig& config, std::size_t L_max,
                            double std_dev = 0.02);

// --- activations ------------------------------------------------------------
Matrix l2norm(const Matrix& z, double eps);            // z / sqrt(|z|^2 + eps)
Matrix act_relu_l2(const Matrix& z, double eps);       // == ReLU(z)/rho(z)
Matrix act_hyperglu(const Matrix& h_scale, const Matrix& h_gate, double eps);
Matrix softmax_row(const Matrix& z);                   // numerically stable

// --- core modifiers ----------------------------------------------------------
// Pairwise rotations, theta_i = 10000^(-2i/width); positions[i] rotates row i.
Matrix rope_rotate(const Matrix& core, const std::vector<std::size_t>& positions);
// Per-channel causal FIR on a lag-ordered core: lag row i mixes lag rows
// i..i+3 (same-or-older tokens), zero-padded at the old end.
Matrix depthwise_causal_conv(const Matrix& core, const Matrix& kernels);

// --- one step ---------------------------------------------------------------
// h_t = x W_q M1(x) W_k^T K_core^T R1(x); counter (optional) accumulates the
// temporal-mixing multiply overhead.
Matrix score(const Matrix& x, const LagContext& ctx, const HeadParams& params,
             const HeadConfig& config, MulCounter* counter = nullptr);
// o_t = a R2^T(x) V_core W_v M2(x) W_o^T.
Matrix readout(const Matrix& a, const Matrix& x, const LagContext& ctx, const HeadParams& params,
               const HeadConfig& config, MulCounter* counter = nullptr);
// Base-dispatching composition of score/activation/readout.
Matrix head_forward(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                    const HeadConfig& config, MulCounter* counter = nullptr);
// Sum of n_head parallel dynamic MLPs.
Matrix multihead_forward(const Matrix& x, const LagContext& ctx,
                         const std::vector<HeadParams>& heads, const HeadConfig& config,
                         MulCounter* counter = nullptr);
// Teacher forcing: row t is multihead_forward on the lag prefix of length t+1.
Matrix seq_forward(const Matrix& seq, const std::vector<HeadParams>& heads,
                   const HeadConfig& config);

// Oracle: head_forward recomputed through explicitly materialized dynamic
// weights W1 = L1(x) X_core^T R1(x) and W2 = R2^T(x) X_core L2^T(x), i.e.
// sigma(x W1) W2 with dense t x t mixing operators.
Matrix materialized_forward(const Matrix& x, const LagContext& ctx, const HeadParams& params,
                            const HeadConfig& config);

// Effective (conv-applied) cores for the score and readout sides.
Matrix k_side_core(const LagContext& ctx, const HeadParams& params, const HeadConfig& config);
Matrix v_side_core(const LagContext& ctx, const HeadParams& params, const HeadConfig& config);

// Mixing helper shared with the memory oracle: applies R (score side,
// transpose=false) or R^T (readout side, transpose=true) to a slot-indexed row
// under the configured layout (lag- or forward-indexed parameters).
Matrix apply_tmix_row(const Matrix& row, const DPLRParams& params, const Matrix& s,
                      bool transpose, bool lag_layout, MulCounter* counter = nullptr);

} // namespace hyperhead
