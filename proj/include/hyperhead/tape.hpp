#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hyperhead/matrix.hpp"

namespace hyperhead {

using VarId = int;
using ParamMap = std::map<std::string, Matrix>;

// Reverse-mode gradient tape over Matrix-valued primitives.
//
// Usage: register leaves with param()/constant(), compose primitives, call
// backward() on a scalar (1x1) output, then read gradients per leaf. One tape
// per training step; a tape is single-writer and not shared across threads.
class Tape {
public:
    VarId constant(Matrix v);
    VarId param(const std::string& name, Matrix v);

    const Matrix& value(VarId id) const { return nodes_[id].value; }
    const Matrix& grad(VarId id) const { return nodes_[id].grad; }

    // --- primitives -------------------------------------------------------
    VarId matmul(VarId a, VarId b);     // A * B
    VarId matmul_nt(VarId a, VarId b);  // A * B^T
    VarId matmul_tn(VarId a, VarId b);  // A^T * B
    VarId add(VarId a, VarId b);
    VarId sub(VarId a, VarId b);
    VarId hadamard(VarId a, VarId b);
    VarId scale(VarId a, double s);
    VarId sigmoid(VarId a);
    VarId softplus(VarId a);
    VarId relu(VarId a);

    // Square plane ops; "causal" keeps columns c <= r of row r.
    VarId causal_mask(VarId a);
    VarId causal_softmax(VarId a);
    // Per row: ReLU(z)/sqrt(sum_prefix z^2 + eps) over the causal prefix.
    VarId causal_relu_l2(VarId a, double eps);

    // Rotary rotation of row r by position r (pairwise, theta_i = 10000^(-2i/d)).
    VarId rope_rows(VarId a);
    // Depthwise causal FIR over forward order: y[r,ch] = sum_j k[ch,j] x[r-j,ch].
    VarId depthwise_conv(VarId x, VarId kernels);

    // Row-wise DPLR mixing of a causal score plane. For query row r and
    // column c<=r the mixing parameter index is (r-c) when lag_indexed (lag
    // layout) or c (forward layout). transpose swaps the roles of A and B
    // (i.e. computes y R^T rows instead of y R rows).
    VarId causal_dplr_mix(VarId plane, VarId gates, VarId p, VarId a, VarId b,
                          bool transpose, bool lag_indexed);

    VarId embed_rows(VarId table, std::vector<int> ids);
    VarId rmsnorm_rows(VarId a, double eps);

    // Scalar (1x1): mean cross-entropy over positions with mask!=0.
    VarId cross_entropy_masked(VarId logits, std::vector<int> targets,
                               std::vector<std::uint8_t> mask);
    VarId sum_squares(VarId a); // scalar, handy for gradient checks

    // Seeds d(out)=1 (out must be 1x1) and accumulates gradients into every
    // node. Accumulation order is the fixed reverse program order, so results
    // are deterministic.
    void backward(VarId out);

    bool has_param(const std::string& name) const { return by_name_.count(name) != 0; }
    const Matrix& param_grad(const std::string& name) const;
    const std::vector<std::pair<std::string, VarId>>& params() const { return params_; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&, const Node&)> backward; // empty for leaves
    };
    VarId push(Matrix value, std::function<void(Tape&, const Node&)> bwd);
    Matrix& grad_mut(VarId id) { return nodes_[id].grad; }

    std::vector<Node> nodes_;
    std::vector<std::pair<std::string, VarId>> params_;
    std::map<std::string, VarId> by_name_;
};

// Max relative error between analytic gradients and central finite
// differences of f at theta: max |analytic - fd| / (|fd| + 1e-6). The floor
// keeps entries below the fd noise level (~eps*|f|/h) from dominating.
double grad_check(const std::function<double(const ParamMap&)>& f, const ParamMap& theta,
                  const ParamMap& analytic, double h, std::string* worst_param = nullptr);

} // namespace hyperhead
