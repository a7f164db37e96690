#pragma once

#include "hyperhead/head.hpp"
#include "hyperhead/tape.hpp"

namespace hyperhead {

// Desk-scale residual stack: token embedding, n_blocks of (pre-norm sequence
// mixing + pre-norm 2-layer ReLU MLP of width 2d), final norm, unembedding.
struct ModelConfig {
    std::size_t vocab = 16;
    std::size_t d = 64;
    std::size_t n_blocks = 2;
    std::size_t seq_len = 64; // max context; sizes the temporal parameters
    HeadConfig head;
    double norm_eps = 1e-8;
};

// Flat named parameter set ("embed", "unembed", "blk0.mix.h0.W_q",
// "blk0.mlp.W1", ...). The names double as tape leaf names.
ParamMap init_model_params(Rng& rng, const ModelConfig& mc, double std_dev = 0.02);

std::size_t param_count(const ParamMap& params);

// Register every parameter as a tape leaf; returns name -> VarId.
std::map<std::string, VarId> register_params(Tape& tape, const ParamMap& params);

// Teacher-forced logits (T x vocab) for a token sequence.
VarId build_logits(Tape& tape, const std::map<std::string, VarId>& ids, const ModelConfig& mc,
                   const std::vector<int>& tokens);

// Mean masked cross-entropy scalar.
VarId build_loss(Tape& tape, const std::map<std::string, VarId>& ids, const ModelConfig& mc,
                 const std::vector<int>& tokens, const std::vector<int>& targets,
                 const std::vector<std::uint8_t>& mask);

// Gradient-free forward for evaluation.
Matrix logits_forward(const ParamMap& params, const ModelConfig& mc,
                      const std::vector<int>& tokens);

} // namespace hyperhead
