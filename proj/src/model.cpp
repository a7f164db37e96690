#include "hyperhead/model.hpp"

namespace hyperhead {

namespace {
void put_head(ParamMap& m, const std::string& prefix, const HeadParams& hp,
              const HeadConfig& hc) {
    m[prefix + ".W_q"] = hp.W_q;
    m[prefix + ".W_k"] = hp.W_k;
    m[prefix + ".W_v"] = hp.W_v;
    m[prefix + ".W_o"] = hp.W_o;
    if (hc.use_core_gates) {
        m[prefix + ".W_M1"] = hp.W_M1;
        m[prefix + ".W_M2"] = hp.W_M2;
    }
    if (hc.use_conv) {
        m[prefix + ".conv_k"] = hp.conv_k;
        m[prefix + ".conv_v"] = hp.conv_v;
    }
    if (hc.tmix_1) {
        m[prefix + ".p1"] = hp.dplr1.p;
        m[prefix + ".A1"] = hp.dplr1.A;
        m[prefix + ".B1"] = hp.dplr1.B;
        m[prefix + ".W_S1"] = hp.dplr1.W_S;
    }
    if (hc.tmix_2) {
        m[prefix + ".p2"] = hp.dplr2.p;
        m[prefix + ".A2"] = hp.dplr2.A;
        m[prefix + ".B2"] = hp.dplr2.B;
        m[prefix + ".W_S2"] = hp.dplr2.W_S;
    }
    if (hc.base == BaseAct::Glu) {
        m[prefix + ".W_q2"] = hp.W_q2;
        m[prefix + ".W_k2"] = hp.W_k2;
        if (hc.use_core_gates) m[prefix + ".W_M1b"] = hp.W_M1b;
    }
}
} // namespace

ParamMap init_model_params(Rng& rng, const ModelConfig& mc, double std_dev) {
    ParamMap m;
    m["embed"] = rng.normal_matrix(mc.vocab, mc.d, std_dev);
    m["unembed"] = rng.normal_matrix(mc.d, mc.vocab, std_dev);
    for (std::size_t b = 0; b < mc.n_blocks; ++b) {
        const std::string blk = "blk" + std::to_string(b);
        for (std::size_t h = 0; h < mc.head.n_head; ++h)
            put_head(m, blk + ".mix.h" + std::to_string(h),
                     init_head_params(rng, mc.head, mc.seq_len, std_dev), mc.head);
        m[blk + ".mlp.W1"] = rng.normal_matrix(mc.d, 2 * mc.d, std_dev);
        m[blk + ".mlp.W2"] = rng.normal_matrix(2 * mc.d, mc.d, std_dev);
    }
    return m;
}

std::size_t param_count(const ParamMap& params) {
    std::size_t n = 0;
    for (const auto& [name, m] : params) n += m.size();
    return n;
}

std::map<std::string, VarId> register_params(Tape& tape, const ParamMap& params) {
    std::map<std::string, VarId> ids;
    for (const auto& [name, m] : params) ids[name] = tape.param(name, m);
    return ids;
}

namespace {
// One score branch as a causal plane: rows = query steps, columns = forward
// key positions; matches the per-step head semantics exactly.
VarId branch_plane(Tape& tp, const std::map<std::string, VarId>& ids, const std::string& hp,
                   const HeadConfig& hc, VarId x, VarId k_core, const char* q_name,
                   const char* k_name, const char* m1_name) {
    VarId q = tp.matmul(x, ids.at(hp + q_name));
    if (hc.use_core_gates) q = tp.hadamard(q, tp.sigmoid(tp.matmul(x, ids.at(hp + m1_name))));
    VarId k = tp.matmul(k_core, ids.at(hp + k_name));
    if (hc.use_rope) {
        q = tp.rope_rows(q);
        k = tp.rope_rows(k);
    }
    VarId s = tp.causal_mask(tp.matmul_nt(q, k));
    if (hc.tmix_1) {
        const VarId gates = tp.sigmoid(tp.matmul(x, ids.at(hp + ".W_S1")));
        s = tp.causal_dplr_mix(s, gates, ids.at(hp + ".p1"), ids.at(hp + ".A1"),
                               ids.at(hp + ".B1"), /*transpose=*/false, hc.lag_layout);
    }
    return s;
}

VarId head_plane_forward(Tape& tp, const std::map<std::string, VarId>& ids,
                         const std::string& hp, const HeadConfig& hc, VarId x) {
    VarId k_core = x, v_core = x;
    if (hc.use_conv) {
        k_core = tp.depthwise_conv(x, ids.at(hp + ".conv_k"));
        v_core = tp.depthwise_conv(x, ids.at(hp + ".conv_v"));
    }
    VarId a = -1;
    switch (hc.base) {
    case BaseAct::Softmax:
        a = tp.causal_softmax(branch_plane(tp, ids, hp, hc, x, k_core, ".W_q", ".W_k", ".W_M1"));
        break;
    case BaseAct::ReluL2:
        a = tp.causal_relu_l2(branch_plane(tp, ids, hp, hc, x, k_core, ".W_q", ".W_k", ".W_M1"),
                              hc.eps);
        break;
    case BaseAct::Glu: {
        const VarId gate = tp.causal_relu_l2(
            branch_plane(tp, ids, hp, hc, x, k_core, ".W_q", ".W_k", ".W_M1"), hc.eps);
        const VarId scl = tp.softplus(tp.causal_mask(
            branch_plane(tp, ids, hp, hc, x, k_core, ".W_q2", ".W_k2", ".W_M1b")));
        a = tp.causal_mask(tp.hadamard(gate, scl));
        break;
    }
    }
    if (hc.tmix_2) {
        const VarId gates = tp.sigmoid(tp.matmul(x, ids.at(hp + ".W_S2")));
        a = tp.causal_dplr_mix(a, gates, ids.at(hp + ".p2"), ids.at(hp + ".A2"),
                               ids.at(hp + ".B2"), /*transpose=*/true, hc.lag_layout);
    }
    VarId o = tp.matmul(tp.matmul(a, v_core), ids.at(hp + ".W_v"));
    if (hc.use_core_gates)
        o = tp.hadamard(o, tp.sigmoid(tp.matmul(x, ids.at(hp + ".W_M2"))));
    return tp.matmul_nt(o, ids.at(hp + ".W_o"));
}
} // namespace

VarId build_logits(Tape& tape, const std::map<std::string, VarId>& ids, const ModelConfig& mc,
                   const std::vector<int>& tokens) {
    if (tokens.empty()) throw DimensionError("build_logits: empty token sequence");
    if (tokens.size() > mc.seq_len)
        throw DimensionError("build_logits: sequence longer than the configured seq_len");
    VarId x = tape.embed_rows(ids.at("embed"), tokens);
    for (std::size_t b = 0; b < mc.n_blocks; ++b) {
        const std::string blk = "blk" + std::to_string(b);
        {
            const VarId xn = tape.rmsnorm_rows(x, mc.norm_eps);
            VarId mix = head_plane_forward(tape, ids, blk + ".mix.h0", mc.head, xn);
            for (std::size_t h = 1; h < mc.head.n_head; ++h)
                mix = tape.add(mix,
                               head_plane_forward(tape, ids, blk + ".mix.h" + std::to_string(h),
                                                  mc.head, xn));
            x = tape.add(x, mix);
        }
        {
            const VarId xn = tape.rmsnorm_rows(x, mc.norm_eps);
            const VarId hidden = tape.relu(tape.matmul(xn, ids.at(blk + ".mlp.W1")));
            x = tape.add(x, tape.matmul(hidden, ids.at(blk + ".mlp.W2")));
        }
    }
    return tape.matmul(tape.rmsnorm_rows(x, mc.norm_eps), ids.at("unembed"));
}

VarId build_loss(Tape& tape, const std::map<std::string, VarId>& ids, const ModelConfig& mc,
                 const std::vector<int>& tokens, const std::vector<int>& targets,
                 const std::vector<std::uint8_t>& mask) {
    return tape.cross_entropy_masked(build_logits(tape, ids, mc, tokens), targets, mask);
}

Matrix logits_forward(const ParamMap& params, const ModelConfig& mc,
                      const std::vector<int>& tokens) {
    Tape tape;
    const auto ids = register_params(tape, params);
    return tape.value(build_logits(tape, ids, mc, tokens));
}

} // namespace hyperhead
