#include "hyperhead/verify.hpp"

#include <algorithm>
#include <cmath>

#include "hyperhead/blocked.hpp"
#include "hyperhead/labels.hpp"
#include "hyperhead/memory.hpp"

namespace hyperhead {

namespace {
double rel_residual(const Matrix& got, const Matrix& ref) {
    return max_abs_diff(got, ref) / (max_abs(ref) + 1e-30);
}

double sigmoid_scalar(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

CheckResult make_result(std::string name, bool pass, double residual, std::string detail) {
    return CheckResult{std::move(name), pass, residual, std::move(detail)};
}
} // namespace

HeadConfig sample_config(Rng& rng, const ConfigSampler& opts) {
    HeadConfig c;
    c.d = 4 * (1 + rng.next_below(4)); // 4..16
    c.n_head = 1;
    c.r_s = 1 + rng.next_below(8);
    c.eps = 1e-12;
    if (opts.force_relu_l2) {
        c.base = BaseAct::ReluL2;
    } else {
        std::vector<BaseAct> bases{BaseAct::ReluL2};
        if (opts.allow_softmax) bases.push_back(BaseAct::Softmax);
        if (opts.allow_glu) bases.push_back(BaseAct::Glu);
        c.base = bases[rng.next_below(bases.size())];
    }
    c.use_rope = opts.allow_rope && rng.next_below(2) == 0;
    c.use_conv = opts.allow_conv && rng.next_below(2) == 0;
    c.use_core_gates = rng.next_below(2) == 0;
    if (opts.force_tmix) {
        c.tmix_1 = c.tmix_2 = true;
    } else {
        c.tmix_1 = rng.next_below(2) == 0;
        c.tmix_2 = rng.next_below(2) == 0;
    }
    c.lag_layout = opts.force_lag_layout || (!opts.force_forward_layout && rng.next_below(2) == 0);
    // rank choices; rotations need an even (Glu: divisible-by-4) routing rank
    c.d_qk = c.use_rope ? (c.base == BaseAct::Glu ? 4 : 2) * (1 + rng.next_below(2))
                        : 1 + rng.next_below(c.d);
    if (c.base == BaseAct::Glu && !c.use_rope) c.d_qk = std::max<std::size_t>(c.d_qk, 2);
    c.d_vo = 1 + rng.next_below(c.d);
    return c;
}

HeadParams sample_params(Rng& rng, const HeadConfig& config, std::size_t L_max) {
    HeadParams p = init_head_params(rng, config, L_max, 0.5);
    p.dplr1.p = rng.normal_matrix(L_max, 1, 0.3);
    p.dplr2.p = rng.normal_matrix(L_max, 1, 0.3);
    return p;
}

namespace {
// ---------------------------------------------------------------- dplr ----

CheckResult check_dplr_fast_dense(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t t = 1 + rng.next_below(128);
        const std::size_t r_s = 1 + rng.next_below(32);
        const std::size_t d = 4 + rng.next_below(13);
        DPLRParams params = init_dplr(rng, t, r_s, d, 0.5);
        params.p = rng.normal_matrix(t, 1, 0.5);
        const Matrix x = rng.normal_matrix(1, d, 1.0);
        const Matrix s = gate_vector(x, params);
        const Matrix r = materialize(params, s, t);
        const Matrix y = rng.normal_matrix(1, t, 1.0);
        worst = std::max(worst, rel_residual(mix_right(y, params, s), matmul(y, r)));
        worst = std::max(worst,
                         rel_residual(mix_right_transpose(y, params, s), matmul_nt(y, r)));
        const Matrix xl = rng.normal_matrix(t, d, 1.0);
        worst = std::max(worst, rel_residual(mix_rows(xl, params, s, true), matmul_tn(r, xl)));
        worst = std::max(worst, rel_residual(mix_rows(xl, params, s, false), matmul(r, xl)));
    }
    return make_result("dplr.fast_dense_equivalence", worst < 1e-12, worst,
                       "mix_right/mix_right_transpose/mix_rows vs dense operator, 200 trials");
}

CheckResult check_dplr_extension(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t t = 1 + rng.next_below(16);
        const std::size_t T = t + rng.next_below(16);
        const std::size_t r_s = 1 + rng.next_below(8);
        DPLRParams params = init_dplr(rng, t, r_s, 6, 0.5);
        params.p = rng.normal_matrix(t, 1, 0.5);
        const Matrix s = rng.uniform_matrix(1, r_s, 0.0, 1.0);
        const Matrix small = materialize(params, s, t);
        const Matrix big = materialize(extend(params, t, T), s, T);
        Matrix embedded(T, T);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j < t; ++j) embedded(i, j) = small(i, j);
        worst = std::max(worst, max_abs_diff(big, embedded));
    }
    return make_result("dplr.extension_consistency", worst == 0.0, worst,
                       "materialize(extend(params)) equals the zero-padded embedding exactly");
}

CheckResult check_dplr_op_count(std::uint64_t seed) {
    Rng rng(seed);
    bool pass = true;
    std::uint64_t worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t t = 1 + rng.next_below(128);
        const std::size_t r_s = 1 + rng.next_below(32);
        DPLRParams params = init_dplr(rng, t, r_s, 4, 0.5);
        const Matrix s = rng.uniform_matrix(1, r_s, 0.0, 1.0);
        const Matrix y = rng.normal_matrix(1, t, 1.0);
        MulCounter counter;
        mix_right(y, params, s, &counter);
        const std::uint64_t budget = 2 * t * r_s + t + r_s;
        if (counter.mults > budget) pass = false;
        worst = std::max(worst, counter.mults);
    }
    return make_result("dplr.op_count", pass, static_cast<double>(worst),
                       "mix_right multiply count <= 2*t*r_s + t + r_s");
}

// ---------------------------------------------------------------- head ----

std::vector<bool> active_set(const Matrix& a) {
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a.data()[i] > 0.0;
    return out;
}

CheckResult check_gate_invariance(std::uint64_t seed) {
    Rng rng(seed);
    int violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t t = 1 + rng.next_below(16);
        const Matrix z = rng.normal_matrix(1, t, 1.0);
        const double lambda = std::exp(rng.normal_matrix(1, 1, 2.0)(0, 0));
        if (active_set(act_relu_l2(z, 1e-12)) != active_set(act_relu_l2(scale(z, lambda), 1e-12)))
            ++violations;
    }
    return make_result("head.gate_invariance", violations == 0, violations,
                       "active set unchanged under positive rescaling, 1000 trials");
}

CheckResult check_dynamic_mlp(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const HeadConfig config = sample_config(rng, ConfigSampler{});
        const std::size_t t = 1 + rng.next_below(12);
        const HeadParams params = sample_params(rng, config, t + 4);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        worst = std::max(worst, rel_residual(head_forward(x, ctx, params, config),
                                             materialized_forward(x, ctx, params, config)));
    }
    return make_result("head.dynamic_mlp_equivalence", worst < 1e-12, worst,
                       "head_forward vs explicitly materialized dynamic weights, 100 trials");
}

// Straight-line conventional attention (no modifiers) as an external oracle.
Matrix plain_attention(const Matrix& x, const Matrix& lag_rows, const HeadParams& p,
                       bool use_softmax, double eps) {
    const Matrix q = matmul(x, p.W_q);
    Matrix h(1, lag_rows.rows());
    for (std::size_t i = 0; i < lag_rows.rows(); ++i) {
        const Matrix k = matmul(lag_rows.row(i), p.W_k);
        double acc = 0.0;
        for (std::size_t c = 0; c < q.cols(); ++c) acc += q(0, c) * k(0, c);
        h(0, i) = acc;
    }
    const Matrix a = use_softmax ? softmax_row(h) : act_relu_l2(h, eps);
    Matrix o(1, x.cols());
    for (std::size_t i = 0; i < lag_rows.rows(); ++i)
        add_inplace(o, scale(matmul_nt(matmul(lag_rows.row(i), p.W_v), p.W_o), a(0, i)));
    return o;
}

CheckResult check_baseline_recovery(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        HeadConfig config;
        config.d = 8;
        config.n_head = 1;
        config.d_qk = 1 + rng.next_below(8);
        config.d_vo = 1 + rng.next_below(8);
        config.r_s = 4;
        config.base = trial % 2 == 0 ? BaseAct::Softmax : BaseAct::ReluL2;
        const std::size_t t = 1 + rng.next_below(10);
        const HeadParams params = sample_params(rng, config, t);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        worst = std::max(
            worst, rel_residual(head_forward(x, ctx, params, config),
                                plain_attention(x, ctx.rows(), params,
                                                config.base == BaseAct::Softmax, config.eps)));
    }
    return make_result("head.baseline_recovery", worst < 1e-12, worst,
                       "modifier-free configs reproduce plain softmax/ReLU attention");
}

CheckResult check_glu_decoupling(std::uint64_t seed) {
    Rng rng(seed);
    int violations = 0, tested = 0;
    while (tested < 1000) {
        ConfigSampler opts;
        opts.allow_softmax = false;
        HeadConfig config = sample_config(rng, opts);
        config.base = BaseAct::Glu;
        if (config.use_rope && glu_branch_rank(config) % 2 != 0) config.use_rope = false;
        const std::size_t t = 1 + rng.next_below(10);
        HeadParams params = sample_params(rng, config, t + 2);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        const Matrix h_gate = score(x, ctx, params, config);
        double margin = 1e300;
        for (std::size_t i = 0; i < h_gate.size(); ++i)
            margin = std::min(margin, std::abs(h_gate.data()[i]));
        if (margin <= 1e-9) continue; // require a strict gate margin
        ++tested;
        const Matrix base = head_forward(x, ctx, params, config);
        const auto base_active = active_set(h_gate);
        // arbitrary scale-branch perturbation
        add_inplace(params.W_q2, rng.normal_matrix(params.W_q2.rows(), params.W_q2.cols(), 1.0));
        add_inplace(params.W_k2, rng.normal_matrix(params.W_k2.rows(), params.W_k2.cols(), 1.0));
        if (config.use_core_gates)
            add_inplace(params.W_M1b,
                        rng.normal_matrix(params.W_M1b.rows(), params.W_M1b.cols(), 1.0));
        if (active_set(score(x, ctx, params, config)) != base_active) ++violations;
        (void)base;
    }
    return make_result("head.glu_decoupling", violations == 0, violations,
                       "scale-branch perturbations never change the active set (margin > 0)");
}

CheckResult check_causality(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const HeadConfig config = sample_config(rng, ConfigSampler{});
        const std::size_t T = 4 + rng.next_below(12);
        std::vector<HeadParams> heads{sample_params(rng, config, T)};
        Matrix seq = rng.normal_matrix(T, config.d, 1.0);
        const Matrix out = seq_forward(seq, heads, config);
        const std::size_t cut = 1 + rng.next_below(T - 1);
        for (std::size_t r = cut; r < T; ++r)
            seq.set_row(r, rng.normal_matrix(1, config.d, 1.0));
        const Matrix out2 = seq_forward(seq, heads, config);
        for (std::size_t r = 0; r < cut; ++r)
            worst = std::max(worst, max_abs_diff(out.row(r), out2.row(r)));
    }
    return make_result("head.causality", worst == 0.0, worst,
                       "rows <= t bit-identical after rewriting all tokens > t");
}

CheckResult check_incremental(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const HeadConfig config = sample_config(rng, ConfigSampler{});
        const std::size_t T = 2 + rng.next_below(12);
        std::vector<HeadParams> heads{sample_params(rng, config, T)};
        const Matrix seq = rng.normal_matrix(T, config.d, 1.0);
        const Matrix batch = seq_forward(seq, heads, config);
        for (std::size_t t = 0; t < T; ++t) {
            // fresh context per step (no reuse of the incremental cache path)
            Matrix prefix(t + 1, config.d);
            for (std::size_t r = 0; r <= t; ++r) prefix.set_row(r, seq.row(r));
            const Matrix o =
                multihead_forward(seq.row(t), from_forward(prefix), heads, config);
            worst = std::max(worst, max_abs_diff(batch.row(t), o));
        }
    }
    return make_result("head.incremental_equivalence", worst == 0.0, worst,
                       "teacher forcing equals one-token-at-a-time decoding bit-for-bit");
}

// -------------------------------------------------------------- memory ----

ConfigSampler pool_sampler() {
    ConfigSampler opts;
    opts.force_relu_l2 = true;
    opts.allow_rope = false; // slots live in model space; rotations do not
    return opts;
}

CheckResult check_pool_readout(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const HeadConfig config = sample_config(rng, pool_sampler());
        const std::size_t t = 1 + rng.next_below(12);
        const HeadParams params = sample_params(rng, config, t + 4);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        const MemoryPoolView view = instantiate_pool(x, ctx, params, config);
        worst = std::max(worst, rel_residual(readout_via_pool(view, x, params, config),
                                             head_forward(x, ctx, params, config)));
    }
    return make_result("memory.readout_equivalence", worst < 1e-10, worst,
                       "gated slot-sum equals head_forward (ReluL2), 100 trials");
}

CheckResult check_tv_contraction(std::uint64_t seed) {
    Rng rng(seed);
    int violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const HeadConfig config = sample_config(rng, pool_sampler());
        const std::size_t t = 1 + rng.next_below(12);
        const HeadParams params = sample_params(rng, config, t + 4);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        const MemoryPoolView view = instantiate_pool(x, ctx, params, config);
        if (tv_mass(view, MassKind::Activated) > tv_mass(view, MassKind::Pool)) ++violations;
        if (tv_mass(view, MassKind::Pool) != t) ++violations;
        for (std::size_t i = 0; i < view.size(); ++i)
            if (view.gates[i] != (view.alpha(0, i) > 0.0)) ++violations;
    }
    return make_result("memory.tv_contraction", violations == 0, violations,
                       "activated mass <= pool mass = t; gates match alpha > 0");
}

CheckResult check_truncation_extension(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    int slot_violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ConfigSampler opts = pool_sampler();
        opts.allow_conv = false; // conv windows would cross the truncation edge
        opts.force_tmix = true;
        opts.force_lag_layout = true;
        const HeadConfig config = sample_config(rng, opts);
        const std::size_t t = 2 + rng.next_below(8);
        const std::size_t T = 2 * t;
        HeadParams params = sample_params(rng, config, t);
        HeadParams big = params;
        big.dplr1 = extend(params.dplr1, t, T);
        big.dplr2 = extend(params.dplr2, t, T);
        Matrix hist(T, config.d);
        const Matrix recent = rng.normal_matrix(t, config.d, 1.0);
        for (std::size_t r = 0; r < t; ++r) hist.set_row(r, recent.row(r));
        for (std::size_t r = t; r < T; ++r)
            hist.set_row(r, rng.normal_matrix(1, config.d, 1.0)); // ignorable older tokens
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        const MemoryPoolView big_view = instantiate_pool(x, LagContext(hist), big, config);
        for (std::size_t i = t; i < T; ++i)
            if (max_abs(big_view.u.row(i)) != 0.0 || max_abs(big_view.v.row(i)) != 0.0)
                ++slot_violations;
        worst = std::max(
            worst,
            max_abs_diff(readout_via_pool(big_view, x, big, config),
                         head_forward(x, LagContext(recent), params, config)));
    }
    return make_result("memory.truncation_extension",
                       worst < 1e-10 && slot_violations == 0, worst,
                       "extended history adds exactly-zero slots and identical readout");
}

CheckResult check_static_polyhedral(std::uint64_t seed) {
    (void)seed;
    const double c = 4.0;
    const WarpedExample warped = warped_boundary_example(c);
    const WarpedExample control = make_static_control(c);
    auto gate_of = [](const WarpedExample& ex) {
        return [&ex](double a, double b) { return ex.slot2_active(a, b); };
    };
    const double res_static =
        collinearity_residual(boundary_points(gate_of(control), -2.0, 2.0, 0.05));
    const double res_warped =
        collinearity_residual(boundary_points(gate_of(warped), -2.0, 2.0, 0.05));
    const bool pass = res_static < 1e-3 && res_warped > 1e-3;
    return make_result("memory.static_polyhedral", pass, res_warped,
                       "static gate boundary collinear (residual " + std::to_string(res_static) +
                           "), warped boundary curved (residual " + std::to_string(res_warped) +
                           ")");
}

CheckResult check_register_additivity(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    int mass_violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        ConfigSampler opts = pool_sampler();
        opts.allow_conv = false;
        const HeadConfig base_cfg = sample_config(rng, opts);
        HeadConfig config = base_cfg;
        config.tmix_1 = config.tmix_2 = false; // identity mixers
        const std::size_t t = 1 + rng.next_below(8);
        const std::size_t k = rng.next_below(4);
        const HeadParams params = sample_params(rng, config, t + k);
        const LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const Matrix regs = rng.normal_matrix(k, config.d, 1.0);
        const Matrix x = rng.normal_matrix(1, config.d, 1.0);
        const MemoryPoolView before = instantiate_pool(x, ctx, params, config);
        const MemoryPoolView after =
            instantiate_pool(x, append_registers(ctx, regs), params, config);
        if (tv_mass(after, MassKind::Pool) != t + k) ++mass_violations;
        for (std::size_t i = 0; i < t; ++i) {
            worst = std::max(worst, max_abs_diff(before.u.row(i), after.u.row(i)));
            worst = std::max(worst, max_abs_diff(before.v.row(i), after.v.row(i)));
        }
        for (std::size_t i = 0; i < k; ++i) {
            worst = std::max(worst, max_abs_diff(after.u.row(t + i), regs.row(i)));
            worst = std::max(worst, max_abs_diff(after.v.row(t + i), regs.row(i)));
        }
    }
    return make_result("memory.register_additivity", worst == 0.0 && mass_violations == 0, worst,
                       "k registers add exactly k atoms (R_i, R_i); first t slots untouched");
}

// ------------------------------------------------------------- blocked ----

CheckResult check_layout_bijectivity(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    int shape_violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t T = 1 + rng.next_below(24);
        const std::size_t M = 1 + rng.next_below(T);
        const std::size_t row_start = rng.next_below(T - M + 1);
        Matrix left = rng.normal_matrix(M, T, 1.0);
        for (std::size_t m = 0; m < M; ++m) // causal-masked input
            for (std::size_t c = row_start + m + 1; c < T; ++c) left(m, c) = 0.0;
        const OffsetBlock off = to_offset(left, row_start, T);
        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t r = row_start + m;
            for (std::size_t tau = 0; tau + r < T - 1; ++tau)
                if (off.data(m, tau) != 0.0) ++shape_violations; // left padding
            if (off.data(m, T - 1) != left(m, r)) ++shape_violations; // diagonal at last column
        }
        worst = std::max(worst, max_abs_diff(from_offset(off), left));
    }
    return make_result("blocked.layout_bijectivity", worst == 0.0 && shape_violations == 0,
                       worst, "offset roundtrip exact; padding and diagonal placement verified");
}

CheckResult check_blocked_naive(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t d = 32, T = 96;
    double worst = 0.0;
    std::string worst_label;
    for (const std::string& name : table1_labels()) {
        const Label label = parse_label(name);
        const HeadConfig config = to_config(label, d, 2, 16);
        Rng init(seed ^ std::hash<std::string>{}(name));
        std::vector<HeadParams> heads;
        for (std::size_t h = 0; h < config.n_head; ++h)
            heads.push_back(sample_params(init, config, T));
        const Matrix seq = rng.normal_matrix(T, d, 1.0);
        const Matrix naive = seq_forward(seq, heads, config);
        for (std::size_t M : {std::size_t{1}, std::size_t{7}, std::size_t{32}, T}) {
            const double r = rel_residual(blocked_seq_forward(seq, heads, config, M), naive);
            if (r > worst) {
                worst = r;
                worst_label = name + " M=" + std::to_string(M);
            }
        }
    }
    return make_result("blocked.blocked_naive_equivalence", worst < 1e-12, worst,
                       "all study labels, M in {1,7,32,T}; worst at " + worst_label);
}

CheckResult check_remask_idempotence(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t T = 2 + rng.next_below(24);
        const std::size_t M = 1 + rng.next_below(T);
        const std::size_t row_start = rng.next_below(T - M + 1);
        const Matrix plane = rng.normal_matrix(M, T, 1.0);
        auto masked = [&](Matrix p) {
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t c = row_start + m + 1; c < T; ++c) p(m, c) = 0.0;
            return p;
        };
        worst = std::max(worst, max_abs_diff(masked(plane), masked(masked(plane))));
    }
    return make_result("blocked.remask_idempotence", worst == 0.0, worst,
                       "applying the causal predicate twice equals once");
}
} // namespace

const std::vector<std::pair<std::string, CheckFn>>& verification_registry() {
    static const std::vector<std::pair<std::string, CheckFn>> registry = {
        {"dplr.fast_dense_equivalence", check_dplr_fast_dense},
        {"dplr.extension_consistency", check_dplr_extension},
        {"dplr.op_count", check_dplr_op_count},
        {"head.gate_invariance", check_gate_invariance},
        {"head.dynamic_mlp_equivalence", check_dynamic_mlp},
        {"head.baseline_recovery", check_baseline_recovery},
        {"head.glu_decoupling", check_glu_decoupling},
        {"head.causality", check_causality},
        {"head.incremental_equivalence", check_incremental},
        {"memory.readout_equivalence", check_pool_readout},
        {"memory.tv_contraction", check_tv_contraction},
        {"memory.truncation_extension", check_truncation_extension},
        {"memory.static_polyhedral", check_static_polyhedral},
        {"memory.register_additivity", check_register_additivity},
        {"blocked.layout_bijectivity", check_layout_bijectivity},
        {"blocked.blocked_naive_equivalence", check_blocked_naive},
        {"blocked.remask_idempotence", check_remask_idempotence},
    };
    return registry;
}

std::vector<CheckResult> run_verification(const std::string& filter, std::uint64_t seed) {
    std::vector<CheckResult> results;
    for (const auto& [name, fn] : verification_registry()) {
        if (!filter.empty() && name.find(filter) == std::string::npos) continue;
        results.push_back(fn(seed));
    }
    return results;
}

} // namespace hyperhead
