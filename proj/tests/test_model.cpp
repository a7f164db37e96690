#include <doctest.h>

#include <cmath>

#include "hyperhead/labels.hpp"
#include "hyperhead/model.hpp"

using namespace hyperhead;

namespace {
ModelConfig tiny_model(const std::string& label, std::size_t d = 8) {
    ModelConfig mc;
    mc.vocab = 8;
    mc.d = d;
    mc.n_blocks = 1;
    mc.seq_len = 8;
    mc.head = to_config(parse_label(label), d, 2, 2);
    return mc;
}
} // namespace

TEST_CASE("parameter init is deterministic and the count is stable") {
    const ModelConfig mc = tiny_model("R-c-12o");
    Rng r1(5), r2(5);
    const ParamMap a = init_model_params(r1, mc);
    const ParamMap b = init_model_params(r2, mc);
    CHECK(a.size() == b.size());
    for (const auto& [name, value] : a) {
        REQUIRE(b.count(name) == 1);
        CHECK(max_abs_diff(value, b.at(name)) == 0.0);
    }
    CHECK(param_count(a) == param_count(b));
    // embedding + unembedding + mlp are always present
    CHECK(a.count("embed") == 1);
    CHECK(a.count("unembed") == 1);
    CHECK(a.count("blk0.mlp.W1") == 1);
    CHECK(a.count("blk0.mix.h0.W_q") == 1);
    CHECK(a.count("blk0.mix.h1.conv_k") == 1);
    // rope-free, gate-free label stores no gate tensors
    CHECK(a.count("blk0.mix.h0.W_M1") == 0);
}

TEST_CASE("feature-inactive tensors are not allocated") {
    const ModelConfig plain = tiny_model("S");
    Rng rng(1);
    const ParamMap p = init_model_params(rng, plain);
    CHECK(p.count("blk0.mix.h0.conv_k") == 0);
    CHECK(p.count("blk0.mix.h0.p1") == 0);
    CHECK(p.count("blk0.mix.h0.W_q2") == 0);
    Rng rng2(1);
    const ParamMap g = init_model_params(rng2, tiny_model("G-g-12o"));
    CHECK(g.count("blk0.mix.h0.W_q2") == 1);
    CHECK(g.count("blk0.mix.h0.W_M1") == 1);
    CHECK(g.count("blk0.mix.h0.p1") == 1);
    CHECK(g.count("blk0.mix.h0.p2") == 1);
}

TEST_CASE("logits are causal") {
    const ModelConfig mc = tiny_model("R-cg-12o");
    Rng rng(2);
    const ParamMap params = init_model_params(rng, mc, 0.2);
    const std::vector<int> tokens{3, 1, 4, 1, 5};
    const Matrix base = logits_forward(params, mc, tokens);
    CHECK(base.rows() == 5);
    CHECK(base.cols() == 8);
    std::vector<int> edited = tokens;
    edited[4] = 7;
    const Matrix after = logits_forward(params, mc, edited);
    for (std::size_t r = 0; r + 1 < 5; ++r)
        CHECK(max_abs_diff(base.row(r), after.row(r)) == 0.0);
    CHECK(max_abs_diff(base.row(4), after.row(4)) > 0.0);
}

TEST_CASE("build_logits validates sequence length") {
    const ModelConfig mc = tiny_model("S");
    Rng rng(3);
    const ParamMap params = init_model_params(rng, mc);
    Tape tape;
    const auto ids = register_params(tape, params);
    CHECK_THROWS(build_logits(tape, ids, mc, {}));
    CHECK_THROWS(build_logits(tape, ids, mc, std::vector<int>(mc.seq_len + 1, 2)));
}

TEST_CASE("build_loss equals masked cross-entropy of the forward logits") {
    const ModelConfig mc = tiny_model("G-cg-q-12o");
    Rng rng(4);
    const ParamMap params = init_model_params(rng, mc, 0.2);
    const std::vector<int> tokens{2, 5, 1, 6};
    const std::vector<int> targets{0, 0, 6, 2};
    const std::vector<std::uint8_t> mask{0, 0, 1, 1};
    Tape tape;
    const auto ids = register_params(tape, params);
    const VarId loss = build_loss(tape, ids, mc, tokens, targets, mask);
    const Matrix logits = logits_forward(params, mc, tokens);
    double want = 0.0;
    for (std::size_t t : {std::size_t{2}, std::size_t{3}}) {
        double mx = logits(t, 0);
        for (std::size_t v = 1; v < 8; ++v) mx = std::max(mx, logits(t, v));
        double z = 0.0;
        for (std::size_t v = 0; v < 8; ++v) z += std::exp(logits(t, v) - mx);
        want += -(logits(t, static_cast<std::size_t>(targets[t])) - mx - std::log(z));
    }
    want /= 2.0;
    CHECK(tape.value(loss)(0, 0) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("tiny-model loss passes a finite-difference gradient check") {
    ModelConfig mc = tiny_model("R-c-1o", 4);
    mc.vocab = 8;
    mc.seq_len = 8;
    mc.head.r_s = 1;
    Rng rng(6);
    const ParamMap theta = init_model_params(rng, mc, 0.3);
    const std::vector<int> tokens{2, 7, 1, 3};
    const std::vector<int> targets{0, 0, 3, 5};
    const std::vector<std::uint8_t> mask{0, 0, 1, 1};
    Tape tape;
    const auto ids = register_params(tape, theta);
    tape.backward(build_loss(tape, ids, mc, tokens, targets, mask));
    ParamMap analytic;
    for (const auto& [name, value] : theta) analytic[name] = tape.param_grad(name);
    const auto f = [&](const ParamMap& th) {
        Tape t;
        const auto fresh = register_params(t, th);
        return t.value(build_loss(t, fresh, mc, tokens, targets, mask))(0, 0);
    };
    std::string worst;
    const double err = grad_check(f, theta, analytic, 1e-5, &worst);
    CAPTURE(worst);
    CHECK(err < 1e-4);
}
