#include <doctest.h>

#include <functional>
#include <map>

#include "hyperhead/rng.hpp"
#include "hyperhead/tape.hpp"

using namespace hyperhead;

namespace {

using Builder = std::function<VarId(Tape&, const std::map<std::string, VarId>&)>;

// Build the graph, run backward on the scalar output, and compare every
// parameter gradient against central finite differences.
double check_builder(const ParamMap& theta, const Builder& build, double h = 1e-5) {
    Tape tape;
    std::map<std::string, VarId> ids;
    for (const auto& [name, value] : theta) ids[name] = tape.param(name, value);
    tape.backward(build(tape, ids));
    ParamMap analytic;
    for (const auto& [name, value] : theta) analytic[name] = tape.param_grad(name);
    const auto f = [&](const ParamMap& th) {
        Tape t;
        std::map<std::string, VarId> fresh;
        for (const auto& [name, value] : th) fresh[name] = t.param(name, value);
        return t.value(build(t, fresh))(0, 0);
    };
    return grad_check(f, theta, analytic, h);
}

} // namespace

TEST_CASE("linear map has the exact analytic gradient") {
    Rng rng(1);
    const Matrix x = rng.normal_matrix(1, 6, 1.0);
    ParamMap theta{{"w", rng.normal_matrix(6, 1, 1.0)}};
    Tape tape;
    const VarId w = tape.param("w", theta["w"]);
    tape.backward(tape.matmul(tape.constant(x), w));
    CHECK(max_abs_diff(tape.param_grad("w"), x.transpose()) < 1e-12);
    CHECK(check_builder(theta, [&](Tape& t, const auto& ids) {
              return t.matmul(t.constant(x), ids.at("w"));
          }) < 1e-9);
}

TEST_CASE("unused parameters get an exactly zero gradient") {
    Rng rng(2);
    Tape tape;
    const VarId used = tape.param("used", rng.normal_matrix(1, 3, 1.0));
    tape.param("dead", rng.normal_matrix(4, 4, 1.0));
    tape.backward(tape.sum_squares(used));
    CHECK(max_abs(tape.param_grad("dead")) == 0.0);
    CHECK(max_abs(tape.param_grad("used")) > 0.0);
}

TEST_CASE("elementwise primitives pass a finite-difference check") {
    Rng rng(3);
    const ParamMap theta{{"a", rng.normal_matrix(3, 4, 1.0)},
                         {"b", rng.normal_matrix(3, 4, 1.0)}};
    const auto unary = [&](auto op) {
        return check_builder(theta, [op](Tape& t, const auto& ids) {
            return t.sum_squares((t.*op)(ids.at("a")));
        });
    };
    CHECK(unary(&Tape::sigmoid) < 1e-5);
    CHECK(unary(&Tape::softplus) < 1e-5);
    CHECK(unary(&Tape::relu) < 1e-4); // kinks tolerated, inputs are generic
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.hadamard(ids.at("a"), ids.at("b")));
          }) < 1e-5);
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.sub(t.scale(ids.at("a"), 1.7), ids.at("b")));
          }) < 1e-5);
}

TEST_CASE("matmul variants pass a finite-difference check") {
    Rng rng(4);
    const ParamMap theta{{"a", rng.normal_matrix(3, 5, 1.0)},
                         {"b", rng.normal_matrix(5, 2, 1.0)}};
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.matmul(ids.at("a"), ids.at("b")));
          }) < 1e-5);
    const ParamMap theta_nt{{"a", rng.normal_matrix(3, 5, 1.0)},
                            {"b", rng.normal_matrix(2, 5, 1.0)}};
    CHECK(check_builder(theta_nt, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.matmul_nt(ids.at("a"), ids.at("b")));
          }) < 1e-5);
    const ParamMap theta_tn{{"a", rng.normal_matrix(5, 3, 1.0)},
                            {"b", rng.normal_matrix(5, 2, 1.0)}};
    CHECK(check_builder(theta_tn, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.matmul_tn(ids.at("a"), ids.at("b")));
          }) < 1e-5);
}

TEST_CASE("causal plane primitives pass a finite-difference check") {
    Rng rng(5);
    const ParamMap theta{{"a", rng.normal_matrix(5, 5, 1.0)}};
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.causal_mask(ids.at("a")));
          }) < 1e-5);
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.causal_softmax(ids.at("a")));
          }) < 1e-5);
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.causal_relu_l2(ids.at("a"), 1e-6));
          }, 1e-6) < 1e-4);
}

TEST_CASE("rope_rows and depthwise_conv pass a finite-difference check") {
    Rng rng(6);
    const ParamMap theta{{"a", rng.normal_matrix(5, 6, 1.0)}};
    CHECK(check_builder(theta, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.rope_rows(ids.at("a")));
          }) < 1e-5);
    const ParamMap theta_conv{{"x", rng.normal_matrix(7, 3, 1.0)},
                              {"k", rng.normal_matrix(3, 4, 1.0)}};
    CHECK(check_builder(theta_conv, [](Tape& t, const auto& ids) {
              return t.sum_squares(t.depthwise_conv(ids.at("x"), ids.at("k")));
          }) < 1e-5);
}

TEST_CASE("causal_dplr_mix passes a finite-difference check in all four modes") {
    Rng rng(7);
    const std::size_t t = 5, r_s = 2;
    const ParamMap theta{{"plane", rng.normal_matrix(t, t, 1.0)},
                         {"gates", rng.uniform_matrix(t, r_s, 0.05, 0.95)},
                         {"p", rng.normal_matrix(t, 1, 0.5)},
                         {"A", rng.normal_matrix(t, r_s, 0.7)},
                         {"B", rng.normal_matrix(t, r_s, 0.7)}};
    for (const bool transpose : {false, true})
        for (const bool lag : {false, true}) {
            CAPTURE(transpose);
            CAPTURE(lag);
            CHECK(check_builder(theta, [=](Tape& tp, const auto& ids) {
                      const VarId masked = tp.causal_mask(ids.at("plane"));
                      return tp.sum_squares(tp.causal_dplr_mix(masked, ids.at("gates"),
                                                               ids.at("p"), ids.at("A"),
                                                               ids.at("B"), transpose, lag));
                  }) < 1e-5);
        }
}

TEST_CASE("rmsnorm, embedding and masked cross-entropy pass a finite-difference check") {
    Rng rng(8);
    const ParamMap theta{{"a", rng.normal_matrix(4, 6, 1.0)}};
    // weight the normalized rows so the reduction is not scale-invariant
    const Matrix w = rng.normal_matrix(4, 6, 1.0);
    CHECK(check_builder(theta, [&w](Tape& t, const auto& ids) {
              return t.sum_squares(t.hadamard(t.rmsnorm_rows(ids.at("a"), 1e-8), t.constant(w)));
          }) < 1e-5);
    const ParamMap theta_lm{{"table", rng.normal_matrix(7, 4, 1.0)},
                            {"unembed", rng.normal_matrix(4, 7, 1.0)}};
    const std::vector<int> ids_in{2, 0, 5, 2};
    const std::vector<int> targets{0, 5, 2, 1};
    const std::vector<std::uint8_t> mask{0, 1, 1, 1};
    CHECK(check_builder(theta_lm, [&](Tape& t, const auto& ids) {
              const VarId h = t.embed_rows(ids.at("table"), ids_in);
              const VarId logits = t.matmul(h, ids.at("unembed"));
              return t.cross_entropy_masked(logits, targets, mask);
          }) < 1e-5);
}

TEST_CASE("backward replay is bit-deterministic") {
    Rng rng(9);
    const ParamMap theta{{"a", rng.normal_matrix(4, 4, 1.0)},
                         {"b", rng.normal_matrix(4, 4, 1.0)}};
    const auto run = [&]() {
        Tape t;
        const VarId a = t.param("a", theta.at("a"));
        const VarId b = t.param("b", theta.at("b"));
        const VarId plane = t.causal_softmax(t.matmul_nt(a, b));
        t.backward(t.sum_squares(t.matmul(plane, t.sigmoid(b))));
        return std::pair{t.param_grad("a"), t.param_grad("b")};
    };
    const auto [ga1, gb1] = run();
    const auto [ga2, gb2] = run();
    CHECK(max_abs_diff(ga1, ga2) == 0.0);
    CHECK(max_abs_diff(gb1, gb2) == 0.0);
}

TEST_CASE("full head-shaped composition passes a finite-difference check") {
    Rng rng(10);
    const std::size_t d = 8, t = 5, r_s = 2, dq = 4, dv = 4;
    const Matrix seq = rng.normal_matrix(t, d, 1.0);
    ParamMap theta{{"W_q", rng.normal_matrix(d, dq, 0.3)},
                   {"W_k", rng.normal_matrix(d, dq, 0.3)},
                   {"W_v", rng.normal_matrix(d, dv, 0.3)},
                   {"W_o", rng.normal_matrix(d, dv, 0.3)},
                   {"W_M1", rng.normal_matrix(d, dq, 0.3)},
                   {"W_S", rng.normal_matrix(d, r_s, 0.3)},
                   {"p", rng.normal_matrix(t, 1, 0.3)},
                   {"A", rng.normal_matrix(t, r_s, 0.5)},
                   {"B", rng.normal_matrix(t, r_s, 0.5)}};
    const Builder head = [&](Tape& tp, const auto& ids) {
        const VarId x = tp.constant(seq);
        const VarId q = tp.hadamard(tp.matmul(x, ids.at("W_q")),
                                    tp.sigmoid(tp.matmul(x, ids.at("W_M1"))));
        const VarId k = tp.matmul(x, ids.at("W_k"));
        const VarId gates = tp.sigmoid(tp.matmul(x, ids.at("W_S")));
        const VarId plane = tp.causal_dplr_mix(tp.causal_mask(tp.matmul_nt(q, k)), gates,
                                               ids.at("p"), ids.at("A"), ids.at("B"),
                                               /*transpose=*/false, /*lag_indexed=*/true);
        const VarId a = tp.causal_relu_l2(plane, 1e-6);
        const VarId o = tp.matmul_nt(tp.matmul(a, tp.matmul(x, ids.at("W_v"))), ids.at("W_o"));
        return tp.sum_squares(o);
    };
    CHECK(check_builder(theta, head, 1e-6) < 1e-4);
}
