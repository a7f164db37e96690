#include "hyperhead/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hyperhead {

void adamw_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr,
                double beta1, double beta2, double eps, double wd) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (auto& [name, w] : params) {
        const auto git = grads.find(name);
        if (git == grads.end()) throw std::invalid_argument("adamw_step: missing grad " + name);
        const Matrix& g = git->second;
        if (!w.same_shape(g)) throw DimensionError("adamw_step: shape mismatch at " + name);
        Matrix& m = state.m.try_emplace(name, w.rows(), w.cols()).first->second;
        Matrix& v = state.v.try_emplace(name, w.rows(), w.cols()).first->second;
        for (std::size_t i = 0; i < w.size(); ++i) {
            m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * g.data()[i];
            v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * g.data()[i] * g.data()[i];
            const double mhat = m.data()[i] / bc1;
            const double vhat = v.data()[i] / bc2;
            w.data()[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * w.data()[i]);
        }
    }
}

double eval_accuracy(const ParamMap& params, const ModelConfig& mc, const Dataset& eval_set) {
    std::size_t hits = 0, total = 0;
    for (const Sample& s : eval_set) {
        const Matrix logits = logits_forward(params, mc, s.input);
        for (std::size_t t = 0; t < s.input.size(); ++t) {
            if (!s.mask[t]) continue;
            std::size_t best = 0;
            for (std::size_t c = 1; c < logits.cols(); ++c)
                if (logits(t, c) > logits(t, best)) best = c;
            ++total;
            hits += (static_cast<int>(best) == s.target[t]) ? 1 : 0;
        }
    }
    if (total == 0) throw std::invalid_argument("eval_accuracy: no masked positions");
    return static_cast<double>(hits) / static_cast<double>(total);
}

namespace {
// Loss + parameter gradients of one sample on a private tape.
double sample_grads(const ParamMap& params, const ModelConfig& mc, const Sample& s,
                    ParamMap& grads_out) {
    Tape tape;
    const auto ids = register_params(tape, params);
    const VarId loss = build_loss(tape, ids, mc, s.input, s.target, s.mask);
    tape.backward(loss);
    for (const auto& [name, id] : ids) grads_out[name] = tape.grad(id);
    return tape.value(loss)(0, 0);
}

void accumulate(ParamMap& into, const ParamMap& from) {
    for (const auto& [name, g] : from) {
        auto it = into.find(name);
        if (it == into.end())
            into[name] = g;
        else
            add_inplace(it->second, g);
    }
}
} // namespace

TrainResult train_model(ParamMap& params, const ModelConfig& mc, const TaskSpec& task,
                        const TrainConfig& tc) {
    if (tc.steps < 1) throw std::invalid_argument("train_model: steps must be >= 1");
    const auto [train_set, eval_set] = gen_task(task);
    if (train_set.empty()) throw std::invalid_argument("train_model: empty training set");
    Rng batch_rng(tc.seed * 0x9E3779B97F4A7C15ULL + 1);
    AdamState state;
    TrainResult result;
    for (std::size_t step = 1; step <= tc.steps; ++step) {
        std::vector<std::size_t> batch(tc.batch);
        for (auto& b : batch) b = batch_rng.next_below(train_set.size());
        std::vector<ParamMap> partial(batch.size());
        std::vector<double> losses(batch.size(), 0.0);
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < batch.size(); ++i)
            losses[i] = sample_grads(params, mc, train_set[batch[i]], partial[i]);
        ParamMap grads;
        double loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) { // fixed reduction order
            accumulate(grads, partial[i]);
            loss += losses[i];
        }
        const double inv = 1.0 / static_cast<double>(batch.size());
        for (auto& [name, g] : grads) g = scale(g, inv);
        loss *= inv;
        if (!std::isfinite(loss)) {
            result.diverged = true;
            result.metrics.push_back({step, loss, 0.0});
            break;
        }
        adamw_step(params, grads, state, tc.lr, 0.9, 0.999, 1e-8, tc.wd);
        if (step % tc.eval_every == 0 || step == tc.steps) {
            const double acc = eval_accuracy(params, mc, eval_set);
            result.metrics.push_back({step, loss, acc});
            result.final_eval_acc = acc;
        }
    }
    return result;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricRecord>& metrics) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + tmp);
        out << "step,loss,eval_acc\n";
        char line[96];
        for (const MetricRecord& m : metrics) {
            std::snprintf(line, sizeof line, "%zu,%.10g,%.10g\n", m.step, m.loss, m.eval_acc);
            out << line;
        }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_metrics_csv: rename to " + path + " failed");
}

} // namespace hyperhead
