#pragma once

#include <string>
#include <vector>

#include "hyperhead/model.hpp"
#include "hyperhead/tasks.hpp"

namespace hyperhead {

struct AdamState {
    ParamMap m, v; // first/second moments, lazily shaped from the gradients
    std::size_t step = 0;
};

// Textbook decoupled-weight-decay Adam with bias correction.
void adamw_step(ParamMap& params, const ParamMap& grads, AdamState& state, double lr,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double wd = 0.01);

struct TrainConfig {
    std::size_t steps = 500;
    std::size_t batch = 32;
    std::size_t eval_every = 50;
    double lr = 3e-4;
    double wd = 0.01;
    std::uint64_t seed = 0;
};

struct MetricRecord {
    std::size_t step = 0;
    double loss = 0.0;
    double eval_acc = 0.0;
};

struct TrainResult {
    std::vector<MetricRecord> metrics;
    bool diverged = false; // loss went non-finite; training stopped early
    double final_eval_acc = 0.0;
};

// Exact-match rate on masked target positions.
double eval_accuracy(const ParamMap& params, const ModelConfig& mc, const Dataset& eval_set);

// Deterministic training loop: fixed batch order from the seed, gradients
// averaged over the batch in a fixed reduction order.
TrainResult train_model(ParamMap& params, const ModelConfig& mc, const TaskSpec& task,
                        const TrainConfig& tc);

// CSV with header step,loss,eval_acc; written to a temp file then renamed.
void write_metrics_csv(const std::string& path, const std::vector<MetricRecord>& metrics);

} // namespace hyperhead
