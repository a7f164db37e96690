#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hyperhead/rng.hpp"

namespace hyperhead {

enum class TaskKind { SelectiveCopy, InContextRecall, NoisyRecall, Compression };

TaskKind parse_task_kind(const std::string& name); // snake_case names
std::string task_kind_name(TaskKind kind);

// One teacher-forced example: the model reads input[t] and must predict
// target[t] wherever mask[t] != 0.
struct Sample {
    std::vector<int> input;
    std::vector<int> target;
    std::vector<std::uint8_t> mask;
};

using Dataset = std::vector<Sample>;

// Token conventions: 0 = noise/padding, 1 = delimiter/query marker, content
// tokens from 2 upward (recall tasks split [2, vocab) into key and value
// halves).
struct TaskSpec {
    TaskKind kind = TaskKind::InContextRecall;
    std::size_t vocab = 16;
    std::size_t seq_len = 64;
    std::size_t n_train = 2048;
    std::size_t n_eval = 256;
    std::uint64_t seed = 0;
    double noise_frac = 0.25; // NoisyRecall: fraction of distractor pairs
    std::size_t n_pairs = 0;  // recall tasks; 0 = as many as the length allows
    std::size_t n_copy = 4;   // SelectiveCopy: content tokens to reproduce
};

// Deterministic generation; train and eval draw from disjoint seed streams.
std::pair<Dataset, Dataset> gen_task(const TaskSpec& spec);

} // namespace hyperhead
