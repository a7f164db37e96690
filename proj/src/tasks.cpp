#include "hyperhead/tasks.hpp"

#include <algorithm>
#include <stdexcept>

namespace hyperhead {

TaskKind parse_task_kind(const std::string& name) {
    if (name == "selective_copy") return TaskKind::SelectiveCopy;
    if (name == "incontext_recall") return TaskKind::InContextRecall;
    if (name == "noisy_recall") return TaskKind::NoisyRecall;
    if (name == "compression") return TaskKind::Compression;
    throw std::invalid_argument("unknown task '" + name +
                                "' (expected selective_copy, incontext_recall, noisy_recall or "
                                "compression)");
}

std::string task_kind_name(TaskKind kind) {
    switch (kind) {
    case TaskKind::SelectiveCopy: return "selective_copy";
    case TaskKind::InContextRecall: return "incontext_recall";
    case TaskKind::NoisyRecall: return "noisy_recall";
    case TaskKind::Compression: return "compression";
    }
    return "?";
}

namespace {
constexpr int kNoise = 0;
constexpr int kDelim = 1;

void check_spec(const TaskSpec& spec) {
    if (spec.vocab < 8) throw std::invalid_argument("gen_task: vocab must be >= 8");
    if (spec.seq_len < 8) throw std::invalid_argument("gen_task: seq_len must be >= 8");
}

// content tokens: [2, vocab)
int rand_content(Rng& rng, const TaskSpec& spec) {
    return 2 + static_cast<int>(rng.next_below(spec.vocab - 2));
}

Sample blank_sample(std::size_t seq_len) {
    Sample s;
    s.input.assign(seq_len, kNoise);
    s.target.assign(seq_len, kNoise);
    s.mask.assign(seq_len, 0);
    return s;
}

// Random content tokens scattered through a noise prefix; after the delimiter
// the model reproduces the content subsequence in order.
Sample gen_selective_copy(Rng& rng, const TaskSpec& spec) {
    const std::size_t n = spec.n_copy;
    if (2 * n + 1 > spec.seq_len)
        throw std::invalid_argument("gen_task: selective_copy needs seq_len >= 2*n_copy+1");
    const std::size_t prefix = spec.seq_len - n - 1;
    Sample s = blank_sample(spec.seq_len);
    std::vector<int> content(n);
    for (auto& c : content) c = rand_content(rng, spec);
    // choose n distinct prefix slots, order preserved
    std::vector<std::size_t> slots(prefix);
    for (std::size_t i = 0; i < prefix; ++i) slots[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        std::swap(slots[i], slots[i + rng.next_below(prefix - i)]);
    slots.resize(n);
    std::sort(slots.begin(), slots.end());
    for (std::size_t i = 0; i < n; ++i) s.input[slots[i]] = content[i];
    s.input[prefix] = kDelim;
    // Autoregressive answer region: position prefix predicts content[0], and
    // each later answer position sees the previous answer as input.
    for (std::size_t i = 0; i < n; ++i) {
        s.target[prefix + i] = content[i];
        s.mask[prefix + i] = 1;
        if (i > 0) s.input[prefix + i] = content[i - 1];
    }
    return s;
}

// Key/value pairs followed by a query key; the model predicts the value.
Sample gen_recall(Rng& rng, const TaskSpec& spec, bool noisy) {
    const std::size_t n_keys = (spec.vocab - 2) / 2;
    const std::size_t n_values = spec.vocab - 2 - n_keys;
    const std::size_t room = (spec.seq_len - 2) / 2;
    std::size_t n = spec.n_pairs == 0 ? std::min<std::size_t>(room, n_keys) : spec.n_pairs;
    if (n == 0 || n > room || n > n_keys)
        throw std::invalid_argument("gen_task: recall needs 1 <= n_pairs <= min((seq_len-2)/2, "
                                    "keys)");
    Sample s = blank_sample(spec.seq_len);
    // distinct keys
    std::vector<int> keys(n_keys);
    for (std::size_t i = 0; i < n_keys; ++i) keys[i] = 2 + static_cast<int>(i);
    for (std::size_t i = 0; i < n; ++i)
        std::swap(keys[i], keys[i + rng.next_below(n_keys - i)]);
    keys.resize(n);
    std::vector<int> values(n);
    for (auto& v : values)
        v = 2 + static_cast<int>(n_keys) + static_cast<int>(rng.next_below(n_values));
    const std::size_t n_distract = noisy
        ? std::min<std::size_t>(n - 1, static_cast<std::size_t>(spec.noise_frac * n))
        : 0;
    // pairs occupy the tail just before the query; leading positions stay noise
    const std::size_t pair_start = spec.seq_len - 2 - 2 * n;
    for (std::size_t i = 0; i < n; ++i) {
        s.input[pair_start + 2 * i] = keys[i];
        s.input[pair_start + 2 * i + 1] = values[i];
    }
    // query a non-distractor pair (distractors are the first n_distract pairs)
    const std::size_t pick = n_distract + rng.next_below(n - n_distract);
    s.input[spec.seq_len - 2] = keys[pick];
    s.target[spec.seq_len - 2] = values[pick];
    s.mask[spec.seq_len - 2] = 1;
    return s;
}

// Autoencoding through a bottleneck: after the delimiter the model emits a
// 2-token code that must reconstruct the block's first two tokens.
Sample gen_compression(Rng& rng, const TaskSpec& spec) {
    Sample s = blank_sample(spec.seq_len);
    const std::size_t content_len = spec.seq_len - 4;
    for (std::size_t i = 0; i < content_len; ++i) s.input[i] = rand_content(rng, spec);
    s.input[spec.seq_len - 3] = kDelim;
    s.target[spec.seq_len - 3] = s.input[0];
    s.mask[spec.seq_len - 3] = 1;
    s.input[spec.seq_len - 2] = s.input[0];
    s.target[spec.seq_len - 2] = s.input[1];
    s.mask[spec.seq_len - 2] = 1;
    return s;
}

Dataset gen_set(Rng& rng, const TaskSpec& spec, std::size_t count) {
    Dataset set;
    set.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        switch (spec.kind) {
        case TaskKind::SelectiveCopy: set.push_back(gen_selective_copy(rng, spec)); break;
        case TaskKind::InContextRecall: set.push_back(gen_recall(rng, spec, false)); break;
        case TaskKind::NoisyRecall: set.push_back(gen_recall(rng, spec, true)); break;
        case TaskKind::Compression: set.push_back(gen_compression(rng, spec)); break;
        }
    }
    return set;
}
} // namespace

std::pair<Dataset, Dataset> gen_task(const TaskSpec& spec) {
    check_spec(spec);
    Rng train_rng(spec.seed * 2654435761ULL + 0x747261696EULL);
    Rng eval_rng(spec.seed * 2654435761ULL + 0x6576616CULL);
    return {gen_set(train_rng, spec, spec.n_train), gen_set(eval_rng, spec, spec.n_eval)};
}

} // namespace hyperhead
