#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hyperhead/head.hpp"

namespace hyperhead {

struct CheckResult {
    std::string name;
    bool pass = false;
    double residual = 0.0; // worst-case residual observed (check-specific units)
    std::string detail;
};

using CheckFn = std::function<CheckResult(std::uint64_t seed)>;

// Every module invariant as a named, seeded, self-contained check.
const std::vector<std::pair<std::string, CheckFn>>& verification_registry();

// Run all checks whose name contains `filter` (empty = all).
std::vector<CheckResult> run_verification(const std::string& filter, std::uint64_t seed);

// Random head-config sampler shared by the verification and acceptance suites.
struct ConfigSampler {
    bool allow_softmax = true;
    bool allow_glu = true;
    bool allow_rope = true;
    bool allow_conv = true;
    bool force_relu_l2 = false;
    bool force_tmix = false;
    bool force_lag_layout = false;
    bool force_forward_layout = false;
};
HeadConfig sample_config(Rng& rng, const ConfigSampler& opts);

// Random per-head parameters with non-degenerate p (unlike the zero-diagonal
// training init), for oracle comparisons.
HeadParams sample_params(Rng& rng, const HeadConfig& config, std::size_t L_max);

} // namespace hyperhead
