#pragma once

#include <set>
#include <string>
#include <vector>

#include "hyperhead/head.hpp"

namespace hyperhead {

struct LabelParseError : std::runtime_error {
    explicit LabelParseError(const std::string& what) : std::runtime_error(what) {}
};

// Design-study label: Base[-Feat][-Rank][-TmixLayout][!]
//   Base  S | R | G        (softmax, ReLU-L2Norm, GLU)
//   Feat  subset of p,c,g  (RoPE, depthwise KV conv, QK/VO gating)
//   Rank  q | v            (compressed routing / readout rank)
//   Tmix  1 | 2 | 12, optional trailing o (lag layout), trailing ! lifts
//         compression (over-parameterized variant).
struct Label {
    char base = 'S';
    std::set<char> feats; // subset of {p,c,g}
    char rank = 0;        // 0, 'q' or 'v'
    bool tmix1 = false;
    bool tmix2 = false;
    bool offset = false;   // 'o'
    bool overparam = false; // '!'
};

Label parse_label(const std::string& s);
std::string render_label(const Label& label);

// Decode a label into a runnable head configuration.
// Default ranks d_qk = d_vo = d/n_head; rank 'q' (resp. 'v') compresses the
// routing (readout) side to d/(4 n_head); '!' lifts compression back.
HeadConfig to_config(const Label& label, std::size_t d, std::size_t n_head, std::size_t r_s,
                     double eps = 1e-12);

// Total trainable parameter count of the sequence-mixing layer described by
// the label (all heads, counting only feature-active tensors), with temporal
// parameters sized for max context length L_max.
std::size_t head_param_count(const Label& label, std::size_t d, std::size_t n_head,
                             std::size_t r_s, std::size_t L_max);

// The 33 design-study labels, in study order.
const std::vector<std::string>& table1_labels();

} // namespace hyperhead
