#include "hyperhead/labels.hpp"

#include <algorithm>

namespace hyperhead {

namespace {
std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

bool is_feat_segment(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return c == 'p' || c == 'c' || c == 'g';
    });
}

bool is_tmix_segment(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = 0;
    while (i < s.size() && (s[i] == '1' || s[i] == '2')) ++i;
    if (i == 0) return false;
    if (i < s.size() && s[i] == 'o') ++i;
    return i == s.size();
}
} // namespace

Label parse_label(const std::string& s) {
    if (s.empty()) throw LabelParseError("empty label");
    std::string body = s;
    Label label;
    if (body.back() == '!') {
        label.overparam = true;
        body.pop_back();
        if (body.empty()) throw LabelParseError("label '" + s + "': nothing before '!'");
    }
    const std::vector<std::string> segs = split(body, '-');
    if (segs[0].size() != 1 ||
        (segs[0][0] != 'S' && segs[0][0] != 'R' && segs[0][0] != 'G'))
        throw LabelParseError("label '" + s + "': bad base segment '" + segs[0] +
                              "' at position 0 (expected S, R or G)");
    label.base = segs[0][0];
    // Stages: 1 = feats allowed, 2 = rank allowed, 3 = tmix allowed, 4 = done.
    int stage = 1;
    std::size_t pos = segs[0].size();
    for (std::size_t i = 1; i < segs.size(); ++i) {
        const std::string& seg = segs[i];
        ++pos; // separator
        if (seg.empty())
            throw LabelParseError("label '" + s + "': empty segment at position " +
                                  std::to_string(pos));
        if (stage <= 1 && is_feat_segment(seg)) {
            for (char c : seg) {
                if (label.feats.count(c))
                    throw LabelParseError("label '" + s + "': duplicate modifier '" +
                                          std::string(1, c) + "' at position " +
                                          std::to_string(pos));
                label.feats.insert(c);
            }
            stage = 2;
        } else if (stage <= 2 && (seg == "q" || seg == "v")) {
            label.rank = seg[0];
            stage = 3;
        } else if (stage <= 3 && is_tmix_segment(seg)) {
            for (char c : seg) {
                if ((c == '1' && label.tmix1) || (c == '2' && label.tmix2))
                    throw LabelParseError("label '" + s + "': duplicate tmix flag at position " +
                                          std::to_string(pos));
                if (c == '1') label.tmix1 = true;
                if (c == '2') label.tmix2 = true;
                if (c == 'o') label.offset = true;
            }
            stage = 4;
        } else {
            throw LabelParseError("label '" + s + "': unexpected segment '" + seg +
                                  "' at position " + std::to_string(pos));
        }
        pos += seg.size();
    }
    return label;
}

std::string render_label(const Label& label) {
    std::string s(1, label.base);
    if (!label.feats.empty()) {
        s += '-';
        for (char c : {'p', 'c', 'g'})
            if (label.feats.count(c)) s += c;
    }
    if (label.rank) {
        s += '-';
        s += label.rank;
    }
    if (label.tmix1 || label.tmix2) {
        s += '-';
        if (label.tmix1) s += '1';
        if (label.tmix2) s += '2';
        if (label.offset) s += 'o';
    }
    if (label.overparam) s += '!';
    return s;
}

HeadConfig to_config(const Label& label, std::size_t d, std::size_t n_head, std::size_t r_s,
                     double eps) {
    HeadConfig c;
    c.d = d;
    c.n_head = n_head;
    c.r_s = r_s;
    c.eps = eps;
    switch (label.base) {
    case 'S': c.base = BaseAct::Softmax; break;
    case 'R': c.base = BaseAct::ReluL2; break;
    case 'G': c.base = BaseAct::Glu; break;
    }
    auto ranked = [&](bool compressed) {
        const std::size_t denom = (compressed && !label.overparam) ? 4 * n_head : n_head;
        if (d % denom != 0)
            throw DimensionError("to_config: d=" + std::to_string(d) +
                                 " not divisible by " + std::to_string(denom));
        return d / denom;
    };
    c.d_qk = ranked(label.rank == 'q');
    c.d_vo = ranked(label.rank == 'v');
    c.use_rope = label.feats.count('p') != 0;
    c.use_conv = label.feats.count('c') != 0;
    c.use_core_gates = label.feats.count('g') != 0;
    c.tmix_1 = label.tmix1;
    c.tmix_2 = label.tmix2;
    c.lag_layout = label.offset;
    c.overparam = label.overparam;
    return c;
}

std::size_t head_param_count(const Label& label, std::size_t d, std::size_t n_head,
                             std::size_t r_s, std::size_t L_max) {
    const HeadConfig c = to_config(label, d, n_head, r_s);
    const std::size_t dq = c.base == BaseAct::Glu ? glu_branch_rank(c) : c.d_qk;
    const std::size_t branches = c.base == BaseAct::Glu ? 2 : 1;
    std::size_t per_head = 0;
    per_head += branches * 2 * d * dq;                     // W_q, W_k (per branch)
    per_head += 2 * d * c.d_vo;                            // W_v, W_o
    if (c.use_core_gates) per_head += branches * d * dq;   // W_M1 (per branch)
    if (c.use_core_gates) per_head += d * c.d_vo;          // W_M2
    if (c.use_conv) per_head += 2 * d * 4;                 // conv_k, conv_v
    const std::size_t dplr_size = L_max + 2 * L_max * r_s + d * r_s; // p, A, B, W_S
    if (c.tmix_1) per_head += dplr_size;
    if (c.tmix_2) per_head += dplr_size;
    return per_head * n_head;
}

const std::vector<std::string>& table1_labels() {
    static const std::vector<std::string> labels = {
        "S", "S-p", "S-c", "S-pc",
        "R", "R-p", "R-c", "R-pc",
        "S-g-q", "R-cg-q", "R-c-12o!", "R-cg-q-12o", "R-pcg-q-12o",
        "S-c-q", "S-c-v", "R-c-q", "R-c-v",
        "G-cg-q", "G-c-12o!", "G-cg-q-12o", "G-pcg-q-12o",
        "G-cg-q-1o", "R-cg-q-1o", "G-g-q-12o", "R-g-q-12o",
        "G-12o!", "G-1o!", "G-2o!", "R-12o!", "R-1o!", "R-2!", "G-12!", "R-12!"};
    return labels;
}

} // namespace hyperhead
