// Compares the serial per-step reference path (seq_forward) against the
// OpenMP row-blocked path (blocked_seq_forward) for time and agreement.
#include <chrono>
#include <cstdio>
#include <vector>

#include "hyperhead/blocked.hpp"
#include "hyperhead/labels.hpp"
#include "hyperhead/verify.hpp"

namespace hh = hyperhead;

namespace {
double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}
} // namespace

int main(int argc, char** argv) {
    const std::string label_name = argc > 1 ? argv[1] : "G-cg-q-12o";
    const std::size_t d = 64, T = 256;
    hh::HeadConfig config;
    try {
        config = hh::to_config(hh::parse_label(label_name), d, 2, 16);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    hh::Rng rng(7);
    std::vector<hh::HeadParams> heads;
    for (std::size_t h = 0; h < config.n_head; ++h)
        heads.push_back(hh::init_head_params(rng, config, T));
    const hh::Matrix seq = rng.normal_matrix(T, d, 1.0);

    auto t0 = std::chrono::steady_clock::now();
    const hh::Matrix naive = hh::seq_forward(seq, heads, config);
    const double t_naive = seconds_since(t0);
    std::printf("label %s, d=%zu, T=%zu\n", label_name.c_str(), d, T);
    std::printf("%-28s %10.4f s\n", "serial per-step reference", t_naive);

    for (std::size_t M : {std::size_t{32}, std::size_t{128}, T}) {
        t0 = std::chrono::steady_clock::now();
        const hh::Matrix blocked = hh::blocked_seq_forward(seq, heads, config, M);
        const double t_blocked = seconds_since(t0);
        const double dev = hh::max_abs_diff(blocked, naive) / (hh::max_abs(naive) + 1e-30);
        std::printf("blocked M=%-18zu %10.4f s   speedup %5.2fx   max rel dev %.3e\n", M,
                    t_blocked, t_naive / t_blocked, dev);
        if (dev > 1e-12) {
            std::fprintf(stderr, "deviation above 1e-12\n");
            return 1;
        }
    }
    return 0;
}
