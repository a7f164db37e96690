// hyperhead: invariant suites, micro-training, inspection and multiply-count
// benchmarks for the dynamic two-layer-MLP attention head family.
//
// Exit codes: 0 pass, 1 invariant failure, 2 usage/parse error, 3 runtime
// numeric failure.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "hyperhead/blocked.hpp"
#include "hyperhead/labels.hpp"
#include "hyperhead/memory.hpp"
#include "hyperhead/train.hpp"
#include "hyperhead/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hh = hyperhead;

namespace {
struct Options {
    std::string label = "R";
    std::size_t d = 64;
    std::size_t n_head = 2;
    std::size_t r_s = 16;
    std::size_t seq_len = 64;
    std::size_t block = 128;
    std::uint64_t seed = 0;
    double eps = 1e-12;
    std::string task = "selective_copy";
    std::size_t steps = 500;
    std::string out = ".";
    std::string filter;
    std::string poison;
};

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("HYPERHEAD_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

int cmd_verify(const Options& opt) {
    if (!opt.poison.empty()) {
        if (opt.poison != "skew") {
            std::fprintf(stderr, "unknown poison mode '%s' (supported: skew)\n",
                         opt.poison.c_str());
            return 2;
        }
        hh::set_blocked_poison(true);
    }
    const auto results = hh::run_verification(opt.filter, opt.seed);
    if (results.empty()) {
        std::fprintf(stderr, "no checks match filter '%s'\n", opt.filter.c_str());
        return 2;
    }
    bool all_pass = true;
    for (const auto& r : results) {
        std::printf("%-38s %s  worst=%.3e  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.residual, r.detail.c_str());
        all_pass = all_pass && r.pass;
    }
    std::printf("%zu checks, %s (seed %llu)\n", results.size(),
                all_pass ? "all passed" : "FAILURES PRESENT",
                static_cast<unsigned long long>(opt.seed));
    return all_pass ? 0 : 1;
}

int cmd_train(const Options& opt) {
    if (opt.steps == 0) {
        std::fprintf(stderr, "--steps must be >= 1\n");
        return 2;
    }
    const hh::Label label = hh::parse_label(opt.label);
    hh::ModelConfig mc;
    mc.d = opt.d;
    mc.seq_len = opt.seq_len;
    mc.head = hh::to_config(label, opt.d, opt.n_head, opt.r_s, opt.eps);
    hh::TaskSpec task;
    task.kind = hh::parse_task_kind(opt.task);
    task.seq_len = opt.seq_len;
    task.seed = opt.seed;
    hh::TrainConfig tc;
    tc.steps = opt.steps;
    tc.seed = opt.seed;
    hh::Rng rng(opt.seed);
    hh::ParamMap params = hh::init_model_params(rng, mc);
    std::printf("label=%s task=%s d=%zu params=%zu steps=%zu seed=%llu\n", opt.label.c_str(),
                opt.task.c_str(), opt.d, hh::param_count(params), opt.steps,
                static_cast<unsigned long long>(opt.seed));
    const hh::TrainResult result = hh::train_model(params, mc, task, tc);
    std::filesystem::create_directories(opt.out);
    const std::string path = opt.out + "/" + opt.label + "-" + opt.task + "-" +
                             std::to_string(opt.seed) + ".csv";
    hh::write_metrics_csv(path, result.metrics);
    if (result.diverged) {
        std::fprintf(stderr, "run diverged (non-finite loss); metrics in %s\n", path.c_str());
        return 3;
    }
    std::printf("final eval accuracy %.4f; metrics written to %s\n", result.final_eval_acc,
                path.c_str());
    return 0;
}

int cmd_bench(const Options& opt) {
    const hh::Label label = hh::parse_label(opt.label);
    hh::HeadConfig config = hh::to_config(label, opt.d, opt.n_head, opt.r_s, opt.eps);
    if (!config.tmix_1 && !config.tmix_2) {
        // benchmark the mixing overhead even for labels without it
        config.tmix_1 = config.tmix_2 = true;
    }
    hh::Rng rng(opt.seed);
    std::vector<hh::HeadParams> heads;
    for (std::size_t h = 0; h < config.n_head; ++h)
        heads.push_back(hh::init_head_params(rng, config, 512));
    std::printf("%8s %16s %12s\n", "t", "extra_mults", "C=mults/(t*r_s)");
    std::uint64_t prev = 0;
    bool ok = true;
    double ratio = 0.0;
    for (std::size_t t : {std::size_t{16}, std::size_t{64}, std::size_t{256}}) {
        const hh::LagContext ctx(rng.normal_matrix(t, config.d, 1.0));
        const hh::Matrix x = rng.normal_matrix(1, config.d, 1.0);
        hh::MulCounter counter;
        hh::multihead_forward(x, ctx, heads, config, &counter);
        const double c = static_cast<double>(counter.mults) /
                         (static_cast<double>(t) * static_cast<double>(config.r_s));
        std::printf("%8zu %16llu %12.3f\n", t,
                    static_cast<unsigned long long>(counter.mults), c);
        // exact budget: (2*t*r_s + t + r_s) multiplies per active mixer per head
        const std::uint64_t mixers =
            static_cast<std::uint64_t>(config.tmix_1) + static_cast<std::uint64_t>(config.tmix_2);
        const std::uint64_t budget =
            config.n_head * mixers * (2 * t * config.r_s + t + config.r_s);
        if (counter.mults > budget) ok = false;
        if (prev != 0) {
            ratio = static_cast<double>(counter.mults) / static_cast<double>(prev);
            // t quadruples between rows; per-doubling ratio is sqrt of that
            const double per_doubling = std::sqrt(ratio);
            if (per_doubling < 1.8 || per_doubling > 2.2) ok = false;
        }
        prev = counter.mults;
    }
    std::printf("extra per-step state: %zu values (2 gate vectors of length r_s per head)\n",
                2 * config.r_s * config.n_head);
    if (!ok) std::fprintf(stderr, "overhead outside the linear O(t*r_s) envelope\n");
    return ok ? 0 : 1;
}

int cmd_inspect(const Options& opt) {
    const hh::Label label = hh::parse_label(opt.label);
    hh::HeadConfig config = hh::to_config(label, opt.d, opt.n_head, opt.r_s, opt.eps);
    if (config.use_rope) {
        std::fprintf(stderr, "inspect: pool views are undefined for rotary labels; "
                             "pick a label without 'p'\n");
        return 2;
    }
    if (config.base != hh::BaseAct::ReluL2)
        std::fprintf(stderr, "note: pool view shown for the gate branch; the slot-sum readout "
                             "oracle applies to base R labels\n");
    hh::Rng rng(opt.seed);
    const hh::HeadParams params = hh::init_head_params(rng, config, opt.seq_len);
    const hh::LagContext ctx(rng.normal_matrix(opt.seq_len, config.d, 1.0));
    const hh::Matrix x = rng.normal_matrix(1, config.d, 1.0);
    const hh::MemoryPoolView view = hh::instantiate_pool(x, ctx, params, config);
    std::printf("pool of %zu slots (rho = %.6g, activated %zu)\n", view.size(), view.rho,
                view.active_count());
    std::printf("%6s %14s %6s %12s %12s\n", "slot", "alpha", "gate", "|u|", "|v|");
    for (std::size_t i = 0; i < view.size(); ++i)
        std::printf("%6zu %14.6g %6s %12.6g %12.6g\n", i, view.alpha(0, i),
                    view.gates[i] ? "on" : "off", hh::frobenius_norm(view.u.row(i)),
                    hh::frobenius_norm(view.v.row(i)));
    return 0;
}
} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();
    CLI::App app{"dynamic two-layer-MLP attention head toolkit"};
    app.set_config("--config", "", "key=value config file (# comments allowed)");
    Options opt;
    app.add_option("--label", opt.label, "head-family label, e.g. G-cg-q-12o");
    app.add_option("--d", opt.d, "model width");
    app.add_option("--n-head", opt.n_head, "head count");
    app.add_option("--r-s", opt.r_s, "temporal mixing rank");
    app.add_option("--seq-len", opt.seq_len, "sequence length");
    app.add_option("--block", opt.block, "row-block height M");
    app.add_option("--seed", opt.seed, "seed for all randomness");
    app.add_option("--eps", opt.eps, "L2Norm stabilizer");
    app.add_option("--task", opt.task,
                   "selective_copy | incontext_recall | noisy_recall | compression");
    app.add_option("--steps", opt.steps, "training steps");
    app.add_option("--out", opt.out, "output directory for metrics");
    app.add_option("--filter", opt.filter, "substring filter for verify checks");
    app.add_option("--poison", opt.poison, "fault injection mode (test only): skew");
    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    auto* train = app.add_subcommand("train", "train a tiny model on a diagnostic task");
    auto* bench = app.add_subcommand("bench", "multiply-count overhead benchmark");
    auto* inspect = app.add_subcommand("inspect", "dump a memory-pool view");
    app.require_subcommand(1);
    // global options may also follow the subcommand name
    for (auto* sub : {verify, train, bench, inspect}) sub->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (verify->parsed()) return cmd_verify(opt);
        if (train->parsed()) return cmd_train(opt);
        if (bench->parsed()) return cmd_bench(opt);
        if (inspect->parsed()) return cmd_inspect(opt);
    } catch (const hh::LabelParseError& e) {
        std::fprintf(stderr, "label error: %s\ngrammar: Base[-Feats][-Rank][-Tmix][!] with "
                             "Base in {S,R,G}, Feats subset of pcg, Rank q|v, Tmix 1|2|12[o]\n",
                     e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 3;
    }
    return 2;
}
