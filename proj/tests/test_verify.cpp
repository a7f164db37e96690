#include <doctest.h>

#include <set>

#include "hyperhead/blocked.hpp"
#include "hyperhead/verify.hpp"

using namespace hyperhead;

TEST_CASE("the registry covers every module invariant by name") {
    std::set<std::string> names;
    for (const auto& [name, fn] : verification_registry()) names.insert(name);
    for (const std::string want :
         {"dplr.fast_dense_equivalence", "dplr.extension_consistency", "dplr.op_count",
          "head.gate_invariance", "head.dynamic_mlp_equivalence", "head.baseline_recovery",
          "head.glu_decoupling", "head.causality", "head.incremental_equivalence",
          "memory.readout_equivalence", "memory.tv_contraction", "memory.truncation_extension",
          "memory.static_polyhedral", "memory.register_additivity", "blocked.layout_bijectivity",
          "blocked.blocked_naive_equivalence", "blocked.remask_idempotence"}) {
        CAPTURE(want);
        CHECK(names.count(want) == 1);
    }
    CHECK(names.size() == 17);
}

TEST_CASE("filtering selects by substring") {
    CHECK(run_verification("dplr", 1).size() == 3);
    CHECK(run_verification("no_such_check", 1).empty());
    CHECK(run_verification("", 1).size() == 17);
}

TEST_CASE("every check passes on a clean build") {
    for (const CheckResult& res : run_verification("", 12345)) {
        CAPTURE(res.name);
        CAPTURE(res.residual);
        CAPTURE(res.detail);
        CHECK(res.pass);
    }
}

TEST_CASE("the skew poison is caught by layout bijectivity") {
    set_blocked_poison(true);
    const auto results = run_verification("blocked.layout_bijectivity", 7);
    set_blocked_poison(false);
    REQUIRE(results.size() == 1);
    CHECK_FALSE(results.front().pass);
    // and the harness recovers once the fault is cleared
    CHECK(run_verification("blocked.layout_bijectivity", 7).front().pass);
}
