#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gridsig/observability.hpp"
#include "gridsig/rng.hpp"
#include "helpers.hpp"

using namespace gridsig;
using signature::Placement;
using placement::GramReport;
using placement::PlacementSearchConfig;

namespace {

const std::vector<int> kP15 = {3, 8, 9, 10, 12, 15, 16, 17, 18, 19, 21, 24, 25, 27, 30};
const std::vector<int> kP7 = {9, 12, 15, 18, 24, 27, 30};

GramReport particular_for(const std::vector<int>& buses) {
    const auto lib = signature::build_library(testutil::ieee33(), Placement(buses));
    return placement::observability_particular(lib);
}

}  // namespace

TEST_SUITE("observability") {

TEST_CASE("per-status separation holds for the reference placements") {
    struct Expect {
        std::vector<int> buses;
        double worst;
    };
    // Frozen worst-case same-status signature overlaps.
    const std::vector<Expect> table = {
        {Placement::full(33).buses(), 0.98541132},
        {kP15, 0.98540596},
        {kP7, 0.98893461},
    };
    for (const auto& e : table) {
        const auto rep = particular_for(e.buses);
        CHECK(std::abs(rep.max_offdiag - e.worst) < 1e-6);
        CHECK(rep.holds());
        CHECK(!rep.offending.has_value());
        CHECK(rep.per_context.size() == 32);  // one entry per admissible status
        for (const auto& cw : rep.per_context) {
            CHECK(cw.max_offdiag <= rep.max_offdiag);
            CHECK(cw.breaker_a >= 0);
            CHECK(cw.breaker_b > cw.breaker_a);
            CHECK(cw.breaker_b < 5);
        }
    }
}

TEST_CASE("a tight margin flips the certificate") {
    const auto lib = signature::build_library(testutil::ieee33(), Placement(kP7));
    const auto rep = placement::observability_particular(lib, 0.02);  // needs < 0.98
    CHECK(!rep.holds());
    REQUIRE(rep.offending.has_value());
    CHECK(rep.offending->first != rep.offending->second);
}

TEST_CASE("the whole-library certificate is pinned at one by duplicate signatures") {
    // Some switches have identical signatures under two different contexts
    // (the differing breaker does not alter the direction), so the worst
    // overlap across the whole library is exactly 1 for any placement.
    const auto& full = testutil::ieee33_full_library();
    const auto rep = placement::observability_full(full);
    CHECK(rep.max_offdiag >= 1.0 - 1e-12);
    CHECK(rep.max_offdiag <= 1.0 + 1e-12);
    CHECK(!rep.holds());
    REQUIRE(rep.offending.has_value());
    CHECK(full.find(rep.offending->first) != nullptr);
    CHECK(full.find(rep.offending->second) != nullptr);

    // Collinearity survives restriction to fewer sensors.
    for (const auto& buses : {kP15, kP7}) {
        const auto lib = signature::build_library(testutil::ieee33(), Placement(buses));
        CHECK(placement::observability_full(lib).max_offdiag >= 1.0 - 1e-9);
    }
}

TEST_CASE("overlaps do not depend on sensor ordering") {
    const auto a = particular_for({9, 12, 15});
    const auto b = particular_for({15, 9, 12});
    CHECK(a.max_offdiag == doctest::Approx(b.max_offdiag).epsilon(1e-12));
}

TEST_CASE("seed growth finds a three-sensor certified placement") {
    const auto res =
        placement::grow_observable_seed(testutil::ieee33(), testutil::ieee33_full_library());
    CHECK(res.certified);
    CHECK(res.placement.buses() == std::vector<int>{2, 10, 29});
    REQUIRE(res.steps.size() == 3);
    CHECK(res.steps[0].bus == 2);  // the slack neighbor: blind on its own
    CHECK(res.steps[0].particular_max == 1.0);
    CHECK(res.steps[1].bus == 10);
    CHECK(res.steps[2].bus == 29);
    CHECK(std::abs(res.steps[2].particular_max - 0.993476) < 1e-4);
    // duplicate signatures keep the whole-library maximum at 1 even here
    CHECK(res.full_max >= 1.0 - 1e-9);

    // requires the full-dimension library
    const auto p7_lib = signature::build_library(testutil::ieee33(), Placement(kP7));
    CHECK_THROWS_AS(placement::grow_observable_seed(testutil::ieee33(), p7_lib), GridError);
}

TEST_CASE("greedy search follows the oracle and shares seeds within a step") {
    const auto& net = testutil::ieee33();
    const auto& full = testutil::ieee33_full_library();

    struct Call {
        std::vector<int> buses;
        std::uint64_t seed;
    };
    std::vector<Call> calls;
    // Bus 17 saves 10 errors, bus 5 saves 5, everything else is flat.
    const auto oracle = [&](const Placement& pl, std::uint64_t seed) -> long long {
        calls.push_back({pl.buses(), seed});
        long long e = 1000;
        if (pl.contains(17)) e -= 10;
        if (pl.contains(5)) e -= 5;
        return e;
    };

    PlacementSearchConfig cfg;
    cfg.initial = Placement({2, 10, 29});
    cfg.target_size = 5;
    cfg.seed = 99;
    const auto res = placement::greedy_place(net, full, cfg, oracle);

    CHECK(res.placement.buses() == std::vector<int>{2, 5, 10, 17, 29});
    CHECK(!res.early_stopped);
    REQUIRE(res.audit.size() == 2);
    CHECK(res.audit[0].chosen_bus == 17);
    CHECK(res.audit[0].chosen_errors == 990);
    CHECK(res.audit[1].chosen_bus == 5);
    CHECK(res.audit[1].chosen_errors == 985);
    CHECK(res.audit[0].candidates.size() == 29);  // 32 non-slack buses - 3 placed
    CHECK(res.audit[1].candidates.size() == 28);

    // candidate rows come out in ascending bus order
    for (const auto& step : res.audit)
        CHECK(std::is_sorted(step.candidates.begin(), step.candidates.end(),
                             [](const auto& x, const auto& y) { return x.bus < y.bus; }));

    // common random numbers: one seed per step, different across steps
    REQUIRE(calls.size() == 57);
    const std::uint64_t s0 = sim::derive_seed(cfg.seed, 1000);
    const std::uint64_t s1 = sim::derive_seed(cfg.seed, 1001);
    CHECK(s0 != s1);
    for (std::size_t i = 0; i < 29; ++i) CHECK(calls[i].seed == s0);
    for (std::size_t i = 29; i < calls.size(); ++i) CHECK(calls[i].seed == s1);
}

TEST_CASE("greedy search breaks ties toward the lowest bus id") {
    PlacementSearchConfig cfg;
    cfg.initial = Placement({2, 10, 29});
    cfg.target_size = 5;
    const auto flat = [](const Placement&, std::uint64_t) -> long long { return 7; };
    const auto res = placement::greedy_place(testutil::ieee33(), testutil::ieee33_full_library(),
                                             cfg, flat);
    CHECK(res.placement.buses() == std::vector<int>{2, 3, 4, 10, 29});
}

TEST_CASE("strict improvement stops when no candidate beats the baseline") {
    PlacementSearchConfig cfg;
    cfg.initial = Placement({2, 10, 29});
    cfg.target_size = 7;
    cfg.strict_improvement = true;
    const auto flat = [](const Placement&, std::uint64_t) -> long long { return 7; };
    const auto res = placement::greedy_place(testutil::ieee33(), testutil::ieee33_full_library(),
                                             cfg, flat);
    CHECK(res.early_stopped);
    CHECK(res.placement.buses() == std::vector<int>{2, 10, 29});
    REQUIRE(res.audit.size() == 1);
    CHECK(res.audit[0].chosen_bus == -1);
    CHECK(res.audit[0].chosen_errors == 7);
    CHECK(res.audit[0].candidates.size() == 29);
}

TEST_CASE("greedy search validates its inputs") {
    const auto flat = [](const Placement&, std::uint64_t) -> long long { return 0; };
    const auto& net = testutil::ieee33();
    const auto& full = testutil::ieee33_full_library();

    PlacementSearchConfig cfg;  // default-constructed initial is empty
    CHECK_THROWS_AS(placement::greedy_place(net, full, cfg, flat), GridError);

    cfg.initial = Placement({2, 10, 29});
    cfg.target_size = 2;
    CHECK_THROWS_AS(placement::greedy_place(net, full, cfg, flat), GridError);

    cfg.initial = Placement({2});  // blind to every signature
    cfg.target_size = 7;
    CHECK_THROWS_AS(placement::greedy_place(net, full, cfg, flat), GridError);
}

}  // TEST_SUITE
