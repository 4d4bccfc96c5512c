#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "gridsig/signature.hpp"

namespace gridsig::placement {

using grid::Network;
using grid::SwitchStatus;
using signature::Placement;
using signature::SignatureKey;
using signature::SignatureLibrary;

struct GramReport {
    double max_offdiag = 0.0;
    // Present iff the certificate fails (max >= 1 - margin).
    std::optional<std::pair<SignatureKey, SignatureKey>> offending;
    // Particular variant: worst value per status context.
    struct ContextWorst {
        SwitchStatus sigma;
        double max_offdiag = 0.0;
        int breaker_a = -1, breaker_b = -1;
    };
    std::vector<ContextWorst> per_context;
    double margin = 1e-6;

    bool holds() const { return max_offdiag < 1.0 - margin; }
};

// Gram condition over the whole library: every pair of distinct signatures must
// stay separated, so any detected transition identifies its switch regardless
// of the assumed pre-transition status.
GramReport observability_full(const SignatureLibrary& lib, double margin = 1e-6);

// Weaker per-status condition: for each status, the r candidate signatures of
// its particular library must be pairwise separated. This is what the online
// detector (which always knows its current status estimate) relies on.
GramReport observability_particular(const SignatureLibrary& lib, double margin = 1e-6);

struct SeedGrowthStep {
    int bus = 0;
    double particular_max = 1.0;  // particular Gram max after adding the bus
};

struct SeedGrowthResult {
    Placement placement;
    std::vector<SeedGrowthStep> steps;
    bool certified = false;  // particular certificate holds at the margin
    double full_max = 1.0;   // reported for reference; not required to certify
};

// Grow a minimal observable placement: start from the lowest-id bus adjacent to
// the slack and greedily add the bus that most decreases the particular Gram
// maximum until the particular certificate holds. The full-library certificate
// is reported but not required: libraries routinely contain exact duplicate
// signatures (the same switch under contexts that do not alter its direction),
// which pin the full Gram maximum at 1 for every placement.
// full_lib must be built on the full placement.
SeedGrowthResult grow_observable_seed(const Network& net, const SignatureLibrary& full_lib,
                                      double margin = 1e-6);

struct PlacementSearchConfig {
    Placement initial;          // must satisfy the particular certificate
    int target_size = 7;
    long num_run = 100;         // Monte Carlo runs per candidate
    long tstop = 100;           // scenario length in samples
    std::uint64_t seed = 0;
    bool strict_improvement = false;  // stop early when no candidate improves
    double margin = 1e-6;
};

// Total detection-error count for a candidate placement; step_seed is shared
// across all candidates within a greedy step (common random numbers).
using ErrorOracle = std::function<long long(const Placement&, std::uint64_t step_seed)>;

struct CandidateEval {
    int bus = 0;
    long long errors = 0;
};

struct GreedyStep {
    int chosen_bus = 0;
    long long chosen_errors = 0;
    std::vector<CandidateEval> candidates;  // sorted by bus id
};

struct GreedyResult {
    Placement placement;
    std::vector<GreedyStep> audit;
    bool early_stopped = false;
};

// Greedy sensor addition: per step evaluate every bus outside the placement on
// shared scenarios, add the one with the fewest total errors (ties: lowest bus
// id), until target size. Deterministic given the seed.
GreedyResult greedy_place(const Network& net, const SignatureLibrary& full_lib,
                          const PlacementSearchConfig& cfg, const ErrorOracle& oracle);

}  // namespace gridsig::placement
