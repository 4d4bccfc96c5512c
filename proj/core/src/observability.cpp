#include "gridsig/observability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gridsig/errors.hpp"
#include "gridsig/rng.hpp"

namespace gridsig::placement {

namespace {

using signature::status_with;
using Vec = grid::Vec;

double pair_score(const Vec& a, const Vec& b) { return std::abs(a.dot(b)); }

// Restrict every entry of a full-dimension library to a placement. Entries
// whose restriction vanishes are dropped (they cannot be observed at all from
// these sensors, so no certificate over them can hold); dropped is the count.
std::map<SignatureKey, Vec> restrict_entries(const SignatureLibrary& full_lib,
                                             const Placement& pl, int* dropped) {
    std::map<SignatureKey, Vec> out;
    if (dropped) *dropped = 0;
    for (const auto& [key, g] : full_lib.entries()) {
        try {
            out.emplace(key, signature::restrict_and_normalize(g, pl));
        } catch (const UnobservableSignatureError&) {
            if (dropped) ++*dropped;
        }
    }
    return out;
}

double particular_max_of(const std::map<SignatureKey, Vec>& entries, int num_switches) {
    // Group candidates by status context and take the worst pairwise overlap.
    std::set<SwitchStatus> statuses;
    for (const auto& [key, g] : entries) {
        statuses.insert(status_with(key, false));
        statuses.insert(status_with(key, true));
    }
    double worst = 0.0;
    for (const auto& sigma : statuses) {
        std::vector<const Vec*> cands;
        for (int b = 0; b < num_switches; ++b) {
            auto it = entries.find(signature::key_for(sigma, b));
            if (it != entries.end()) cands.push_back(&it->second);
        }
        for (std::size_t i = 0; i < cands.size(); ++i)
            for (std::size_t j = i + 1; j < cands.size(); ++j)
                worst = std::max(worst, pair_score(*cands[i], *cands[j]));
    }
    return worst;
}

}  // namespace

GramReport observability_full(const SignatureLibrary& lib, double margin) {
    GramReport rep;
    rep.margin = margin;
    const auto& entries = lib.entries();
    for (auto it = entries.begin(); it != entries.end(); ++it) {
        for (auto jt = std::next(it); jt != entries.end(); ++jt) {
            const double v = pair_score(it->second, jt->second);
            if (v > rep.max_offdiag) {
                rep.max_offdiag = v;
                if (v >= 1.0 - margin) rep.offending = {it->first, jt->first};
            }
        }
    }
    if (rep.holds()) rep.offending.reset();
    return rep;
}

GramReport observability_particular(const SignatureLibrary& lib, double margin) {
    GramReport rep;
    rep.margin = margin;
    const auto& entries = lib.entries();

    std::set<SwitchStatus> statuses;
    int num_switches = 0;
    for (const auto& [key, g] : entries) {
        statuses.insert(status_with(key, false));
        statuses.insert(status_with(key, true));
        num_switches = std::max(num_switches, key.breaker + 1);
    }

    for (const auto& sigma : statuses) {
        std::vector<std::pair<int, const Vec*>> cands;
        for (int b = 0; b < num_switches; ++b) {
            auto it = entries.find(signature::key_for(sigma, b));
            if (it != entries.end()) cands.emplace_back(b, &it->second);
        }
        GramReport::ContextWorst cw;
        cw.sigma = sigma;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            for (std::size_t j = i + 1; j < cands.size(); ++j) {
                const double v = pair_score(*cands[i].second, *cands[j].second);
                if (v > cw.max_offdiag) {
                    cw.max_offdiag = v;
                    cw.breaker_a = cands[i].first;
                    cw.breaker_b = cands[j].first;
                }
            }
        }
        if (cw.max_offdiag > rep.max_offdiag) {
            rep.max_offdiag = cw.max_offdiag;
            if (cw.max_offdiag >= 1.0 - margin)
                rep.offending = {signature::key_for(sigma, cw.breaker_a),
                                 signature::key_for(sigma, cw.breaker_b)};
        }
        rep.per_context.push_back(std::move(cw));
    }
    if (rep.holds()) rep.offending.reset();
    return rep;
}

SeedGrowthResult grow_observable_seed(const Network& net, const SignatureLibrary& full_lib,
                                      double margin) {
    if (full_lib.placement().size() != net.n())
        throw GridError("grow_observable_seed requires a library built on the full placement");

    const int r = net.num_switches();
    const int slack_id = net.buses()[net.slack()].id;

    // Start from the lowest-id bus adjacent to the slack.
    int start = 0;
    for (const auto& line : net.lines()) {
        int other = 0;
        if (line.from == slack_id) other = line.to;
        if (line.to == slack_id) other = line.from;
        if (other != 0 && (start == 0 || other < start)) start = other;
    }
    if (start == 0) throw GridError("slack bus has no neighbors");

    SeedGrowthResult result;
    std::vector<int> chosen{start};

    // A placement that makes a signature vanish is blind to that transition and
    // cannot certify; candidates are ranked first by how many signatures they
    // miss, then by the Gram maximum over the rest.
    auto eval = [&](const std::vector<int>& buses) {
        Placement pl(buses);
        int dropped = 0;
        const auto entries = restrict_entries(full_lib, pl, &dropped);
        return std::pair<int, double>(dropped, particular_max_of(entries, r));
    };

    auto certifies = [&](const std::pair<int, double>& v) {
        return v.first == 0 && v.second < 1.0 - margin;
    };

    auto current = eval(chosen);
    result.steps.push_back({start, current.first == 0 ? current.second : 1.0});

    while (!certifies(current) && static_cast<int>(chosen.size()) < net.n()) {
        int best_bus = -1;
        auto best_val = std::pair<int, double>(std::numeric_limits<int>::max(), 2.0);
        for (const auto& bus : net.buses()) {
            if (bus.id == slack_id) continue;
            if (std::find(chosen.begin(), chosen.end(), bus.id) != chosen.end()) continue;
            std::vector<int> trial = chosen;
            trial.push_back(bus.id);
            std::sort(trial.begin(), trial.end());
            const auto v = eval(trial);
            if (v < best_val) {
                best_val = v;
                best_bus = bus.id;
            }
        }
        if (best_bus < 0) break;
        chosen.push_back(best_bus);
        std::sort(chosen.begin(), chosen.end());
        current = best_val;
        result.steps.push_back({best_bus, current.first == 0 ? current.second : 1.0});
    }

    result.placement = Placement(chosen);
    result.certified = certifies(current);
    {
        auto entries = restrict_entries(full_lib, result.placement, nullptr);
        double fm = 0.0;
        std::vector<const Vec*> vs;
        vs.reserve(entries.size());
        for (const auto& [k, g] : entries) vs.push_back(&g);
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                fm = std::max(fm, pair_score(*vs[i], *vs[j]));
        result.full_max = fm;
    }
    return result;
}

GreedyResult greedy_place(const Network& net, const SignatureLibrary& full_lib,
                          const PlacementSearchConfig& cfg, const ErrorOracle& oracle) {
    if (cfg.initial.size() == 0) throw GridError("greedy_place: empty initial placement");
    if (cfg.target_size < static_cast<int>(cfg.initial.size()))
        throw GridError("greedy_place: target size smaller than the initial placement");
    {
        int dropped = 0;
        const auto entries = restrict_entries(full_lib, cfg.initial, &dropped);
        const double worst = particular_max_of(entries, net.num_switches());
        if (dropped > 0 || worst >= 1.0 - cfg.margin)
            throw GridError("greedy_place: initial placement fails the observability certificate");
    }

    GreedyResult result;
    std::vector<int> current = cfg.initial.buses();

    for (int step = 0; static_cast<int>(current.size()) < cfg.target_size; ++step) {
        const std::uint64_t step_seed = sim::derive_seed(cfg.seed, 1000 + step);

        long long baseline = -1;
        if (cfg.strict_improvement) baseline = oracle(Placement(current), step_seed);

        GreedyStep audit;
        int best_bus = -1;
        long long best_errors = std::numeric_limits<long long>::max();
        for (const auto& bus : net.buses()) {
            if (bus.is_slack) continue;
            if (std::find(current.begin(), current.end(), bus.id) != current.end()) continue;
            std::vector<int> trial = current;
            trial.push_back(bus.id);
            std::sort(trial.begin(), trial.end());
            const long long errors = oracle(Placement(trial), step_seed);
            audit.candidates.push_back({bus.id, errors});
            if (errors < best_errors) {
                best_errors = errors;
                best_bus = bus.id;
            }
        }
        if (best_bus < 0) break;

        if (cfg.strict_improvement && baseline >= 0 && best_errors >= baseline) {
            audit.chosen_bus = -1;
            audit.chosen_errors = baseline;
            result.audit.push_back(std::move(audit));
            result.early_stopped = true;
            break;
        }

        current.push_back(best_bus);
        std::sort(current.begin(), current.end());
        audit.chosen_bus = best_bus;
        audit.chosen_errors = best_errors;
        result.audit.push_back(std::move(audit));
    }

    result.placement = Placement(current);
    return result;
}

}  // namespace gridsig::placement
