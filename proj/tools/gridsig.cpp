// gridsig: command-line toolkit for switching-action detection on distribution
// feeders. Subcommands: build-library, detect, check-observability, place,
// montecarlo, simulate.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gridsig/detection.hpp"
#include "gridsig/grid.hpp"
#include "gridsig/observability.hpp"
#include "gridsig/powerflow.hpp"
#include "gridsig/signature.hpp"
#include "gridsig/sim.hpp"

namespace {

using namespace gridsig;

signature::SignatureLibrary obtain_library(const grid::Network& net,
                                           const std::string& library_path,
                                           const std::string& placement_spec) {
    if (!library_path.empty()) return signature::load_library(library_path, net);
    if (placement_spec.empty())
        throw GridError("either --library or --placement must be given");
    return signature::build_library(net, sim::resolve_placement(net, placement_spec));
}

void write_events_csv(const std::string& path, const grid::Network& net,
                      const std::vector<detection::DetectionEvent>& events) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open events file for writing: " + path);
    out << "sample, breaker, switch_id, sigma_before, sigma_after, peak_score, "
           "cluster_start, cluster_end\n";
    char score[32];
    for (const auto& ev : events) {
        std::snprintf(score, sizeof score, "%.6f", ev.peak_score);
        const std::string& label = net.switch_line(ev.breaker).switch_id;
        out << ev.sample << ", " << ev.breaker << ", "
            << (label.empty() ? std::to_string(ev.breaker) : label) << ", "
            << ev.sigma_before.to_string() << ", " << ev.sigma_after.to_string() << ", " << score
            << ", " << ev.cluster_start << ", " << ev.cluster_end << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

void write_trace_csv(const std::string& path, const std::vector<double>& norms,
                     const std::vector<double>& scores) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open trace file for writing: " + path);
    out << "t_index, trend_norm, max_score\n";
    char buf[80];
    for (std::size_t t = 0; t < norms.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu, %.10g, %.10g", t, norms[t], scores[t]);
        out << buf << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------

int cmd_build_library(const std::string& network, const std::string& placement,
                      const std::string& out) {
    const auto net = grid::load_network(network);
    const auto pl = sim::resolve_placement(net, placement);
    const auto lib = signature::build_library(net, pl);
    signature::save_library(lib, out);
    std::cout << "library: " << lib.size() << " signatures, " << pl.size() << " sensors -> " << out
              << '\n';
    return 0;
}

int cmd_detect(const std::string& network, const std::string& library,
               const std::string& placement, const std::string& sigma0, const std::string& mode,
               int tau, double min_proj, double min_norm, const std::string& in,
               const std::string& out, const std::string& trace) {
    const auto net = grid::load_network(network);
    const auto lib = obtain_library(net, library, placement);
    if (!placement.empty() && !library.empty() &&
        !(sim::resolve_placement(net, placement) == lib.placement()))
        throw GridError("--placement does not match the library placement");

    detection::DetectorConfig cfg = mode == "ideal"
                                        ? detection::DetectorConfig::ideal_defaults()
                                        : detection::DetectorConfig::noisy_defaults(lib.placement().size());
    if (tau > 0) cfg.tau = tau;
    if (min_proj > 0) cfg.min_proj = min_proj;
    if (min_norm > 0) cfg.min_norm = min_norm;

    const auto stream = sim::read_measurements(in, lib.placement());
    detection::Detector det(net, lib, grid::SwitchStatus::from_string(sigma0), cfg);
    const auto res = detection::run_stream(det, stream);

    write_events_csv(out, net, res.events);
    if (!trace.empty()) write_trace_csv(trace, res.norm_trace, res.score_trace);

    std::cout << "samples: " << stream.size() << "\nevents: " << res.events.size() << '\n';
    for (const auto& ev : res.events)
        std::cout << "  sample " << ev.sample << ": breaker " << ev.breaker << " ("
                  << ev.sigma_before.to_string() << " -> " << ev.sigma_after.to_string()
                  << "), peak score " << ev.peak_score << '\n';
    std::cout << "final status estimate: " << det.sigma_est().to_string() << '\n';
    return 0;
}

int cmd_check_observability(const std::string& network, const std::string& placement,
                            const std::string& library, bool particular, double margin,
                            const std::string& out) {
    const auto net = grid::load_network(network);
    const auto lib = obtain_library(net, library, placement);

    const placement::GramReport rep = particular ? placement::observability_particular(lib, margin)
                                                 : placement::observability_full(lib, margin);
    char val[32];
    std::snprintf(val, sizeof val, "%.8f", rep.max_offdiag);
    std::cout << "certificate: " << (particular ? "particular" : "full") << "\nsensors: "
              << lib.placement().size() << "\nmax off-diagonal: " << val
              << "\nthreshold: " << 1.0 - margin << "\nholds: " << (rep.holds() ? "yes" : "no")
              << '\n';
    if (rep.offending) {
        const auto& [a, b] = *rep.offending;
        std::cout << "offending pair: breaker " << a.breaker << " | context "
                  << a.context.to_string() << "  vs  breaker " << b.breaker << " | context "
                  << b.context.to_string() << '\n';
    }
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw IoError("cannot open report file for writing: " + out);
        if (particular) {
            f << "sigma, max_offdiag, breaker_a, breaker_b\n";
            char buf[64];
            for (const auto& cw : rep.per_context) {
                std::snprintf(buf, sizeof buf, "%.10f", cw.max_offdiag);
                f << cw.sigma.to_string() << ", " << buf << ", " << cw.breaker_a << ", "
                  << cw.breaker_b << '\n';
            }
        } else {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.10f", rep.max_offdiag);
            f << "max_offdiag, holds\n" << buf << ", " << (rep.holds() ? 1 : 0) << '\n';
        }
        if (!f) throw IoError("write failed: " + out);
    }
    return rep.holds() ? 0 : 2;
}

int cmd_place(const std::string& network, const std::string& seed_placement, int target_size,
              long runs, long tstop, double freq, std::uint64_t seed, int threads, bool strict,
              const std::string& out, const std::string& audit_path) {
    const auto net = grid::load_network(network);
    const auto full_lib = signature::build_library(net, signature::Placement::full(net.n()));

    placement::PlacementSearchConfig cfg;
    cfg.initial = sim::resolve_placement(net, seed_placement);
    cfg.target_size = target_size;
    cfg.num_run = runs;
    cfg.tstop = tstop;
    cfg.seed = seed;
    cfg.strict_improvement = strict;

    const placement::ErrorOracle oracle = [&](const signature::Placement& pl,
                                              std::uint64_t step_seed) -> long long {
        signature::SignatureLibrary lib;
        try {
            lib = signature::build_library(net, pl);
        } catch (const UnobservableSignatureError&) {
            return std::numeric_limits<long long>::max() / 2;  // blind placement, never chosen
        }
        sim::MonteCarloConfig mc;
        mc.noise = true;
        mc.freq_hz = freq;
        mc.duration = tstop;
        mc.n_runs = runs;
        mc.seed = step_seed;
        mc.threads = threads;
        const auto res = sim::monte_carlo(net, lib, mc);
        return res.report.total_errors();
    };

    const auto result = placement::greedy_place(net, full_lib, cfg, oracle);

    {
        std::ofstream f(out);
        if (!f) throw IoError("cannot open placement file for writing: " + out);
        f << "{\n  \"placement\": [";
        const auto& buses = result.placement.buses();
        for (std::size_t i = 0; i < buses.size(); ++i)
            f << (i ? ", " : "") << buses[i];
        f << "]\n}\n";
        if (!f) throw IoError("write failed: " + out);
    }
    if (!audit_path.empty()) {
        std::ofstream f(audit_path);
        if (!f) throw IoError("cannot open audit file for writing: " + audit_path);
        f << "step, candidate_bus, errors, chosen\n";
        for (std::size_t s = 0; s < result.audit.size(); ++s)
            for (const auto& c : result.audit[s].candidates)
                f << s << ", " << c.bus << ", " << c.errors << ", "
                  << (c.bus == result.audit[s].chosen_bus ? 1 : 0) << '\n';
        if (!f) throw IoError("write failed: " + audit_path);
    }

    std::cout << "placement:";
    for (int b : result.placement.buses()) std::cout << ' ' << b;
    std::cout << '\n';
    for (std::size_t s = 0; s < result.audit.size(); ++s) {
        const auto& st = result.audit[s];
        if (st.chosen_bus < 0)
            std::cout << "step " << s << ": no candidate improved (stopped)\n";
        else
            std::cout << "step " << s << ": added bus " << st.chosen_bus << " ("
                      << st.chosen_errors << " errors over " << st.candidates.size()
                      << " candidates)\n";
    }
    if (result.early_stopped) std::cout << "early stop: no strict improvement\n";
    return 0;
}

int cmd_montecarlo(const std::string& network, const std::string& placement, double freq,
                   const std::string& noise, long runs, std::uint64_t seed, long duration, int tau,
                   const std::string& mode, double min_proj, double min_norm,
                   const std::string& voltage_model, int threads, const std::string& out) {
    const auto net = grid::load_network(network);
    const auto pl = sim::resolve_placement(net, placement);
    const auto lib = signature::build_library(net, pl);

    sim::MonteCarloConfig mc;
    mc.placement = pl.buses();
    mc.freq_hz = freq;
    mc.duration = duration;
    mc.noise = noise == "on";
    mc.n_runs = runs;
    mc.seed = seed;
    mc.threads = threads;
    mc.voltage_model =
        voltage_model == "linear" ? sim::VoltageModel::linear : sim::VoltageModel::nonlinear;
    if (tau > 0) mc.detector.tau = tau;
    if (mode != "auto") {
        mc.auto_detector = false;
        mc.detector = mode == "ideal" ? detection::DetectorConfig::ideal_defaults()
                                      : detection::DetectorConfig::noisy_defaults(pl.size());
        if (tau > 0) mc.detector.tau = tau;
        if (min_proj > 0) mc.detector.min_proj = min_proj;
        if (min_norm > 0) mc.detector.min_norm = min_norm;
    }

    const auto res = sim::monte_carlo(net, lib, mc);
    sim::emit_report(res.report, std::cout);
    if (!out.empty()) sim::write_report(res.report, out);
    return 0;
}

int cmd_simulate(const std::string& network, const std::string& scenario,
                 const std::string& library, const std::string& out, const std::string& trace_out,
                 const std::string& measurements_out) {
    const auto net = grid::load_network(network);
    const auto cfg = sim::load_scenario(scenario, net);
    signature::SignatureLibrary lib;
    if (!library.empty()) {
        lib = signature::load_library(library, net);
        if (!(lib.placement() == signature::Placement(cfg.placement)))
            throw GridError("library placement does not match the scenario placement");
    } else {
        lib = signature::build_library(net, signature::Placement(cfg.placement));
    }

    std::vector<grid::Vec> measurements;
    const bool keep_traces = !trace_out.empty();
    const auto res = sim::run_scenario(net, lib, cfg, keep_traces,
                                       measurements_out.empty() ? nullptr : &measurements);

    if (!out.empty()) write_events_csv(out, net, res.events);
    if (keep_traces) write_trace_csv(trace_out, res.norm_trace, res.score_trace);
    if (!measurements_out.empty())
        sim::write_measurements(measurements_out, lib.placement(), measurements);

    if (res.aborted) {
        std::cout << "aborted: " << res.abort_reason << '\n';
        return 3;
    }
    std::cout << "events: " << res.events.size() << '\n';
    for (const auto& ev : res.events)
        std::cout << "  sample " << ev.sample << ": breaker " << ev.breaker << " ("
                  << ev.sigma_before.to_string() << " -> " << ev.sigma_after.to_string()
                  << "), peak score " << ev.peak_score << '\n';
    std::cout << "true final status: " << res.true_final_sigma.to_string()
              << "\nestimated final status: " << res.estimated_final_sigma.to_string()
              << "\nverdict: non_detection=" << res.verdict.non_detection
              << " wrong_detection=" << res.verdict.wrong_detection
              << " decision_error=" << res.verdict.decision_error << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Switching-action detection toolkit for distribution feeders"};
    app.require_subcommand(1);

    std::string network, placement, library, out, in, trace, sigma0, scenario;
    std::string mode = "noisy";
    std::string noise = "on";
    std::string voltage_model = "nonlinear";
    std::string audit, measurements_out, trace_out, seed_placement;
    int tau = 0, target_size = 7, threads = 1;
    double min_proj = 0, min_norm = 0, freq = 1.0, margin = 1e-6;
    long runs = 1000, tstop = 100, duration = 0;
    std::uint64_t seed = 42;
    bool particular = false, strict = false;

    auto* bl = app.add_subcommand("build-library", "Precompute a signature library");
    bl->add_option("--network", network, "Feeder data file")->required();
    bl->add_option("--placement", placement, "Sensor set (P33|P15|P7, id list, or file)")->required();
    bl->add_option("--out", out, "Library cache output path")->required();

    auto* de = app.add_subcommand("detect", "Run the detector over a recorded measurement stream");
    de->add_option("--network", network, "Feeder data file")->required();
    de->add_option("--library", library, "Library cache path");
    de->add_option("--placement", placement, "Sensor set (used to build the library if no cache)");
    de->add_option("--sigma0", sigma0, "Initial switch status bits, e.g. 11111")->required();
    de->add_option("--mode", mode, "ideal|noisy")->check(CLI::IsMember({"ideal", "noisy"}));
    de->add_option("--tau", tau, "Trend lag / cluster length");
    de->add_option("--min-proj", min_proj, "Projection threshold");
    de->add_option("--min-norm", min_norm, "Trend-norm gate");
    de->add_option("--in", in, "Measurement stream CSV")->required();
    de->add_option("--out", out, "Events CSV output")->required();
    de->add_option("--trace", trace, "Trace CSV output (norm and score per sample)");

    auto* co = app.add_subcommand("check-observability", "Evaluate the Gram separation certificate");
    co->add_option("--network", network, "Feeder data file")->required();
    co->add_option("--placement", placement, "Sensor set");
    co->add_option("--library", library, "Library cache path");
    co->add_flag("--particular", particular, "Per-status certificate instead of the full library");
    co->add_option("--margin", margin, "Separation margin (default 1e-6)");
    co->add_option("--out", out, "Report CSV output");

    auto* pc = app.add_subcommand("place", "Greedy sensor-placement search");
    pc->add_option("--network", network, "Feeder data file")->required();
    pc->add_option("--seed-placement", seed_placement, "Initial sensor set")->required();
    pc->add_option("--target-size", target_size, "Stop when the set reaches this size");
    pc->add_option("--runs", runs, "Monte Carlo runs per candidate");
    pc->add_option("--tstop", tstop, "Samples per run");
    pc->add_option("--freq", freq, "Sampling frequency in Hz (1|0.2|0.1)");
    pc->add_option("--seed", seed, "Master seed");
    pc->add_option("--threads", threads, "Worker threads");
    pc->add_flag("--strict", strict, "Stop early when no candidate improves");
    pc->add_option("--out", out, "Placement JSON output")->required();
    pc->add_option("--audit", audit, "Audit CSV (per-step candidate errors)");

    auto* mcarlo = app.add_subcommand("montecarlo", "Randomized detection experiment");
    mcarlo->add_option("--network", network, "Feeder data file")->required();
    mcarlo->add_option("--placement", placement, "Sensor set (P33|P15|P7, id list, or file)")->required();
    mcarlo->add_option("--freq", freq, "Sampling frequency in Hz (1|0.2|0.1)");
    mcarlo->add_option("--noise", noise, "on|off")->check(CLI::IsMember({"on", "off"}));
    mcarlo->add_option("--runs", runs, "Number of runs");
    mcarlo->add_option("--seed", seed, "Master seed");
    mcarlo->add_option("--duration", duration, "Samples per run (0 = 1000 s worth)");
    mcarlo->add_option("--tau", tau, "Trend lag / cluster length");
    std::string mc_mode = "auto";
    mcarlo->add_option("--mode", mc_mode, "auto|ideal|noisy")
        ->check(CLI::IsMember({"auto", "ideal", "noisy"}));
    mcarlo->add_option("--min-proj", min_proj, "Projection threshold (with --mode)");
    mcarlo->add_option("--min-norm", min_norm, "Trend-norm gate (with --mode)");
    mcarlo->add_option("--voltage-model", voltage_model, "nonlinear|linear")
        ->check(CLI::IsMember({"nonlinear", "linear"}));
    mcarlo->add_option("--threads", threads, "Worker threads");
    mcarlo->add_option("--out", out, "Report CSV output");

    auto* si = app.add_subcommand("simulate", "Run one scripted scenario");
    si->add_option("--network", network, "Feeder data file")->required();
    si->add_option("--scenario", scenario, "Scenario JSON file")->required();
    si->add_option("--library", library, "Library cache path (else built from the scenario)");
    si->add_option("--out", out, "Events CSV output");
    si->add_option("--trace-out", trace_out, "Trace CSV output");
    si->add_option("--measurements-out", measurements_out, "Measurement stream CSV output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bl->parsed()) return cmd_build_library(network, placement, out);
        if (de->parsed())
            return cmd_detect(network, library, placement, sigma0, mode, tau, min_proj, min_norm,
                              in, out, trace);
        if (co->parsed())
            return cmd_check_observability(network, placement, library, particular, margin, out);
        if (pc->parsed())
            return cmd_place(network, seed_placement, target_size, runs, tstop, freq, seed, threads,
                             strict, out, audit);
        if (mcarlo->parsed())
            return cmd_montecarlo(network, placement, freq, noise, runs, seed, duration, tau,
                                  mc_mode, min_proj, min_norm, voltage_model, threads, out);
        if (si->parsed())
            return cmd_simulate(network, scenario, library, out, trace_out, measurements_out);
    } catch (const GridError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
