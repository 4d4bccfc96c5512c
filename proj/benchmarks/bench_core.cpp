// Microbenchmarks for the hot paths: matrix preparation, library builds,
// power-flow solves, detector steps and whole simulated runs.

#include <benchmark/benchmark.h>

#include <complex>
#include <string>
#include <vector>

#include "gridsig/detection.hpp"
#include "gridsig/grid.hpp"
#include "gridsig/matrices.hpp"
#include "gridsig/powerflow.hpp"
#include "gridsig/rng.hpp"
#include "gridsig/signature.hpp"
#include "gridsig/sim.hpp"

namespace {

using namespace gridsig;
using grid::Mat;
using grid::SwitchStatus;
using grid::Vec;

const grid::Network& net() {
    static const auto n = grid::load_network(std::string(GRIDSIG_DATA_DIR) + "/ieee33.csv");
    return n;
}

const signature::SignatureLibrary& full_lib() {
    static const auto lib = signature::build_library(net(), signature::Placement::full(net().n()));
    return lib;
}

Vec nominal_injection() {
    const auto s_nom = net().nominal_load_pu();
    Vec s(net().n());
    for (int v = 0; v < net().n(); ++v) s(v) = -s_nom[v];
    return s;
}

void BM_VoltageMatrix(benchmark::State& state) {
    const auto sigma = SwitchStatus::from_string("11111");
    for (auto _ : state) benchmark::DoNotOptimize(grid::voltage_matrix(net(), sigma));
}
BENCHMARK(BM_VoltageMatrix);

void BM_SignatureVector(benchmark::State& state) {
    const signature::SignatureKey key{2, SwitchStatus::from_string("1111")};
    for (auto _ : state) benchmark::DoNotOptimize(signature::signature_vector(net(), key));
}
BENCHMARK(BM_SignatureVector);

void BM_LibraryBuild(benchmark::State& state) {
    const auto pl = sim::resolve_placement(net(), "P7");
    for (auto _ : state) benchmark::DoNotOptimize(signature::build_library(net(), pl));
}
BENCHMARK(BM_LibraryBuild)->Unit(benchmark::kMillisecond);

void BM_PowerFlowCold(benchmark::State& state) {
    const Mat X = grid::voltage_matrix(net(), SwitchStatus::from_string("11111"));
    const Vec s = nominal_injection();
    for (auto _ : state) benchmark::DoNotOptimize(grid::solve_power_flow(X, s));
}
BENCHMARK(BM_PowerFlowCold);

void BM_PowerFlowWarm(benchmark::State& state) {
    const Mat X = grid::voltage_matrix(net(), SwitchStatus::from_string("11111"));
    const Vec s = nominal_injection();
    const auto base = grid::solve_power_flow(X, s);
    for (auto _ : state)
        benchmark::DoNotOptimize(grid::solve_power_flow(X, s, 1.0, 1e-10, 100, base.u));
}
BENCHMARK(BM_PowerFlowWarm);

void BM_DetectorStep(benchmark::State& state) {
    detection::DetectorConfig cfg;  // noisy defaults at full sensing
    detection::Detector det(net(), full_lib(), SwitchStatus::from_string("11111"), cfg);
    sim::Rng rng(4);
    std::vector<Vec> ring;
    for (int k = 0; k < 16; ++k) {
        Vec y(net().n());
        for (int v = 0; v < net().n(); ++v)
            y(v) = {1.0 + 0.005 * rng.gauss(), 0.005 * rng.gauss()};
        ring.push_back(y);
    }
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(det.step(ring[i]));
        i = (i + 1) % ring.size();
    }
}
BENCHMARK(BM_DetectorStep);

void BM_ScenarioRun(benchmark::State& state) {
    static const auto lib = signature::build_library(net(), sim::resolve_placement(net(), "P7"));
    sim::ScenarioConfig sc;
    sc.placement = lib.placement().buses();
    sc.freq_hz = 0.1;
    sc.duration = 100;
    sc.sigma1 = SwitchStatus::from_string("11111");
    sc.transitions = {{47, 2}};
    sc.detector = detection::DetectorConfig::noisy_defaults(lib.placement().size());
    sc.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(sim::run_scenario(net(), lib, sc));
}
BENCHMARK(BM_ScenarioRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
