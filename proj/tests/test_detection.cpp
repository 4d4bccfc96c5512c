#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "gridsig/detection.hpp"
#include "helpers.hpp"

using namespace gridsig;
using grid::SwitchStatus;
using grid::Vec;
using detection::Detector;
using detection::DetectorConfig;
using detection::DetectorMode;
using signature::ParticularCandidate;

namespace {

const SwitchStatus kAllClosed = SwitchStatus::from_string("11111");

const std::vector<ParticularCandidate>& candidates_all_closed() {
    static const auto cands = signature::particular_library(
        testutil::ieee33_full_library(), testutil::ieee33(), kAllClosed);
    return cands;
}

// Build a measurement stream whose lag-`lag` trend vectors are exactly
// `deltas[0..]` at samples lag, lag+1, ...; earlier samples are zero.
std::vector<Vec> make_stream(int lag, const std::vector<Vec>& deltas, int dim) {
    std::vector<Vec> stream(lag + deltas.size(), Vec::Zero(dim));
    for (std::size_t i = 0; i < deltas.size(); ++i)
        stream[lag + i] = deltas[i] + stream[i];
    return stream;
}

// Component of `seed` orthogonal to the span of all current candidates,
// normalized. Used to dilute a signature to a chosen projection score.
Vec orthogonal_direction(const Vec& seed) {
    const auto& cands = candidates_all_closed();
    grid::Mat G(seed.size(), cands.size());
    for (std::size_t j = 0; j < cands.size(); ++j) G.col(j) = cands[j].g;
    const Vec coeff = (G.adjoint() * G).ldlt().solve(G.adjoint() * seed);
    Vec q = seed - G * coeff;
    return q / q.norm();
}

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("trend vector is an elementwise difference") {
    Vec a(2), b(2);
    a << std::complex<double>(1.0, 2.0), std::complex<double>(3.0, 0.0);
    b << std::complex<double>(0.5, 0.0), std::complex<double>(0.0, 1.0);
    const Vec d = detection::trend_vector(a, b);
    CHECK(d(0) == std::complex<double>(0.5, 2.0));
    CHECK(d(1) == std::complex<double>(3.0, -1.0));
    CHECK_THROWS_AS(detection::trend_vector(a, Vec::Zero(3)), GridError);
}

TEST_CASE("projection scores are phase and scale invariant") {
    const auto& cands = candidates_all_closed();
    Vec delta = 0.4 * cands[3].g + 0.1 * cands[0].g;
    const auto base = detection::project(delta, cands);
    REQUIRE(base.scores.size() == cands.size());

    const std::complex<double> c = 0.7 * std::exp(std::complex<double>(0.0, 1.3));
    const auto rotated = detection::project(c * delta, cands);
    CHECK(rotated.argmax_breaker == base.argmax_breaker);
    for (std::size_t i = 0; i < base.scores.size(); ++i) {
        CHECK(rotated.scores[i].first == base.scores[i].first);
        CHECK(rotated.scores[i].second == doctest::Approx(base.scores[i].second).epsilon(1e-12));
    }

    CHECK(base.argmax_breaker == 3);
    CHECK(base.argmax_value == doctest::Approx(base.scores[3].second));
    CHECK(base.sigma_after == grid::toggle(kAllClosed, 3));
    CHECK_THROWS_AS(detection::project(Vec::Zero(33), cands), GridError);
    CHECK_THROWS_AS(detection::project(Vec::Zero(5), cands), GridError);
}

TEST_CASE("equal scores resolve to the lowest breaker") {
    const auto& cands = candidates_all_closed();
    // Two manual candidates sharing one signature: both score 1, tie -> breaker 1.
    std::vector<ParticularCandidate> manual = {
        {1, cands[0].g, grid::toggle(kAllClosed, 1)},
        {3, cands[0].g, grid::toggle(kAllClosed, 3)},
    };
    const auto sc = detection::project(cands[0].g, manual);
    CHECK(sc.argmax_breaker == 1);
    CHECK(sc.argmax_value == doctest::Approx(1.0));
    CHECK(sc.sigma_after == grid::toggle(kAllClosed, 1));
}

TEST_CASE("configuration defaults and validation") {
    CHECK(detection::default_min_norm(33) == doctest::Approx(0.0016 * std::sqrt(33.0)));
    const auto ideal = DetectorConfig::ideal_defaults();
    CHECK(ideal.mode == DetectorMode::ideal);
    CHECK(ideal.min_proj == 0.98);
    const auto noisy = DetectorConfig::noisy_defaults(7);
    CHECK(noisy.mode == DetectorMode::noisy);
    CHECK(noisy.min_proj == 0.90);
    CHECK(noisy.tau == 5);
    CHECK(noisy.min_norm == doctest::Approx(0.0016 * std::sqrt(7.0)));

    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    DetectorConfig cfg;  // min_norm 0 -> filled from the placement size
    Detector det(net, lib, kAllClosed, cfg);
    CHECK(det.config().min_norm == doctest::Approx(detection::default_min_norm(33)));

    cfg.tau = 1;
    CHECK_THROWS_AS(Detector(net, lib, kAllClosed, cfg), GridError);
    Detector ok(net, lib, kAllClosed, DetectorConfig::ideal_defaults());
    CHECK_THROWS_AS(ok.step(Vec::Zero(5)), GridError);
}

TEST_CASE("ideal mode commits once per transition and ignores numerical dust") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec g0 = candidates_all_closed()[0].g;

    const std::vector<Vec> deltas = {1e-14 * g0, 0.01 * g0, Vec::Zero(33), Vec::Zero(33)};
    Detector det(net, lib, kAllClosed, DetectorConfig::ideal_defaults());
    const auto res = detection::run_stream(det, make_stream(1, deltas, 33));

    REQUIRE(res.events.size() == 1);
    const auto& ev = res.events[0];
    CHECK(ev.sample == 2);
    CHECK(ev.breaker == 0);
    CHECK(ev.cluster_start == 2);
    CHECK(ev.cluster_end == 2);
    CHECK(ev.peak_score == doctest::Approx(1.0));
    CHECK(ev.sigma_before == kAllClosed);
    CHECK(ev.sigma_after == SwitchStatus::from_string("01111"));
    CHECK(det.sigma_est() == ev.sigma_after);
    // warm-up and sub-threshold samples leave zeroed traces
    CHECK(res.norm_trace[0] == 0.0);
    CHECK(res.score_trace[1] == 0.0);
    CHECK(res.norm_trace[2] == doctest::Approx(0.01));
}

TEST_CASE("noisy mode commits after tau consistent samples") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec A = 0.01 * candidates_all_closed()[0].g;

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    // three matching trends, then the stream goes quiet
    const auto res = detection::run_stream(
        det, make_stream(3, {A, A, A, Vec::Zero(33), Vec::Zero(33), Vec::Zero(33)}, 33));

    REQUIRE(res.events.size() == 1);
    const auto& ev = res.events[0];
    CHECK(ev.sample == 5);
    CHECK(ev.cluster_start == 3);
    CHECK(ev.cluster_end == 5);
    CHECK(ev.breaker == 0);
    CHECK(ev.peak_score == doctest::Approx(1.0));
    CHECK(det.cluster_length() == 0);
    CHECK(!det.candidate().has_value());
}

TEST_CASE("a weak sample resets the cluster") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec A = 0.01 * candidates_all_closed()[0].g;
    const Vec weak = 0.001 * candidates_all_closed()[0].g;  // below the norm gate

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    const auto res = detection::run_stream(det, make_stream(3, {A, weak, A, A, A}, 33));

    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].sample == 7);         // delayed by the reset at sample 4
    CHECK(res.events[0].cluster_start == 5);  // cluster restarted after the gap
}

TEST_CASE("a different winning candidate restarts the cluster") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec A = 0.01 * candidates_all_closed()[0].g;
    const Vec B = 0.01 * candidates_all_closed()[1].g;

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    const auto res = detection::run_stream(det, make_stream(3, {A, B, B, B, Vec::Zero(33)}, 33));

    REQUIRE(res.events.size() == 1);
    const auto& ev = res.events[0];
    CHECK(ev.breaker == 1);
    CHECK(ev.sample == 6);
    CHECK(ev.cluster_start == 4);
    CHECK(ev.sigma_after == SwitchStatus::from_string("10111"));
}

TEST_CASE("scores at or below the threshold never extend a cluster") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec g0 = candidates_all_closed()[0].g;
    const Vec q = orthogonal_direction(Vec::Unit(33, 5));
    // best projection 0.85: above the norm gate, below min_proj = 0.90
    const Vec M = 0.01 * (0.85 * g0 + std::sqrt(1.0 - 0.85 * 0.85) * q);

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    std::vector<Vec> deltas(5, M);
    for (const Vec& y : make_stream(3, deltas, 33)) {
        det.step(y);
        if (det.samples_seen() > 3) {
            CHECK(det.last_score() > 0.0);
            CHECK(det.last_score() < 0.90);
            CHECK(det.cluster_length() == 1);  // restarts every sample, never grows
        }
    }
    CHECK(det.events().empty());
    REQUIRE(det.candidate().has_value());
    CHECK(*det.candidate() == 0);
}

TEST_CASE("a sub-threshold sample can seed a cluster that then commits") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec g0 = candidates_all_closed()[0].g;
    const Vec q = orthogonal_direction(Vec::Unit(33, 5));
    const Vec M = 0.01 * (0.85 * g0 + std::sqrt(1.0 - 0.85 * 0.85) * q);
    const Vec A = 0.01 * g0;

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    // the second weak sample replaces the first as the cluster seed
    const auto res = detection::run_stream(det, make_stream(3, {M, M, A, A}, 33));

    REQUIRE(res.events.size() == 1);
    CHECK(res.events[0].sample == 6);
    CHECK(res.events[0].cluster_start == 4);
    CHECK(res.events[0].peak_score == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("stream traces align with samples") {
    const auto& net = testutil::ieee33();
    const auto& lib = testutil::ieee33_full_library();
    const Vec A = 0.01 * candidates_all_closed()[0].g;

    DetectorConfig cfg;
    cfg.tau = 3;
    Detector det(net, lib, kAllClosed, cfg);
    const auto stream = make_stream(3, {A, A, A}, 33);
    const auto res = detection::run_stream(det, stream);

    REQUIRE(res.norm_trace.size() == stream.size());
    REQUIRE(res.score_trace.size() == stream.size());
    for (int t = 0; t < 3; ++t) {
        CHECK(res.norm_trace[t] == 0.0);
        CHECK(res.score_trace[t] == 0.0);
    }
    for (std::size_t t = 3; t < stream.size(); ++t) {
        CHECK(res.norm_trace[t] == doctest::Approx(0.01));
        CHECK(res.score_trace[t] == doctest::Approx(1.0));
    }
    CHECK(det.samples_seen() == static_cast<long>(stream.size()));
}

}  // TEST_SUITE
