#pragma once

#include <optional>
#include <vector>

#include "gridsig/signature.hpp"

namespace gridsig::detection {

using grid::Network;
using grid::SwitchStatus;
using grid::Vec;
using signature::ParticularCandidate;
using signature::SignatureLibrary;

// delta(t1, t2) = y(t1) - y(t2).
Vec trend_vector(const Vec& y1, const Vec& y2);

struct ProjectionScores {
    std::vector<std::pair<int, double>> scores;  // (breaker, |<delta_hat, g>|), breaker ascending
    int argmax_breaker = -1;
    double argmax_value = 0.0;
    SwitchStatus sigma_after;  // status proposed by the argmax candidate
};

// Projection magnitudes of the normalized trend vector onto each candidate
// signature. Invariant under delta -> c*delta for any nonzero complex c.
// Throws GridError on a zero trend vector. Ties pick the lowest breaker.
ProjectionScores project(const Vec& delta, const std::vector<ParticularCandidate>& candidates);

enum class DetectorMode { ideal, noisy };

struct DetectorConfig {
    DetectorMode mode = DetectorMode::noisy;
    int tau = 5;             // trend lag and cluster length (noisy mode); must be >= 2
    double min_proj = 0.90;  // 0.98 in ideal mode
    double min_norm = 0.0;   // noisy-mode norm gate; <= 0 selects the placement default
    double u_n = 1.0;        // nominal voltage of the measurement scale
    double zero_tol = 1e-12; // ideal-mode numerical zero, relative to u_n

    static DetectorConfig ideal_defaults();
    static DetectorConfig noisy_defaults(int placement_size);
};

// Shipped norm-gate default: the trend-norm noise floor grows with the square
// root of the sensor count, so the gate is specified per sensor (RMS) and
// scaled to the placement: 0.0016 * sqrt(p) per-unit.
double default_min_norm(int placement_size);

struct DetectionEvent {
    long sample = 0;  // commit sample index
    int breaker = -1;
    SwitchStatus sigma_before;
    SwitchStatus sigma_after;
    double peak_score = 0.0;
    long cluster_start = 0;  // == sample in ideal mode
    long cluster_end = 0;
};

// Online detector; one instance per measurement stream (single-threaded
// mutation). The library and network must outlive the detector.
class Detector {
public:
    Detector(const Network& net, const SignatureLibrary& lib, SwitchStatus sigma0, DetectorConfig cfg);

    // Feed one measurement vector (placement dimension); returns the committed
    // event, if this sample produced one.
    std::optional<DetectionEvent> step(const Vec& y);

    const SwitchStatus& sigma_est() const { return sigma_est_; }
    const DetectorConfig& config() const { return cfg_; }
    const std::vector<DetectionEvent>& events() const { return events_; }
    int cluster_length() const { return cluster_length_; }
    std::optional<int> candidate() const { return candidate_; }
    long samples_seen() const { return t_; }

    // Trace values for the most recent sample: trend norm (0 during warm-up)
    // and argmax projection score (0 during warm-up or below the norm gate).
    double last_norm() const { return last_norm_; }
    double last_score() const { return last_score_; }

private:
    void commit(int breaker, double peak, long start, long now);

    const Network* net_;
    const SignatureLibrary* lib_;
    DetectorConfig cfg_;
    int lag_;
    SwitchStatus sigma_est_;
    std::vector<ParticularCandidate> particular_;
    std::vector<Vec> ring_;
    long t_ = 0;
    std::optional<int> candidate_;
    int cluster_length_ = 0;
    long cluster_start_ = 0;
    double cluster_peak_ = 0.0;
    double last_norm_ = 0.0;
    double last_score_ = 0.0;
    std::vector<DetectionEvent> events_;
};

struct StreamResult {
    std::vector<DetectionEvent> events;
    std::vector<double> norm_trace;   // one entry per sample
    std::vector<double> score_trace;  // one entry per sample
};

// Drive a detector over a whole stream, recording traces.
StreamResult run_stream(Detector& det, const std::vector<Vec>& stream);

}  // namespace gridsig::detection
