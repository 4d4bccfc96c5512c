#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridsig/detection.hpp"
#include "gridsig/rng.hpp"

namespace gridsig::sim {

using grid::Network;
using grid::SwitchStatus;
using grid::Vec;
using signature::Placement;
using signature::SignatureLibrary;

// ---------------------------------------------------------------------------
// Measurement model
// ---------------------------------------------------------------------------

// Per-axis noise scale divisor k with sigma = tve * |u| / k, chosen so that the
// total vector error stays within the tve bound with 99.7% probability:
// k = sqrt(-2 ln(0.003)).
double tve_sigma_divisor();

struct MeasurementModel {
    double tve = 5e-4;           // total vector error bound (99.7% confidence)
    double pt_bias_max = 0.003;  // max transducer bias magnitude, fraction of u_n
    bool enabled = true;         // disabled: measurements are exact restrictions
};

// Complex per-bus transducer biases: magnitude ~ U[0, pt_bias_max * u_n),
// phase ~ U[0, 2*pi). Constant over a run; drawn from the world stream.
Vec draw_pt_biases(int n, const MeasurementModel& m, double u_n, Rng& world);

// One sensor reading: biased voltage plus independent per-axis Gaussian noise
// with sigma = tve * |u_biased| / k.
std::complex<double> sensor_reading(std::complex<double> u_biased, const MeasurementModel& m,
                                    Rng& noise);

// Full measurement vector: restrict to the placement, add biases (all-bus
// vector), then sensor noise. With the model disabled this is I_P * u.
Vec measure(const Vec& u_full, const Placement& pl, const Vec& biases, const MeasurementModel& m,
            Rng& noise);

// ---------------------------------------------------------------------------
// Load model
// ---------------------------------------------------------------------------

struct LoadModel {
    Eigen::VectorXd p0;           // nominal per-unit active consumption (>= 0)
    Eigen::VectorXd gamma;        // reactive-to-active ratio per bus
    Eigen::VectorXd sigma_delta;  // per-sample random-walk standard deviation
    bool clamp_negative = false;  // clamp active power at zero (off by default)
};

// Per-sample random-walk SD relative to each bus's nominal load, for the three
// supported sampling frequencies (1, 0.2, 0.1 Hz). Slower sampling integrates
// more drift per sample. Throws GridError for other frequencies.
double relative_load_sd(double freq_hz);

// Feeder load model; sigma_delta = relative_load_sd(freq) * p0 when variation
// is enabled, zero otherwise.
LoadModel make_load_model(const Network& net, double freq_hz, bool variation);

// Advance the active powers one random-walk step in place (world stream; one
// Gaussian per bus in bus order, including zero-load buses).
void load_step(Eigen::VectorXd& p, const LoadModel& m, Rng& world);

// Complex per-bus injection (negative of consumption, q = gamma .* p).
Vec injection(const Eigen::VectorXd& p, const LoadModel& m);

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

enum class VoltageModel { nonlinear, linear };

struct ScheduledTransition {
    long sample = 0;  // 0-based: first sample measured under the new status
    int breaker = 0;
};

struct ScenarioConfig {
    std::vector<int> placement;  // must match the library placement
    double freq_hz = 1.0;
    long duration = 1000;  // number of samples
    SwitchStatus sigma1;   // initial status (known to the detector)
    std::vector<ScheduledTransition> transitions;
    detection::DetectorConfig detector;
    VoltageModel voltage_model = VoltageModel::nonlinear;
    bool measurement_noise = true;
    bool load_variation = true;
    std::uint64_t seed = 0;
};

// Structural checks: placement matches the network, sigma1 and every
// intermediate status admissible, transitions strictly increasing and at
// least tau apart, samples within range. Throws GridError/DisconnectedStatusError.
void validate_scenario(const ScenarioConfig& cfg, const Network& net);

ScenarioConfig load_scenario(const std::string& path, const Network& net);
void save_scenario(const ScenarioConfig& cfg, const Network& net, const std::string& path);

// ---------------------------------------------------------------------------
// Runs and verdicts
// ---------------------------------------------------------------------------

struct Verdict {
    bool non_detection = false;   // some transition has no event in its window
    bool wrong_detection = false; // some event lies outside every window
    bool decision_error = false;  // some event commits a wrong status

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct RunResult {
    std::vector<detection::DetectionEvent> events;
    Verdict verdict;
    bool aborted = false;  // power flow failed to converge; excluded from stats
    std::string abort_reason;
    SwitchStatus true_final_sigma;
    SwitchStatus estimated_final_sigma;
    std::vector<double> norm_trace;   // per sample, when traces requested
    std::vector<double> score_trace;
};

// Simulate one measurement stream and drive a detector over it. An event
// matches a transition at t* when its commit sample lies in [t*, t* + tau].
// measurements, when non-null, receives the stream fed to the detector.
RunResult run_scenario(const Network& net, const SignatureLibrary& lib, const ScenarioConfig& cfg,
                       bool keep_traces = false, std::vector<Vec>* measurements = nullptr);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct MonteCarloConfig {
    std::vector<int> placement;
    double freq_hz = 1.0;
    long duration = 0;  // 0: round(1000 * freq_hz)
    bool noise = true;  // off: exact sensors, static loads, ideal detector
    // Used verbatim when auto_detector is false; otherwise mode/thresholds
    // follow the noise flag (tau is kept).
    detection::DetectorConfig detector = {};
    bool auto_detector = true;
    VoltageModel voltage_model = VoltageModel::nonlinear;
    long n_runs = 1000;
    std::uint64_t seed = 42;
    int threads = 1;
};

struct ErrorReport {
    long runs = 0;     // completed runs (the denominator)
    long aborted = 0;  // power-flow failures, excluded from runs
    long non_detections = 0;
    long wrong_detections = 0;
    long decision_errors = 0;

    long total_errors() const { return non_detections + wrong_detections + decision_errors; }
    double percent_errors() const {
        return runs > 0 ? 100.0 * static_cast<double>(total_errors()) / static_cast<double>(runs)
                        : 0.0;
    }

    friend bool operator==(const ErrorReport&, const ErrorReport&) = default;
};

struct MonteCarloResult {
    ErrorReport report;
    std::vector<Verdict> verdicts;            // slot per run index
    std::vector<std::uint8_t> aborted_runs;   // slot per run index
};

// Seed of run `index` under a master seed; independent of n_runs and threads.
std::uint64_t run_seed(std::uint64_t master, long index);

// Randomized single-transition experiment: per run draw an admissible initial
// status, a breaker whose toggle stays admissible, and a transition sample
// uniform in [tau, duration - 1 - tau], then simulate and judge. Results are
// byte-identical for any thread count.
MonteCarloResult monte_carlo(const Network& net, const SignatureLibrary& lib,
                             const MonteCarloConfig& cfg);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

void emit_report(const ErrorReport& rep, std::ostream& out);
ErrorReport parse_report(std::istream& in, const std::string& context);
void write_report(const ErrorReport& rep, const std::string& path);
ErrorReport read_report(const std::string& path);

// Measurement stream CSV: header then one row per (sample, sensor):
// t_index, bus_id, re, im.
void write_measurements(const std::string& path, const Placement& pl,
                        const std::vector<Vec>& stream);
std::vector<Vec> read_measurements(const std::string& path, const Placement& pl);

// Named sensor sets for the bundled 33-bus feeder ("P33"/"FULL", "P15", "P7"),
// an inline comma-separated id list, or a path to a JSON file with an id array
// (bare or under a "placement" key).
Placement resolve_placement(const Network& net, const std::string& spec);

}  // namespace gridsig::sim
