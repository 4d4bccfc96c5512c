#include "gridsig/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gridsig/powerflow.hpp"

namespace gridsig::sim {

// ---------------------------------------------------------------------------
// Measurement model
// ---------------------------------------------------------------------------

double tve_sigma_divisor() { return std::sqrt(-2.0 * std::log(0.003)); }

Vec draw_pt_biases(int n, const MeasurementModel& m, double u_n, Rng& world) {
    Vec biases(n);
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int i = 0; i < n; ++i) {
        const double mag = world.uniform() * m.pt_bias_max * u_n;
        const double phase = world.uniform() * two_pi;
        biases(i) = std::polar(mag, phase);
    }
    return biases;
}

std::complex<double> sensor_reading(std::complex<double> u_biased, const MeasurementModel& m,
                                    Rng& noise) {
    const double sigma = m.tve * std::abs(u_biased) / tve_sigma_divisor();
    const double g_re = noise.gauss();
    const double g_im = noise.gauss();
    return u_biased + std::complex<double>(sigma * g_re, sigma * g_im);
}

Vec measure(const Vec& u_full, const Placement& pl, const Vec& biases, const MeasurementModel& m,
            Rng& noise) {
    Vec y(pl.size());
    for (int i = 0; i < pl.size(); ++i) {
        const int idx = pl.buses()[i] - 1;
        if (idx >= u_full.size()) throw GridError("placement bus id exceeds profile dimension");
        if (!m.enabled) {
            y(i) = u_full(idx);
            continue;
        }
        const std::complex<double> biased = u_full(idx) + biases(idx);
        y(i) = sensor_reading(biased, m, noise);
    }
    return y;
}

// ---------------------------------------------------------------------------
// Load model
// ---------------------------------------------------------------------------

double relative_load_sd(double freq_hz) {
    // Per-sample drift as a fraction of each bus's nominal consumption. The
    // three operating points correspond to 1 s, 5 s and 10 s sampling periods.
    struct Entry {
        double freq;
        double rel_sd;
    };
    static constexpr Entry table[] = {
        {1.0, 0.184 / 27.229},
        {0.2, 0.425 / 27.229},
        {0.1, 0.604 / 27.229},
    };
    for (const auto& e : table)
        if (std::abs(freq_hz - e.freq) <= 1e-9) return e.rel_sd;
    throw GridError("unsupported sampling frequency (expected 1, 0.2 or 0.1 Hz): " +
                    std::to_string(freq_hz));
}

LoadModel make_load_model(const Network& net, double freq_hz, bool variation) {
    const auto s_nom = net.nominal_load_pu();
    const int n = net.n();
    LoadModel m;
    m.p0.resize(n);
    m.gamma.resize(n);
    m.sigma_delta = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        m.p0(i) = s_nom[i].real();
        m.gamma(i) = m.p0(i) > 0.0 ? s_nom[i].imag() / m.p0(i) : 0.0;
    }
    if (variation) m.sigma_delta = relative_load_sd(freq_hz) * m.p0;
    return m;
}

void load_step(Eigen::VectorXd& p, const LoadModel& m, Rng& world) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double g = world.gauss();  // always drawn, keeps the stream aligned
        p(i) += m.sigma_delta(i) * g;
        if (m.clamp_negative && p(i) < 0.0) p(i) = 0.0;
    }
}

Vec injection(const Eigen::VectorXd& p, const LoadModel& m) {
    Vec s(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i)
        s(i) = std::complex<double>(-p(i), -m.gamma(i) * p(i));
    return s;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

void validate_scenario(const ScenarioConfig& cfg, const Network& net) {
    if (cfg.duration < 1) throw GridError("scenario duration must be positive");
    if (cfg.placement.empty()) throw GridError("scenario placement is empty");
    Placement pl(cfg.placement);
    for (int b : pl.buses())
        if (b > net.n()) throw GridError("placement bus id exceeds the network size");
    if (cfg.sigma1.size() != net.num_switches())
        throw GridError("initial status size does not match the switch count");
    if (!grid::admissible(net, cfg.sigma1))
        throw DisconnectedStatusError("initial status disconnects the feeder");
    if (cfg.load_variation) relative_load_sd(cfg.freq_hz);  // validated for support
    if (cfg.detector.mode == detection::DetectorMode::noisy && cfg.detector.tau < 2)
        throw GridError("noisy detector requires tau >= 2");

    SwitchStatus sig = cfg.sigma1;
    long prev = -1;
    for (const auto& tr : cfg.transitions) {
        if (tr.breaker < 0 || tr.breaker >= net.num_switches())
            throw GridError("transition breaker index out of range");
        if (tr.sample < 0 || tr.sample >= cfg.duration)
            throw GridError("transition sample outside the scenario duration");
        if (tr.sample <= prev) throw GridError("transition samples must be strictly increasing");
        if (prev >= 0 && tr.sample - prev < cfg.detector.tau)
            throw GridError("transitions must be at least tau samples apart");
        sig = grid::toggle(sig, tr.breaker);
        if (!grid::admissible(net, sig))
            throw DisconnectedStatusError("transition at sample " + std::to_string(tr.sample) +
                                          " disconnects the feeder");
        prev = tr.sample;
    }
}

namespace {

RunResult run_streams(const Network& net, const SignatureLibrary& lib, const ScenarioConfig& cfg,
                      Rng& world, Rng& noise, bool keep_traces, std::vector<Vec>* measurements) {
    validate_scenario(cfg, net);
    if (!(Placement(cfg.placement) == lib.placement()))
        throw GridError("scenario placement differs from the library placement");

    const Placement& pl = lib.placement();
    const int n = net.n();
    const double u_n = cfg.detector.u_n;

    detection::Detector det(net, lib, cfg.sigma1, cfg.detector);

    const LoadModel lm = make_load_model(net, cfg.freq_hz, cfg.load_variation);
    Eigen::VectorXd p = lm.p0;

    MeasurementModel mm;
    mm.enabled = cfg.measurement_noise;
    Vec biases = Vec::Zero(n);
    if (mm.enabled) biases = draw_pt_biases(n, mm, u_n, world);

    RunResult res;
    SwitchStatus sig = cfg.sigma1;
    grid::Mat X = grid::voltage_matrix(net, sig);
    std::optional<Vec> warm;
    Vec u;
    bool dirty = true;
    std::size_t next_tr = 0;

    for (long t = 0; t < cfg.duration; ++t) {
        if (next_tr < cfg.transitions.size() && cfg.transitions[next_tr].sample == t) {
            sig = grid::toggle(sig, cfg.transitions[next_tr].breaker);
            X = grid::voltage_matrix(net, sig);
            dirty = true;
            ++next_tr;
        }
        if (cfg.load_variation) {
            load_step(p, lm, world);
            dirty = true;
        }
        if (dirty) {
            const Vec s = injection(p, lm);
            if (cfg.voltage_model == VoltageModel::linear) {
                u = grid::approx_voltage(X, s, u_n);
            } else {
                try {
                    auto pf = grid::solve_power_flow(X, s, u_n, 1e-10, 100, warm);
                    u = std::move(pf.u);
                    warm = u;
                } catch (const ConvergenceError& e) {
                    res.aborted = true;
                    res.abort_reason = e.what();
                    break;
                }
            }
            dirty = false;
        }
        const Vec y = measure(u, pl, biases, mm, noise);
        if (measurements) measurements->push_back(y);
        det.step(y);
        if (keep_traces) {
            res.norm_trace.push_back(det.last_norm());
            res.score_trace.push_back(det.last_score());
        }
    }

    res.events = det.events();
    res.true_final_sigma = sig;
    res.estimated_final_sigma = det.sigma_est();

    if (!res.aborted) {
        const int tau = det.config().tau;
        std::vector<char> matched(cfg.transitions.size(), 0);
        for (const auto& ev : res.events) {
            bool in_window = false;
            for (std::size_t k = 0; k < cfg.transitions.size(); ++k) {
                const long ts = cfg.transitions[k].sample;
                if (!matched[k] && ts <= ev.sample && ev.sample <= ts + tau) {
                    matched[k] = 1;
                    in_window = true;
                    break;
                }
            }
            if (!in_window) res.verdict.wrong_detection = true;
            SwitchStatus truth = cfg.sigma1;
            for (const auto& tr : cfg.transitions)
                if (tr.sample <= ev.sample) truth = grid::toggle(truth, tr.breaker);
            if (!(ev.sigma_after == truth)) res.verdict.decision_error = true;
        }
        for (std::size_t k = 0; k < cfg.transitions.size(); ++k)
            if (!matched[k]) res.verdict.non_detection = true;
    }
    return res;
}

}  // namespace

RunResult run_scenario(const Network& net, const SignatureLibrary& lib, const ScenarioConfig& cfg,
                       bool keep_traces, std::vector<Vec>* measurements) {
    Rng world(derive_seed(cfg.seed, 101));
    Rng noise(derive_seed(cfg.seed, 202));
    return run_streams(net, lib, cfg, world, noise, keep_traces, measurements);
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

std::uint64_t run_seed(std::uint64_t master, long index) {
    return derive_seed(master, static_cast<std::uint64_t>(index));
}

MonteCarloResult monte_carlo(const Network& net, const SignatureLibrary& lib,
                             const MonteCarloConfig& cfg) {
    if (cfg.n_runs < 1) throw GridError("Monte Carlo requires at least one run");
    const long T = cfg.duration > 0 ? cfg.duration : std::lround(1000.0 * cfg.freq_hz);

    detection::DetectorConfig dc;
    if (cfg.auto_detector) {
        dc = cfg.noise ? detection::DetectorConfig::noisy_defaults(lib.placement().size())
                       : detection::DetectorConfig::ideal_defaults();
        dc.tau = cfg.detector.tau;
        dc.u_n = cfg.detector.u_n;
    } else {
        dc = cfg.detector;
    }
    if (dc.tau < 1) throw GridError("Monte Carlo requires tau >= 1");
    if (T < 2L * dc.tau + 1) throw GridError("duration too short for the transition window");
    if (!cfg.placement.empty() && !(Placement(cfg.placement) == lib.placement()))
        throw GridError("Monte Carlo placement differs from the library placement");

    const auto statuses = grid::all_admissible_statuses(net);
    if (statuses.empty()) throw GridError("network has no admissible switch status");
    const int r = net.num_switches();

    MonteCarloResult out;
    out.verdicts.assign(static_cast<std::size_t>(cfg.n_runs), {});
    out.aborted_runs.assign(static_cast<std::size_t>(cfg.n_runs), 0);

    const auto one_run = [&](long idx) {
        const std::uint64_t rs = run_seed(cfg.seed, idx);
        Rng world(derive_seed(rs, 101));
        Rng noise(derive_seed(rs, 202));

        SwitchStatus s1;
        int ell = 0;
        for (;;) {
            s1 = statuses[world.uniform_int(statuses.size())];
            ell = static_cast<int>(world.uniform_int(static_cast<std::uint64_t>(r)));
            if (grid::admissible(net, grid::toggle(s1, ell))) break;
        }
        const long tstar =
            dc.tau + static_cast<long>(world.uniform_int(static_cast<std::uint64_t>(T - 2L * dc.tau)));

        ScenarioConfig sc;
        sc.placement = lib.placement().buses();
        sc.freq_hz = cfg.freq_hz;
        sc.duration = T;
        sc.sigma1 = s1;
        sc.transitions = {{tstar, ell}};
        sc.detector = dc;
        sc.voltage_model = cfg.voltage_model;
        sc.measurement_noise = cfg.noise;
        sc.load_variation = cfg.noise;
        sc.seed = rs;

        const RunResult rr = run_streams(net, lib, sc, world, noise, false, nullptr);
        out.verdicts[static_cast<std::size_t>(idx)] = rr.verdict;
        out.aborted_runs[static_cast<std::size_t>(idx)] = rr.aborted ? 1 : 0;
    };

    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (long i = 0; i < cfg.n_runs; ++i) one_run(i);
    } else {
        std::atomic<long> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) {
            workers.emplace_back([&, w] {
                try {
                    for (long i = next.fetch_add(1); i < cfg.n_runs; i = next.fetch_add(1)) one_run(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : workers) th.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    for (long i = 0; i < cfg.n_runs; ++i) {
        if (out.aborted_runs[static_cast<std::size_t>(i)]) {
            ++out.report.aborted;
            continue;
        }
        ++out.report.runs;
        const auto& v = out.verdicts[static_cast<std::size_t>(i)];
        out.report.non_detections += v.non_detection ? 1 : 0;
        out.report.wrong_detections += v.wrong_detection ? 1 : 0;
        out.report.decision_errors += v.decision_error ? 1 : 0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kReportHeader =
    "runs, aborted, non detections, wrong detection, decision errors, total errors, perc. of errors";

std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim_copy(field));
    return out;
}

}  // namespace

void emit_report(const ErrorReport& rep, std::ostream& out) {
    char perc[32];
    std::snprintf(perc, sizeof perc, "%.2f", rep.percent_errors());
    out << kReportHeader << '\n'
        << rep.runs << ", " << rep.aborted << ", " << rep.non_detections << ", "
        << rep.wrong_detections << ", " << rep.decision_errors << ", " << rep.total_errors() << ", "
        << perc << '\n';
}

ErrorReport parse_report(std::istream& in, const std::string& context) {
    std::string header;
    if (!std::getline(in, header)) throw IoError(context + ": empty report");
    if (split_fields(header) != split_fields(kReportHeader))
        throw IoError(context + ": unexpected report header");
    std::string line;
    if (!std::getline(in, line)) throw IoError(context + ": report has no data row");
    const auto fields = split_fields(line);
    if (fields.size() != 7) throw IoError(context + ": report row must have 7 fields");
    ErrorReport rep;
    try {
        rep.runs = std::stol(fields[0]);
        rep.aborted = std::stol(fields[1]);
        rep.non_detections = std::stol(fields[2]);
        rep.wrong_detections = std::stol(fields[3]);
        rep.decision_errors = std::stol(fields[4]);
        const long total = std::stol(fields[5]);
        const double perc = std::stod(fields[6]);
        if (total != rep.total_errors()) throw IoError(context + ": total does not match its parts");
        if (std::abs(perc - rep.percent_errors()) > 0.005 + 1e-9)
            throw IoError(context + ": percentage does not match the counts");
    } catch (const std::invalid_argument&) {
        throw IoError(context + ": malformed numeric field in report");
    } catch (const std::out_of_range&) {
        throw IoError(context + ": numeric field out of range in report");
    }
    return rep;
}

void write_report(const ErrorReport& rep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open report file for writing: " + path);
    emit_report(rep, out);
    if (!out) throw IoError("write failed: " + path);
}

ErrorReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report file: " + path);
    return parse_report(in, path);
}

void write_measurements(const std::string& path, const Placement& pl,
                        const std::vector<Vec>& stream) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open measurement file for writing: " + path);
    out << "t_index, bus_id, re, im\n";
    char buf[96];
    for (std::size_t t = 0; t < stream.size(); ++t) {
        const Vec& y = stream[t];
        if (y.size() != pl.size())
            throw GridError("measurement vector dimension does not match the placement");
        for (int i = 0; i < pl.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu, %d, %.17g, %.17g", t, pl.buses()[i],
                          y(i).real(), y(i).imag());
            out << buf << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<Vec> read_measurements(const std::string& path, const Placement& pl) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open measurement file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty measurement file");
    if (split_fields(line) != std::vector<std::string>{"t_index", "bus_id", "re", "im"})
        throw IoError(path + ": unexpected measurement header");

    std::vector<Vec> stream;
    int col = 0;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim_copy(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 4)
            throw IoError(path + ": row " + std::to_string(row) + " must have 4 fields");
        try {
            const long t = std::stol(fields[0]);
            const int bus = std::stoi(fields[1]);
            const double re = std::stod(fields[2]);
            const double im = std::stod(fields[3]);
            const long expected_t = static_cast<long>(stream.size()) - (col == 0 ? 0 : 1);
            if (col == 0) {
                if (t != static_cast<long>(stream.size()))
                    throw IoError(path + ": row " + std::to_string(row) +
                                  ": t_index must advance by one sample");
                stream.emplace_back(pl.size());
            } else if (t != expected_t) {
                throw IoError(path + ": row " + std::to_string(row) + ": t_index changed mid-sample");
            }
            if (bus != pl.buses()[col])
                throw IoError(path + ": row " + std::to_string(row) +
                              ": bus id does not follow the placement order");
            stream.back()(col) = {re, im};
            col = (col + 1) % pl.size();
        } catch (const std::invalid_argument&) {
            throw IoError(path + ": row " + std::to_string(row) + ": malformed numeric field");
        } catch (const std::out_of_range&) {
            throw IoError(path + ": row " + std::to_string(row) + ": numeric field out of range");
        }
    }
    if (col != 0) throw IoError(path + ": truncated final sample");
    return stream;
}

// ---------------------------------------------------------------------------
// Scenario JSON
// ---------------------------------------------------------------------------

namespace {

int parse_breaker(const nlohmann::json& j, const Network& net) {
    if (j.is_number_integer()) {
        const int b = j.get<int>();
        if (b < 0 || b >= net.num_switches()) throw IoError("breaker index out of range");
        return b;
    }
    if (j.is_string()) {
        const std::string label = j.get<std::string>();
        for (int b = 0; b < net.num_switches(); ++b)
            if (net.switch_line(b).switch_id == label) return b;
        throw IoError("unknown switch label: " + label);
    }
    throw IoError("breaker must be an index or a switch label");
}

detection::DetectorMode parse_mode(const std::string& s) {
    if (s == "ideal") return detection::DetectorMode::ideal;
    if (s == "noisy") return detection::DetectorMode::noisy;
    throw IoError("unknown detector mode: " + s);
}

}  // namespace

ScenarioConfig load_scenario(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": invalid JSON: " + e.what());
    }
    try {
        if (j.value("format", "gridsig-scenario-v1") != std::string("gridsig-scenario-v1"))
            throw IoError(path + ": unknown scenario format");
        ScenarioConfig cfg;
        if (j.at("placement").is_string())
            cfg.placement = resolve_placement(net, j.at("placement").get<std::string>()).buses();
        else
            cfg.placement = j.at("placement").get<std::vector<int>>();
        cfg.freq_hz = j.at("freq_hz").get<double>();
        cfg.duration = j.at("duration").get<long>();
        cfg.sigma1 = SwitchStatus::from_string(j.at("sigma1").get<std::string>());
        for (const auto& t : j.value("transitions", nlohmann::json::array())) {
            ScheduledTransition tr;
            tr.sample = t.at("sample").get<long>();
            tr.breaker = parse_breaker(t.at("breaker"), net);
            cfg.transitions.push_back(tr);
        }
        if (j.contains("detector")) {
            const auto& d = j.at("detector");
            const std::string mode = d.value("mode", "noisy");
            if (parse_mode(mode) == detection::DetectorMode::ideal)
                cfg.detector = detection::DetectorConfig::ideal_defaults();
            else
                cfg.detector =
                    detection::DetectorConfig::noisy_defaults(static_cast<int>(cfg.placement.size()));
            cfg.detector.tau = d.value("tau", cfg.detector.tau);
            cfg.detector.min_proj = d.value("min_proj", cfg.detector.min_proj);
            cfg.detector.min_norm = d.value("min_norm", cfg.detector.min_norm);
            cfg.detector.u_n = d.value("u_n", cfg.detector.u_n);
        } else {
            cfg.detector =
                detection::DetectorConfig::noisy_defaults(static_cast<int>(cfg.placement.size()));
        }
        const std::string vm = j.value("voltage_model", "nonlinear");
        if (vm == "nonlinear") cfg.voltage_model = VoltageModel::nonlinear;
        else if (vm == "linear") cfg.voltage_model = VoltageModel::linear;
        else throw IoError(path + ": unknown voltage model: " + vm);
        cfg.measurement_noise = j.value("measurement_noise", true);
        cfg.load_variation = j.value("load_variation", true);
        cfg.seed = j.value("seed", std::uint64_t{0});
        validate_scenario(cfg, net);
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed scenario file: " + e.what());
    }
}

void save_scenario(const ScenarioConfig& cfg, const Network& net, const std::string& path) {
    validate_scenario(cfg, net);
    nlohmann::json j;
    j["format"] = "gridsig-scenario-v1";
    j["placement"] = cfg.placement;
    j["freq_hz"] = cfg.freq_hz;
    j["duration"] = cfg.duration;
    j["sigma1"] = cfg.sigma1.to_string();
    auto& trs = j["transitions"] = nlohmann::json::array();
    for (const auto& tr : cfg.transitions) {
        nlohmann::json t;
        t["sample"] = tr.sample;
        const std::string& label = net.switch_line(tr.breaker).switch_id;
        if (label.empty()) t["breaker"] = tr.breaker;
        else t["breaker"] = label;
        trs.push_back(std::move(t));
    }
    auto& d = j["detector"];
    d["mode"] = cfg.detector.mode == detection::DetectorMode::ideal ? "ideal" : "noisy";
    d["tau"] = cfg.detector.tau;
    d["min_proj"] = cfg.detector.min_proj;
    d["min_norm"] = cfg.detector.min_norm;
    d["u_n"] = cfg.detector.u_n;
    j["voltage_model"] = cfg.voltage_model == VoltageModel::linear ? "linear" : "nonlinear";
    j["measurement_noise"] = cfg.measurement_noise;
    j["load_variation"] = cfg.load_variation;
    j["seed"] = cfg.seed;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open scenario file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Named placements
// ---------------------------------------------------------------------------

Placement resolve_placement(const Network& net, const std::string& spec) {
    const std::string s = trim_copy(spec);
    if (s.empty()) throw GridError("empty placement specification");

    std::string upper = s;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });

    auto make = [&](std::vector<int> buses) {
        Placement pl(std::move(buses));
        for (int b : pl.buses())
            if (b > net.n()) throw GridError("placement bus id exceeds the network size");
        return pl;
    };

    if (upper == "FULL") return Placement::full(net.n());
    if (upper == "P33" || upper == "P15" || upper == "P7") {
        if (net.n() != 33)
            throw GridError("named placement " + upper + " is defined for the 33-bus feeder only");
        if (upper == "P33") return Placement::full(33);
        if (upper == "P15")
            return make({3, 8, 9, 10, 12, 15, 16, 17, 18, 19, 21, 24, 25, 27, 30});
        return make({9, 12, 15, 18, 24, 27, 30});
    }

    const bool inline_list =
        s.find_first_not_of("0123456789, \t") == std::string::npos && s.find(',') != std::string::npos;
    if (inline_list || s.find_first_not_of("0123456789") == std::string::npos) {
        std::vector<int> buses;
        for (const auto& f : split_fields(s)) {
            if (f.empty()) continue;
            buses.push_back(std::stoi(f));
        }
        return make(std::move(buses));
    }

    std::ifstream in(s);
    if (!in) throw IoError("cannot open placement file: " + s);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(s + ": invalid JSON: " + e.what());
    }
    try {
        if (j.is_array()) return make(j.get<std::vector<int>>());
        return make(j.at("placement").get<std::vector<int>>());
    } catch (const nlohmann::json::exception& e) {
        throw IoError(s + ": malformed placement file: " + e.what());
    }
}

}  // namespace gridsig::sim
