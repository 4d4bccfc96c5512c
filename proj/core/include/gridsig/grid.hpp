#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridsig/errors.hpp"

namespace gridsig::grid {

struct Bus {
    int id = 0;          // 1-based external id
    double p_kw = 0.0;   // nominal active load
    double q_kvar = 0.0; // nominal reactive load
    bool is_slack = false;
};

struct Line {
    int from = 0;            // 1-based bus ids
    int to = 0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    int switch_index = -1;   // -1 = fixed line, otherwise 0-based breaker index
    std::string switch_id;   // label from the data file ("S1".."S5"), empty if fixed
};

// Open/closed state of the r switchable lines. Value semantics, comparable,
// printable as a bit string ("10110", breaker 0 first).
class SwitchStatus {
public:
    SwitchStatus() = default;
    explicit SwitchStatus(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    static SwitchStatus from_string(const std::string& s);

    int size() const { return static_cast<int>(bits_.size()); }
    bool closed(int breaker) const { return bits_.at(breaker) != 0; }
    void set(int breaker, bool closed) { bits_.at(breaker) = closed ? 1 : 0; }
    std::string to_string() const;
    unsigned long to_ulong() const;

    friend bool operator==(const SwitchStatus& a, const SwitchStatus& b) = default;
    auto operator<=>(const SwitchStatus& other) const { return bits_ <=> other.bits_; }

private:
    std::vector<std::uint8_t> bits_;
};

// Flip one breaker; returns the neighbouring status.
SwitchStatus toggle(const SwitchStatus& sigma, int breaker);

class Network {
public:
    Network(double base_kv, double base_mva, std::vector<Bus> buses, std::vector<Line> lines);

    int n() const { return static_cast<int>(buses_.size()); }
    int num_switches() const { return num_switches_; }
    int slack() const { return slack_; }  // 0-based internal index

    double base_kv() const { return base_kv_; }
    double base_mva() const { return base_mva_; }
    double z_base_ohm() const { return base_kv_ * base_kv_ / base_mva_; }
    double s_base_kw() const { return base_mva_ * 1000.0; }

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    const Line& switch_line(int breaker) const;

    // Per-unit series admittance of a line.
    std::complex<double> line_admittance(int line_index) const;

    // Nominal per-unit complex consumption per bus (slack = 0).
    std::vector<std::complex<double>> nominal_load_pu() const;

    // FNV-1a 64 over the canonical byte representation of the data.
    std::uint64_t fingerprint() const;

private:
    double base_kv_;
    double base_mva_;
    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    int num_switches_ = 0;
    int slack_ = 0;
};

// True iff every bus is connected to the slack when breakers follow sigma.
bool admissible(const Network& net, const SwitchStatus& sigma);

// All of the 2^r statuses that keep the feeder connected, in bit-string order.
std::vector<SwitchStatus> all_admissible_statuses(const Network& net);

// Signed incidence vector of breaker ell's line: +1 at from, -1 at to.
std::vector<double> incidence(const Network& net, int breaker);

// Sectioned text-table loader; throws IoError with path context on malformed input.
Network load_network(const std::string& path);
Network parse_network(std::istream& in, const std::string& context);

}  // namespace gridsig::grid
