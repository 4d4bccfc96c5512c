#include "gridsig/grid.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace gridsig::grid {

SwitchStatus SwitchStatus::from_string(const std::string& s) {
    std::vector<std::uint8_t> bits;
    bits.reserve(s.size());
    for (char c : s) {
        if (c == '0') bits.push_back(0);
        else if (c == '1') bits.push_back(1);
        else throw GridError("switch status string must be 0/1, got: " + s);
    }
    return SwitchStatus(std::move(bits));
}

std::string SwitchStatus::to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
}

unsigned long SwitchStatus::to_ulong() const {
    unsigned long v = 0;
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i]) v |= 1ul << i;
    return v;
}

SwitchStatus toggle(const SwitchStatus& sigma, int breaker) {
    SwitchStatus out = sigma;
    out.set(breaker, !sigma.closed(breaker));
    return out;
}

Network::Network(double base_kv, double base_mva, std::vector<Bus> buses, std::vector<Line> lines)
    : base_kv_(base_kv), base_mva_(base_mva), buses_(std::move(buses)), lines_(std::move(lines)) {
    if (base_kv_ <= 0 || base_mva_ <= 0) throw GridError("base kV and base MVA must be positive");
    if (buses_.empty()) throw GridError("network has no buses");
    int slack_count = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].id != static_cast<int>(i) + 1)
            throw GridError("bus ids must be 1..n in order; got id " + std::to_string(buses_[i].id));
        if (buses_[i].is_slack) { slack_ = static_cast<int>(i); ++slack_count; }
    }
    if (slack_count != 1) throw GridError("network must have exactly one slack bus");
    if (slack_ != 0) throw GridError("slack bus must be bus 1");
    for (const auto& l : lines_) {
        if (l.from < 1 || l.from > n() || l.to < 1 || l.to > n() || l.from == l.to)
            throw GridError("line endpoints out of range");
        if (l.r_ohm < 0 || l.x_ohm < 0 || (l.r_ohm == 0 && l.x_ohm == 0))
            throw GridError("line impedance must be nonzero and nonnegative");
    }
    for (const auto& l : lines_)
        if (l.switch_index >= 0) ++num_switches_;
    // switch indices must be 0..r-1, each exactly once
    std::vector<int> seen(num_switches_, 0);
    for (const auto& l : lines_)
        if (l.switch_index >= 0) {
            if (l.switch_index >= num_switches_) throw GridError("switch indices must be contiguous");
            ++seen[l.switch_index];
        }
    for (int c : seen)
        if (c != 1) throw GridError("each switch index must appear exactly once");
}

const Line& Network::switch_line(int breaker) const {
    for (const auto& l : lines_)
        if (l.switch_index == breaker) return l;
    throw GridError("no switch with index " + std::to_string(breaker));
}

std::complex<double> Network::line_admittance(int line_index) const {
    const Line& l = lines_.at(line_index);
    const std::complex<double> z(l.r_ohm / z_base_ohm(), l.x_ohm / z_base_ohm());
    return 1.0 / z;
}

std::vector<std::complex<double>> Network::nominal_load_pu() const {
    std::vector<std::complex<double>> s(n());
    for (int v = 0; v < n(); ++v)
        s[v] = std::complex<double>(buses_[v].p_kw, buses_[v].q_kvar) / s_base_kw();
    return s;
}

namespace {

void fnv_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
}

void fnv_double(std::uint64_t& h, double d) { fnv_bytes(h, &d, sizeof d); }
void fnv_int(std::uint64_t& h, int v) { fnv_bytes(h, &v, sizeof v); }

}  // namespace

std::uint64_t Network::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    fnv_double(h, base_kv_);
    fnv_double(h, base_mva_);
    for (const auto& b : buses_) {
        fnv_int(h, b.id);
        fnv_double(h, b.p_kw);
        fnv_double(h, b.q_kvar);
        fnv_int(h, b.is_slack ? 1 : 0);
    }
    for (const auto& l : lines_) {
        fnv_int(h, l.from);
        fnv_int(h, l.to);
        fnv_double(h, l.r_ohm);
        fnv_double(h, l.x_ohm);
        fnv_int(h, l.switch_index);
    }
    return h;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) { parent[a] = parent[parent[a]]; a = parent[a]; }
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

bool admissible(const Network& net, const SwitchStatus& sigma) {
    if (sigma.size() != net.num_switches())
        throw GridError("status size " + std::to_string(sigma.size()) + " does not match switch count " +
                        std::to_string(net.num_switches()));
    UnionFind uf(net.n());
    for (const auto& l : net.lines()) {
        if (l.switch_index >= 0 && !sigma.closed(l.switch_index)) continue;
        uf.unite(l.from - 1, l.to - 1);
    }
    const int root = uf.find(net.slack());
    for (int v = 0; v < net.n(); ++v)
        if (uf.find(v) != root) return false;
    return true;
}

std::vector<SwitchStatus> all_admissible_statuses(const Network& net) {
    const int r = net.num_switches();
    std::vector<SwitchStatus> out;
    for (unsigned long mask = 0; mask < (1ul << r); ++mask) {
        std::vector<std::uint8_t> bits(r);
        for (int i = 0; i < r; ++i) bits[i] = (mask >> i) & 1u;
        SwitchStatus s(std::move(bits));
        if (admissible(net, s)) out.push_back(std::move(s));
    }
    return out;
}

std::vector<double> incidence(const Network& net, int breaker) {
    const Line& l = net.switch_line(breaker);
    std::vector<double> a(net.n(), 0.0);
    a[l.from - 1] = 1.0;
    a[l.to - 1] = -1.0;
    return a;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double to_double(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(ctx + ": expected a number, got '" + s + "'");
    }
}

int to_int(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw IoError(ctx + ": expected an integer, got '" + s + "'");
    }
}

}  // namespace

Network parse_network(std::istream& in, const std::string& context) {
    enum class Section { none, base, buses, lines };
    Section section = Section::none;
    bool header_skipped = false;

    double base_kv = 0, base_mva = 0;
    bool have_base = false;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::map<std::string, int> switch_labels;  // label -> order of appearance

    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string ctx = context + ":" + std::to_string(lineno);
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line == "[base]") section = Section::base;
            else if (line == "[buses]") section = Section::buses;
            else if (line == "[lines]") section = Section::lines;
            else throw IoError(ctx + ": unknown section " + line);
            header_skipped = false;
            continue;
        }
        if (section == Section::none) throw IoError(ctx + ": data before any section header");
        if (!header_skipped) { header_skipped = true; continue; }  // column-name row

        const auto f = split_csv(line);
        switch (section) {
            case Section::base: {
                if (f.size() != 2) throw IoError(ctx + ": [base] rows need 2 fields");
                base_kv = to_double(f[0], ctx);
                base_mva = to_double(f[1], ctx);
                have_base = true;
                break;
            }
            case Section::buses: {
                if (f.size() != 4) throw IoError(ctx + ": [buses] rows need 4 fields");
                Bus b;
                b.id = to_int(f[0], ctx);
                b.p_kw = to_double(f[1], ctx);
                b.q_kvar = to_double(f[2], ctx);
                b.is_slack = to_int(f[3], ctx) != 0;
                buses.push_back(b);
                break;
            }
            case Section::lines: {
                if (f.size() != 4 && f.size() != 5) throw IoError(ctx + ": [lines] rows need 4 or 5 fields");
                Line l;
                l.from = to_int(f[0], ctx);
                l.to = to_int(f[1], ctx);
                l.r_ohm = to_double(f[2], ctx);
                l.x_ohm = to_double(f[3], ctx);
                if (f.size() == 5 && !f[4].empty()) {
                    l.switch_id = f[4];
                    auto [it, inserted] = switch_labels.try_emplace(f[4], static_cast<int>(switch_labels.size()));
                    if (!inserted) throw IoError(ctx + ": duplicate switch id " + f[4]);
                    l.switch_index = it->second;
                }
                lines.push_back(l);
                break;
            }
            case Section::none: break;
        }
    }
    if (!have_base) throw IoError(context + ": missing [base] section");
    if (buses.empty()) throw IoError(context + ": missing [buses] section");
    if (lines.empty()) throw IoError(context + ": missing [lines] section");
    try {
        return Network(base_kv, base_mva, std::move(buses), std::move(lines));
    } catch (const GridError& e) {
        throw IoError(context + ": " + e.what());
    }
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open network file: " + path);
    return parse_network(in, path);
}

}  // namespace gridsig::grid
