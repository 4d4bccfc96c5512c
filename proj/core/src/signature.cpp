#include "gridsig/signature.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace gridsig::signature {

Placement::Placement(std::vector<int> buses) : buses_(std::move(buses)) {
    if (buses_.empty()) throw GridError("placement must contain at least one bus");
    std::vector<int> sorted = buses_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw GridError("placement buses must be distinct");
    for (int b : buses_)
        if (b < 1) throw GridError("placement bus ids are 1-based");
}

Placement Placement::full(int n) {
    std::vector<int> buses(n);
    for (int i = 0; i < n; ++i) buses[i] = i + 1;
    return Placement(std::move(buses));
}

bool Placement::contains(int bus) const {
    return std::find(buses_.begin(), buses_.end(), bus) != buses_.end();
}

Vec Placement::restrict(const Vec& full) const {
    Vec out(size());
    for (int i = 0; i < size(); ++i) {
        const int idx = buses_[i] - 1;
        if (idx >= full.size()) throw GridError("placement bus id exceeds vector dimension");
        out(i) = full(idx);
    }
    return out;
}

SignatureKey key_for(const SwitchStatus& sigma, int breaker) {
    std::vector<std::uint8_t> ctx;
    ctx.reserve(sigma.size() - 1);
    for (int i = 0; i < sigma.size(); ++i)
        if (i != breaker) ctx.push_back(sigma.closed(i) ? 1 : 0);
    return {breaker, SwitchStatus(std::move(ctx))};
}

SwitchStatus status_with(const SignatureKey& key, bool closed) {
    std::vector<std::uint8_t> bits;
    bits.reserve(key.context.size() + 1);
    for (int i = 0, c = 0; i < key.context.size() + 1; ++i) {
        if (i == key.breaker) bits.push_back(closed ? 1 : 0);
        else bits.push_back(key.context.closed(c++) ? 1 : 0);
    }
    return SwitchStatus(std::move(bits));
}

namespace {

void fix_phase(Vec& g) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double a = std::abs(g(i));
        if (a > best) { best = a; imax = i; }
    }
    if (best > 0.0) g *= std::conj(g(imax)) / best;
}

}  // namespace

Vec signature_vector(const Network& net, const SignatureKey& key) {
    const SwitchStatus closed = status_with(key, true);
    const SwitchStatus open = status_with(key, false);
    const Mat D = grid::voltage_matrix(net, closed) - grid::voltage_matrix(net, open);

    const double dnorm = D.norm();
    if (dnorm == 0.0) throw GridError("zero signature: statuses produce identical voltage matrices");

    // Dominant left singular direction of the (numerically rank-one) difference,
    // by power iteration on D*D^H with a fixed start.
    const auto n = D.rows();
    const auto iterate = [&D](Vec v) {
        for (int it = 0; it < 50; ++it) {
            Vec w = D * (D.adjoint() * v);
            const double nw = w.norm();
            if (nw == 0.0) return Vec(Vec::Zero(v.size()));
            v = w / nw;
        }
        return v;
    };
    Vec v = iterate(Vec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));

    // On networks with an exact bus symmetry the uniform start can be
    // orthogonal to the dominant direction and the iteration stalls inside the
    // symmetric invariant subspace. A converged dominant vector of a rank-one
    // difference satisfies ||D^H v|| ~= ||D||_F, so anything far below that is
    // a stall; restart from the strongest column of D, which always overlaps
    // the left singular direction.
    if (v.isZero(0.0) || (D.adjoint() * v).norm() < 0.5 * dnorm) {
        Eigen::Index jmax = 0;
        D.colwise().norm().maxCoeff(&jmax);
        v = iterate(D.col(jmax) / D.col(jmax).norm());
        if (v.isZero(0.0) || (D.adjoint() * v).norm() < 0.5 * dnorm)
            throw GridError("power iteration failed to isolate the signature direction");
    }
    fix_phase(v);
    return v;
}

Vec signature_direction_xa(const Network& net, const SwitchStatus& sigma_closed, int breaker) {
    const Mat X = grid::voltage_matrix(net, sigma_closed);
    const auto a = grid::incidence(net, breaker);
    Vec av(net.n());
    for (int i = 0; i < net.n(); ++i) av(i) = a[i];
    return X * av;
}

SignatureLibrary::SignatureLibrary(Placement placement, std::uint64_t grid_fingerprint,
                                   std::map<SignatureKey, Vec> entries)
    : placement_(std::move(placement)), fingerprint_(grid_fingerprint), entries_(std::move(entries)) {}

const Vec* SignatureLibrary::find(const SignatureKey& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

Vec restrict_and_normalize(const Vec& g_full, const Placement& placement) {
    Vec v = placement.restrict(g_full);
    const double nv = v.norm();
    if (nv <= 1e-9 * g_full.norm())
        throw UnobservableSignatureError("restricted signature is numerically zero for this placement");
    return v / nv;
}

SignatureLibrary build_library(const Network& net, const Placement& placement) {
    const int r = net.num_switches();
    std::map<SignatureKey, Vec> entries;
    for (int ell = 0; ell < r; ++ell) {
        for (unsigned long mask = 0; mask < (1ul << (r - 1)); ++mask) {
            std::vector<std::uint8_t> ctx(r - 1);
            for (int i = 0; i < r - 1; ++i) ctx[i] = (mask >> i) & 1u;
            const SignatureKey key{ell, SwitchStatus(std::move(ctx))};
            if (!admissible(net, status_with(key, true)) || !admissible(net, status_with(key, false)))
                continue;
            try {
                entries[key] = restrict_and_normalize(signature_vector(net, key), placement);
            } catch (const UnobservableSignatureError& e) {
                throw UnobservableSignatureError(std::string(e.what()) + " (breaker " +
                                                std::to_string(ell) + ", context " +
                                                key.context.to_string() + ")");
            }
        }
    }
    return SignatureLibrary(placement, net.fingerprint(), std::move(entries));
}

std::vector<ParticularCandidate> particular_library(const SignatureLibrary& lib, const Network& net,
                                                    const SwitchStatus& sigma) {
    if (!admissible(net, sigma))
        throw DisconnectedStatusError("status " + sigma.to_string() + " disconnects the feeder");
    std::vector<ParticularCandidate> out;
    for (int ell = 0; ell < net.num_switches(); ++ell) {
        const Vec* g = lib.find(key_for(sigma, ell));
        if (g == nullptr) continue;  // inadmissible toggle
        out.push_back({ell, *g, grid::toggle(sigma, ell)});
    }
    return out;
}

void save_library(const SignatureLibrary& lib, const std::string& path) {
    nlohmann::json j;
    j["format"] = "gridsig-library-v1";
    j["grid_fingerprint"] = lib.grid_fingerprint();
    j["placement"] = lib.placement().buses();
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& [key, g] : lib.entries()) {
        nlohmann::json e;
        e["breaker"] = key.breaker;
        e["context"] = key.context.to_string();
        std::vector<double> re(g.size()), im(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) { re[i] = g(i).real(); im[i] = g(i).imag(); }
        e["re"] = re;
        e["im"] = im;
        entries.push_back(std::move(e));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open library file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

SignatureLibrary load_library(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open library file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": invalid JSON: " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "gridsig-library-v1")
            throw IoError(path + ": unknown library format");
        const auto fp = j.at("grid_fingerprint").get<std::uint64_t>();
        if (fp != net.fingerprint())
            throw IoError(path + ": stale library cache (grid fingerprint mismatch)");
        Placement placement(j.at("placement").get<std::vector<int>>());
        std::map<SignatureKey, Vec> entries;
        for (const auto& e : j.at("entries")) {
            SignatureKey key{e.at("breaker").get<int>(),
                             SwitchStatus::from_string(e.at("context").get<std::string>())};
            const auto re = e.at("re").get<std::vector<double>>();
            const auto im = e.at("im").get<std::vector<double>>();
            if (re.size() != im.size() || static_cast<int>(re.size()) != placement.size())
                throw IoError(path + ": entry dimension does not match placement");
            Vec g(re.size());
            for (std::size_t i = 0; i < re.size(); ++i) g(i) = {re[i], im[i]};
            entries[key] = std::move(g);
        }
        return SignatureLibrary(std::move(placement), fp, std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path + ": malformed library file: " + e.what());
    }
}

}  // namespace gridsig::signature
