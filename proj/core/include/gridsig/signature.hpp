#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gridsig/matrices.hpp"

namespace gridsig::signature {

using grid::Mat;
using grid::Network;
using grid::SwitchStatus;
using grid::Vec;

// Ordered set of sensor buses (1-based ids). Measurement vectors and library
// vectors share this ordering.
class Placement {
public:
    Placement() = default;
    explicit Placement(std::vector<int> buses);
    static Placement full(int n);  // all buses 1..n

    int size() const { return static_cast<int>(buses_.size()); }
    const std::vector<int>& buses() const { return buses_; }
    bool contains(int bus) const;

    // Select the placement's entries from a full-dimension vector.
    Vec restrict(const Vec& full) const;

    friend bool operator==(const Placement& a, const Placement& b) = default;

private:
    std::vector<int> buses_;
};

// A transition signature is keyed by the breaker and the status of all other
// breakers; opening and closing that breaker under the same context share it.
struct SignatureKey {
    int breaker = 0;
    SwitchStatus context;  // r-1 bits: statuses of the other breakers

    auto operator<=>(const SignatureKey&) const = default;
};

SignatureKey key_for(const SwitchStatus& sigma, int breaker);
SwitchStatus status_with(const SignatureKey& key, bool closed);

// Direction of the rank-one voltage-matrix difference X_closed - X_open for the
// key's breaker (full bus dimension, unit norm, phase fixed so the
// largest-magnitude entry is real positive). Throws DisconnectedStatusError
// when either resulting status is inadmissible.
Vec signature_vector(const Network& net, const SignatureKey& key);

// Oracle helper: X_sigma * a_ell, the closed-form direction of the rank-one
// difference (Sherman-Morrison on the grounded system).
Vec signature_direction_xa(const Network& net, const SwitchStatus& sigma_closed, int breaker);

struct LibraryEntry {
    SignatureKey key;
    Vec g;  // dimension = placement size, unit norm
};

// Placement-restricted signature library: one entry per admissible key.
class SignatureLibrary {
public:
    SignatureLibrary() = default;
    SignatureLibrary(Placement placement, std::uint64_t grid_fingerprint,
                     std::map<SignatureKey, Vec> entries);

    const Placement& placement() const { return placement_; }
    std::uint64_t grid_fingerprint() const { return fingerprint_; }
    const std::map<SignatureKey, Vec>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    const Vec* find(const SignatureKey& key) const;

private:
    Placement placement_;
    std::uint64_t fingerprint_ = 0;
    std::map<SignatureKey, Vec> entries_;
};

// I_P * g / ||I_P * g||; throws UnobservableSignatureError when the restriction
// is numerically zero (relative tolerance 1e-9).
Vec restrict_and_normalize(const Vec& g_full, const Placement& placement);

// Build the library over every admissible key (both toggle endpoints connected).
SignatureLibrary build_library(const Network& net, const Placement& placement);

struct ParticularCandidate {
    int breaker = 0;
    Vec g;
    SwitchStatus sigma_after;
};

// The r (or fewer, when a toggle disconnects) candidates available from sigma.
std::vector<ParticularCandidate> particular_library(const SignatureLibrary& lib,
                                                    const Network& net,
                                                    const SwitchStatus& sigma);

// JSON cache with grid fingerprint and placement; load validates both.
void save_library(const SignatureLibrary& lib, const std::string& path);
SignatureLibrary load_library(const std::string& path, const Network& net);

}  // namespace gridsig::signature
