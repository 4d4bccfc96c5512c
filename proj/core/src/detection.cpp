#include "gridsig/detection.hpp"

#include <cmath>

namespace gridsig::detection {

Vec trend_vector(const Vec& y1, const Vec& y2) {
    if (y1.size() != y2.size()) throw GridError("trend vector: dimension mismatch");
    return y1 - y2;
}

ProjectionScores project(const Vec& delta, const std::vector<ParticularCandidate>& candidates) {
    const double nd = delta.norm();
    if (nd == 0.0) throw GridError("cannot project a zero trend vector");
    ProjectionScores out;
    out.scores.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (c.g.size() != delta.size()) throw GridError("projection: dimension mismatch");
        const double score = std::abs(c.g.dot(delta)) / nd;  // dot() conjugates c.g
        out.scores.emplace_back(c.breaker, score);
        if (score > out.argmax_value || out.argmax_breaker < 0) {
            if (score > out.argmax_value) {
                out.argmax_value = score;
                out.argmax_breaker = c.breaker;
                out.sigma_after = c.sigma_after;
            } else if (out.argmax_breaker < 0) {
                out.argmax_breaker = c.breaker;
                out.sigma_after = c.sigma_after;
            }
        }
    }
    return out;
}

DetectorConfig DetectorConfig::ideal_defaults() {
    DetectorConfig c;
    c.mode = DetectorMode::ideal;
    c.min_proj = 0.98;
    return c;
}

DetectorConfig DetectorConfig::noisy_defaults(int placement_size) {
    DetectorConfig c;
    c.mode = DetectorMode::noisy;
    c.min_proj = 0.90;
    c.min_norm = default_min_norm(placement_size);
    return c;
}

double default_min_norm(int placement_size) {
    return 0.0016 * std::sqrt(static_cast<double>(placement_size));
}

Detector::Detector(const Network& net, const SignatureLibrary& lib, SwitchStatus sigma0,
                   DetectorConfig cfg)
    : net_(&net), lib_(&lib), cfg_(cfg), sigma_est_(std::move(sigma0)) {
    if (cfg_.mode == DetectorMode::noisy && cfg_.tau < 2)
        throw GridError("noisy detector requires tau >= 2");
    if (cfg_.min_norm <= 0.0) cfg_.min_norm = default_min_norm(lib.placement().size());
    lag_ = (cfg_.mode == DetectorMode::ideal) ? 1 : cfg_.tau;
    ring_.resize(lag_ + 1);
    particular_ = particular_library(*lib_, *net_, sigma_est_);
}

void Detector::commit(int breaker, double peak, long start, long now) {
    DetectionEvent ev;
    ev.sample = now;
    ev.breaker = breaker;
    ev.sigma_before = sigma_est_;
    ev.sigma_after = grid::toggle(sigma_est_, breaker);
    ev.peak_score = peak;
    ev.cluster_start = start;
    ev.cluster_end = now;
    sigma_est_ = ev.sigma_after;
    particular_ = particular_library(*lib_, *net_, sigma_est_);
    events_.push_back(ev);
}

std::optional<DetectionEvent> Detector::step(const Vec& y) {
    if (y.size() != lib_->placement().size())
        throw GridError("measurement dimension does not match the library placement");
    std::optional<DetectionEvent> out;
    last_norm_ = 0.0;
    last_score_ = 0.0;
    if (t_ >= lag_) {
        const Vec& past = ring_[(t_ - lag_) % (lag_ + 1)];
        const Vec delta = y - past;
        const double nrm = delta.norm();
        last_norm_ = nrm;
        if (cfg_.mode == DetectorMode::ideal) {
            if (nrm > cfg_.zero_tol * cfg_.u_n) {
                const auto sc = project(delta, particular_);
                last_score_ = sc.argmax_value;
                if (sc.argmax_value >= cfg_.min_proj) {
                    commit(sc.argmax_breaker, sc.argmax_value, t_, t_);
                    out = events_.back();
                }
            }
        } else {
            if (nrm < cfg_.min_norm) {
                cluster_length_ = 0;
                candidate_.reset();
            } else {
                const auto sc = project(delta, particular_);
                last_score_ = sc.argmax_value;
                if (sc.argmax_value > cfg_.min_proj && candidate_ && *candidate_ == sc.argmax_breaker) {
                    ++cluster_length_;
                    cluster_peak_ = std::max(cluster_peak_, sc.argmax_value);
                } else {
                    cluster_length_ = 1;
                    candidate_ = sc.argmax_breaker;
                    cluster_start_ = t_;
                    cluster_peak_ = sc.argmax_value;
                }
                if (cluster_length_ >= cfg_.tau) {
                    commit(*candidate_, cluster_peak_, cluster_start_, t_);
                    out = events_.back();
                    cluster_length_ = 0;
                    candidate_.reset();
                }
            }
        }
    }
    ring_[t_ % (lag_ + 1)] = y;
    ++t_;
    return out;
}

StreamResult run_stream(Detector& det, const std::vector<Vec>& stream) {
    StreamResult res;
    res.norm_trace.reserve(stream.size());
    res.score_trace.reserve(stream.size());
    for (const Vec& y : stream) {
        auto ev = det.step(y);
        res.norm_trace.push_back(det.last_norm());
        res.score_trace.push_back(det.last_score());
        if (ev) res.events.push_back(*ev);
    }
    return res;
}

}  // namespace gridsig::detection
