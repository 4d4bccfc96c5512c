#pragma once

#include <optional>

#include "gridsig/matrices.hpp"

namespace gridsig::grid {

// First-order voltage model: u = U_N*1 + X*conj(s)/U_N. s is the complex
// injection per bus (negative for consumption); the slack entry is ignored
// because X's slack column is zero.
Vec approx_voltage(const Mat& X, const Vec& s, double u_n = 1.0);

struct PowerFlowResult {
    Vec u;
    int iterations = 0;
    double residual = 0.0;  // final infinity-norm step size
};

// Fixed point of u = U_N*1 + X*i with constant-power currents i_v = conj(s_v/u_v).
// Converges in a handful of iterations in the light-load feeder regime; throws
// ConvergenceError (carrying the residual) after max_iter without convergence.
// warm_start seeds the iteration (defaults to the flat profile).
PowerFlowResult solve_power_flow(const Mat& X, const Vec& s, double u_n = 1.0,
                                 double tol = 1e-10, int max_iter = 100,
                                 const std::optional<Vec>& warm_start = std::nullopt);

// Convenience overload building X from the network and status.
PowerFlowResult solve_power_flow(const Network& net, const SwitchStatus& sigma, const Vec& s,
                                 double u_n = 1.0, double tol = 1e-10, int max_iter = 100);

}  // namespace gridsig::grid
