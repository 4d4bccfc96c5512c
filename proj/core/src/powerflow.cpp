#include "gridsig/powerflow.hpp"

namespace gridsig::grid {

Vec approx_voltage(const Mat& X, const Vec& s, double u_n) {
    return Vec::Constant(X.rows(), u_n) + X * s.conjugate() / u_n;
}

PowerFlowResult solve_power_flow(const Mat& X, const Vec& s, double u_n, double tol, int max_iter,
                                 const std::optional<Vec>& warm_start) {
    const auto n = X.rows();
    Vec u = warm_start.value_or(Vec::Constant(n, u_n));
    const Vec flat = Vec::Constant(n, u_n);
    Vec i(n);
    double step = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        for (Eigen::Index v = 0; v < n; ++v)
            i(v) = (s(v) == 0.0) ? 0.0 : std::conj(s(v) / u(v));
        Vec u_next = flat + X * i;
        step = (u_next - u).cwiseAbs().maxCoeff();
        u = std::move(u_next);
        if (step <= tol) return {std::move(u), it, step};
    }
    throw ConvergenceError("power flow did not converge", step, max_iter);
}

PowerFlowResult solve_power_flow(const Network& net, const SwitchStatus& sigma, const Vec& s,
                                 double u_n, double tol, int max_iter) {
    return solve_power_flow(voltage_matrix(net, sigma), s, u_n, tol, max_iter);
}

}  // namespace gridsig::grid
