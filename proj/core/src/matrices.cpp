#include "gridsig/matrices.hpp"

#include <Eigen/LU>

#include <cmath>

namespace gridsig::grid {

Mat bus_admittance(const Network& net, const SwitchStatus& sigma) {
    if (sigma.size() != net.num_switches())
        throw GridError("status size does not match switch count");
    const int n = net.n();
    Mat Y = Mat::Zero(n, n);
    const auto& lines = net.lines();
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        if (l.switch_index >= 0 && !sigma.closed(l.switch_index)) continue;
        const std::complex<double> y = net.line_admittance(static_cast<int>(k));
        const int a = l.from - 1, b = l.to - 1;
        Y(a, a) += y;
        Y(b, b) += y;
        Y(a, b) -= y;
        Y(b, a) -= y;
    }
    return Y;
}

Mat pseudo_inverse(const Mat& Y, int slack) {
    const auto n = Y.rows();
    if (n != Y.cols() || n < 1) throw GridError("admittance matrix must be square");
    if (slack < 0 || slack >= n) throw GridError("slack index out of range");

    // Grounded system: drop the slack row/column.
    Mat G(n - 1, n - 1);
    for (Eigen::Index i = 0, gi = 0; i < n; ++i) {
        if (i == slack) continue;
        for (Eigen::Index j = 0, gj = 0; j < n; ++j) {
            if (j == slack) continue;
            G(gi, gj) = Y(i, j);
            ++gj;
        }
        ++gi;
    }
    Mat Ginv;
    if (n > 1) {
        Eigen::PartialPivLU<Mat> lu(G);
        Ginv = lu.inverse();
    }
    Mat X = Mat::Zero(n, n);
    for (Eigen::Index i = 0, gi = 0; i < n; ++i) {
        if (i == slack) continue;
        for (Eigen::Index j = 0, gj = 0; j < n; ++j) {
            if (j == slack) continue;
            X(i, j) = Ginv(gi, gj);
            ++gj;
        }
        ++gi;
    }

    // LU silently turns singular (disconnected) inputs into inf/nan entries.
    // NaNs never win a max-coefficient scan, so test finiteness explicitly
    // before the residual check.
    if (!std::isfinite(X.cwiseAbs().sum()))
        throw GridError("admittance matrix is singular beyond its kernel (disconnected topology?)");

    // The defining identity X*Y = I - 1*e_slack^T catches near-singular inputs.
    Mat R = X * Y;
    for (Eigen::Index i = 0; i < n; ++i) R(i, i) -= 1.0;
    for (Eigen::Index i = 0; i < n; ++i) R(i, slack) += 1.0;
    const double scale = Y.cwiseAbs().maxCoeff() * X.cwiseAbs().maxCoeff() + 1.0;
    const double resid = R.cwiseAbs().maxCoeff();
    if (!std::isfinite(resid) || resid > 1e-6 * scale)
        throw GridError("admittance matrix is singular beyond its kernel (disconnected topology?)");
    return X;
}

Mat voltage_matrix(const Network& net, const SwitchStatus& sigma) {
    if (!admissible(net, sigma))
        throw DisconnectedStatusError("status " + sigma.to_string() + " disconnects the feeder");
    return pseudo_inverse(bus_admittance(net, sigma), net.slack());
}

}  // namespace gridsig::grid
