#pragma once

#include <Eigen/Dense>

#include "gridsig/grid.hpp"

namespace gridsig::grid {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Bus admittance matrix for the energized lines under sigma (no shunts):
// a complex-weighted graph Laplacian, symmetric with zero row sums.
Mat bus_admittance(const Network& net, const SwitchStatus& sigma);

// The voltage-model matrix X of the slack-grounded system: the unique
// symmetric matrix with X*e_slack = 0 and X*Y = I - 1*e_slack^T. Computed by
// deleting the slack row/column, inverting, and re-embedding zeros. Throws
// GridError when Y is singular beyond its theoretical kernel (disconnected
// topology fed in directly).
Mat pseudo_inverse(const Mat& Y, int slack = 0);

// Convenience: admittance + pseudo-inverse for an admissible status.
// Throws DisconnectedStatusError when sigma is inadmissible.
Mat voltage_matrix(const Network& net, const SwitchStatus& sigma);

}  // namespace gridsig::grid
