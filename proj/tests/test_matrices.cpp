#include <doctest.h>

#include <Eigen/Dense>

#include "gridsig/matrices.hpp"
#include "helpers.hpp"

using namespace gridsig;
using grid::Mat;
using grid::SwitchStatus;
using grid::Vec;

TEST_SUITE("matrices") {

TEST_CASE("bus admittance is a complex Laplacian") {
    const auto& net = testutil::ieee33();
    for (const auto& sigma :
         {SwitchStatus::from_string("11111"), SwitchStatus::from_string("00000"),
          SwitchStatus::from_string("10101")}) {
        const Mat Y = grid::bus_admittance(net, sigma);
        CHECK((Y - Y.transpose()).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-12));
        // zero row sums: Y * 1 = 0
        const Vec ones = Vec::Constant(net.n(), 1.0);
        CHECK((Y * ones).cwiseAbs().maxCoeff() < 1e-10 * Y.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("open breakers remove their line from the admittance") {
    const auto& net = testutil::ieee33();
    const Mat Y_all = grid::bus_admittance(net, SwitchStatus::from_string("11111"));
    const Mat Y_open = grid::bus_admittance(net, SwitchStatus::from_string("01111"));
    const auto& line = net.switch_line(0);
    const auto y = net.line_admittance(
        static_cast<int>(&line - net.lines().data()));
    CHECK(std::abs((Y_all - Y_open)(line.from - 1, line.to - 1) - (-y)) < 1e-12);
    CHECK(std::abs((Y_all - Y_open)(line.from - 1, line.from - 1) - y) < 1e-12);
}

TEST_CASE("pseudo-inverse satisfies its defining identities on every status") {
    const auto& net = testutil::ieee33();
    const int n = net.n();
    const Mat I = Mat::Identity(n, n);
    Mat ones_eslack = Mat::Zero(n, n);
    ones_eslack.col(net.slack()).setOnes();  // 1 * e_slack^T

    double worst = 0.0;
    for (const auto& sigma : grid::all_admissible_statuses(net)) {
        const Mat Y = grid::bus_admittance(net, sigma);
        const Mat X = grid::voltage_matrix(net, sigma);
        // X e_slack = 0
        CHECK(X.col(net.slack()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(X.row(net.slack()).cwiseAbs().maxCoeff() == 0.0);
        // X symmetric
        CHECK((X - X.transpose()).cwiseAbs().maxCoeff() < 1e-12 * X.cwiseAbs().maxCoeff());
        // X Y = I - 1 e_slack^T
        worst = std::max(worst, (X * Y - (I - ones_eslack)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("path network has the textbook voltage matrix") {
    const auto net = testutil::path3();
    const Mat X = grid::voltage_matrix(net, SwitchStatus::from_string("1"));
    Mat expected(3, 3);
    expected << 0, 0, 0, 0, 1, 1, 0, 1, 2;
    CHECK((X - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("disconnected status is rejected") {
    const auto net = testutil::path3();
    CHECK_THROWS_AS(grid::voltage_matrix(net, SwitchStatus::from_string("0")),
                    DisconnectedStatusError);
    // Feeding the singular admittance straight into the pseudo-inverse is
    // caught by the residual check rather than silently returning garbage.
    const Mat Y = grid::bus_admittance(net, SwitchStatus::from_string("0"));
    CHECK_THROWS_AS(grid::pseudo_inverse(Y), GridError);
}

}  // TEST_SUITE
