#include <doctest.h>

#include <complex>
#include <sstream>

#include "gridsig/grid.hpp"
#include "helpers.hpp"

using namespace gridsig;
using grid::Network;
using grid::SwitchStatus;

TEST_SUITE("grid") {

TEST_CASE("bundled feeder loads with expected shape") {
    const Network& net = testutil::ieee33();
    CHECK(net.n() == 33);
    CHECK(net.num_switches() == 5);
    CHECK(net.lines().size() == 37);
    CHECK(net.slack() == 0);
    CHECK(net.buses()[0].is_slack);
    CHECK(net.base_kv() == doctest::Approx(12.66));
    CHECK(net.base_mva() == doctest::Approx(100.0));
    CHECK(net.z_base_ohm() == doctest::Approx(1.602756).epsilon(1e-6));
    CHECK(net.s_base_kw() == doctest::Approx(100000.0));

    double p = 0, q = 0;
    for (const auto& b : net.buses()) {
        p += b.p_kw;
        q += b.q_kvar;
    }
    CHECK(p == doctest::Approx(3715.0));
    CHECK(q == doctest::Approx(2300.0));

    // switch labels appear in file order
    for (int b = 0; b < 5; ++b) CHECK(net.switch_line(b).switch_id == "S" + std::to_string(b + 1));
}

TEST_CASE("per-unit nominal loads sum to the feeder total") {
    const Network& net = testutil::ieee33();
    std::complex<double> total = 0;
    for (const auto& s : net.nominal_load_pu()) total += s;
    CHECK(total.real() == doctest::Approx(3715.0 / 100000.0));
    CHECK(total.imag() == doctest::Approx(2300.0 / 100000.0));
    CHECK(net.nominal_load_pu()[net.slack()] == std::complex<double>(0.0, 0.0));
}

TEST_CASE("every breaker combination keeps the bundled feeder connected") {
    // The 32 fixed branches already span all 33 buses; the five switchable
    // ties only add cycles, so all 2^5 statuses are admissible.
    const auto statuses = grid::all_admissible_statuses(testutil::ieee33());
    CHECK(statuses.size() == 32);
    for (const auto& s : statuses) CHECK(grid::admissible(testutil::ieee33(), s));
}

TEST_CASE("switch status string round trip and toggling") {
    auto s = SwitchStatus::from_string("10110");
    CHECK(s.size() == 5);
    CHECK(s.to_string() == "10110");
    CHECK(s.closed(0));
    CHECK_FALSE(s.closed(1));
    CHECK(s.to_ulong() == 0b01101u);  // breaker 0 is the least significant bit

    auto t = grid::toggle(s, 1);
    CHECK(t.to_string() == "11110");
    CHECK(grid::toggle(t, 1) == s);  // toggling twice restores the status
    CHECK_THROWS_AS(SwitchStatus::from_string("10x"), GridError);
}

TEST_CASE("incidence vector is signed at the breaker endpoints") {
    const Network& net = testutil::ieee33();
    for (int b = 0; b < net.num_switches(); ++b) {
        const auto a = grid::incidence(net, b);
        const auto& line = net.switch_line(b);
        double sum = 0;
        int nonzero = 0;
        for (int v = 0; v < net.n(); ++v) {
            sum += a[v];
            if (a[v] != 0.0) ++nonzero;
        }
        CHECK(nonzero == 2);
        CHECK(sum == 0.0);
        CHECK(a[line.from - 1] == 1.0);
        CHECK(a[line.to - 1] == -1.0);
    }
}

TEST_CASE("fingerprint is stable and sensitive to data changes") {
    const Network& net = testutil::ieee33();
    CHECK(net.fingerprint() == grid::load_network(testutil::data_path("ieee33.csv")).fingerprint());

    auto buses = net.buses();
    auto lines = net.lines();
    buses[5].p_kw += 1.0;
    const Network changed(net.base_kv(), net.base_mva(), buses, lines);
    CHECK(changed.fingerprint() != net.fingerprint());
}

TEST_CASE("path network voltage structure via the public API") {
    const auto net = testutil::path3();
    CHECK(net.n() == 3);
    CHECK(net.num_switches() == 1);
    // Opening the only path to bus 3 strands it.
    CHECK(grid::admissible(net, SwitchStatus::from_string("1")));
    CHECK_FALSE(grid::admissible(net, SwitchStatus::from_string("0")));
    CHECK(grid::all_admissible_statuses(net).size() == 1);
    // Unit impedance at unit bases stays unit in per-unit.
    CHECK(net.z_base_ohm() == doctest::Approx(1.0));
    CHECK(net.line_admittance(0) == std::complex<double>(1.0, 0.0));
}

TEST_CASE("constructor validation") {
    using grid::Bus;
    using grid::Line;
    // bus ids must be 1..n in order
    CHECK_THROWS_AS((Network(1, 1, {{2, 0, 0, true}}, {{1, 1, 1, 0, -1, ""}})), GridError);
    // exactly one slack
    CHECK_THROWS_AS((Network(1, 1, {{1, 0, 0, false}, {2, 0, 0, false}}, {{1, 2, 1, 0, -1, ""}})),
                    GridError);
    CHECK_THROWS_AS((Network(1, 1, {{1, 0, 0, true}, {2, 0, 0, true}}, {{1, 2, 1, 0, -1, ""}})),
                    GridError);
    // zero impedance rejected
    CHECK_THROWS_AS((Network(1, 1, {{1, 0, 0, true}, {2, 0, 0, false}}, {{1, 2, 0, 0, -1, ""}})),
                    GridError);
    // line endpoint out of range
    CHECK_THROWS_AS((Network(1, 1, {{1, 0, 0, true}, {2, 0, 0, false}}, {{1, 3, 1, 0, -1, ""}})),
                    GridError);
    // switch indices must be contiguous from zero
    CHECK_THROWS_AS((Network(1, 1, {{1, 0, 0, true}, {2, 0, 0, false}}, {{1, 2, 1, 0, 1, "S2"}})),
                    GridError);
}

TEST_CASE("parser rejects malformed files with line context") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return grid::parse_network(in, "test.csv");
    };

    const std::string good =
        "[base]\nkv, mva\n1.0, 1.0\n"
        "[buses]\nid, p, q, slack\n1, 0, 0, 1\n2, 5, 2, 0\n"
        "[lines]\nfrom, to, r, x, sw\n1, 2, 1.0, 0.5,\n";
    CHECK(parse(good).n() == 2);

    CHECK_THROWS_AS(parse("1, 2\n"), IoError);                        // data before section
    CHECK_THROWS_AS(parse("[bogus]\n"), IoError);                     // unknown section
    CHECK_THROWS_AS(parse("[base]\nh\n1.0\n"), IoError);              // wrong arity
    CHECK_THROWS_AS(parse("[base]\nh\nabc, 1.0\n"), IoError);         // bad number
    CHECK_THROWS_AS(parse("[base]\nh\n1.0, 1.0\n"), IoError);         // missing buses/lines
    CHECK_THROWS_WITH_AS(parse("[base]\nh\n1.0, x\n"),
                         doctest::Contains("test.csv:3"), IoError);   // line context

    // duplicate switch label
    const std::string dup =
        "[base]\nkv, mva\n1.0, 1.0\n"
        "[buses]\nid, p, q, slack\n1, 0, 0, 1\n2, 5, 2, 0\n3, 5, 2, 0\n"
        "[lines]\nfrom, to, r, x, sw\n1, 2, 1, 0, S1\n2, 3, 1, 0, S1\n";
    CHECK_THROWS_AS(parse(dup), IoError);

    CHECK_THROWS_AS(grid::load_network("/nonexistent/net.csv"), IoError);
}

}  // TEST_SUITE
