#pragma once

#include <string>

#include "gridsig/grid.hpp"
#include "gridsig/signature.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(GRIDSIG_DATA_DIR) + "/" + name;
}

// The bundled 33-bus feeder, loaded once.
inline const gridsig::grid::Network& ieee33() {
    static const gridsig::grid::Network net = gridsig::grid::load_network(data_path("ieee33.csv"));
    return net;
}

inline const gridsig::signature::SignatureLibrary& ieee33_full_library() {
    static const gridsig::signature::SignatureLibrary lib = gridsig::signature::build_library(
        ieee33(), gridsig::signature::Placement::full(ieee33().n()));
    return lib;
}

// Three buses in a line 1-2-3 with unit per-unit impedances and a breaker on
// the far segment; opening it strands bus 3.
inline gridsig::grid::Network path3() {
    using namespace gridsig::grid;
    std::vector<Bus> buses = {
        {1, 0.0, 0.0, true}, {2, 10.0, 5.0, false}, {3, 10.0, 5.0, false}};
    std::vector<Line> lines = {
        {1, 2, 1.0, 0.0, -1, ""},
        {2, 3, 1.0, 0.0, 0, "S1"},
    };
    return Network(1.0, 1.0, std::move(buses), std::move(lines));
}

// Triangle: fixed lines 1-2 and 1-3, a breaker on 2-3; both of its states keep
// the grid connected.
inline gridsig::grid::Network triangle3() {
    using namespace gridsig::grid;
    std::vector<Bus> buses = {
        {1, 0.0, 0.0, true}, {2, 10.0, 5.0, false}, {3, 10.0, 5.0, false}};
    std::vector<Line> lines = {
        {1, 2, 1.0, 0.0, -1, ""},
        {1, 3, 1.0, 0.0, -1, ""},
        {2, 3, 1.0, 0.0, 0, "S1"},
    };
    return Network(1.0, 1.0, std::move(buses), std::move(lines));
}

}  // namespace testutil
