#pragma once

#include <string>
#include <variant>

#include "qsm/common.hpp"
#include "qsm/state.hpp"

namespace qsm {

// JSON interchange format shared by the CLI and golden-value tests:
//   {"layout": [{"label": "A", "dim": 2}, ...],
//    "type": "pure" | "density",
//    "data": [[re, im], ...]}            // row-major complex entries
// Loaded objects are validated; the error message names the violated
// invariant.

std::string to_json(const PureState& psi);
std::string to_json(const DensityOperator& rho);

using LoadedState = std::variant<PureState, DensityOperator>;

LoadedState state_from_json(const std::string& text);
LoadedState load_state(const std::string& path);
void save_state(const LoadedState& s, const std::string& path);

// Raw matrix serialization used by SDP regression snapshots.
std::string matrix_to_json(const Mat& m);
Mat matrix_from_json(const std::string& text);

}  // namespace qsm
