#pragma once

// JSON coefficient dumps. Entries are sorted lexicographically in k (then by
// component) so that dumps diff cleanly.

#include <string>

#include "json.hpp"
#include "kamtori/fipoly.hpp"
#include "kamtori/trigpoly.hpp"

namespace kamtori {

using json = nlohmann::json;

json to_json(const TrigPoly& f);
json to_json(const TrigVec& f);
json to_json(const TrigMat& f);
json to_json(const FIPoly& P);

TrigPoly trigpoly_from_json(const json& j);
TrigVec trigvec_from_json(const json& j);
TrigMat trigmat_from_json(const json& j);
FIPoly fipoly_from_json(const json& j);

/// Shortest text that reads back to the same double.
std::string format_double(double x);

}  // namespace kamtori
