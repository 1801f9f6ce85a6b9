#pragma once

#include <string>
#include <utility>

#include "curvopt/rng.hpp"
#include "curvopt/types.hpp"

namespace curvopt {

//   zeros        all zero
//   normal       every entry N(0,1)
//   normalized   an N(0,1) draw divided by its norm (a point on the unit sphere)
//   scaled       an N(0,1) draw times a gain c ("scaled:c")
enum class InitScheme { zeros, normal, normalized, scaled };

Vector draw_init(Index dim, InitScheme scheme, double c, Rng& rng);

// Parses "zeros" | "normal" | "normalized" | "scaled:C"; throws on anything else.
std::pair<InitScheme, double> parse_init_scheme(const std::string& text);
const char* to_string(InitScheme s);

}  // namespace curvopt
