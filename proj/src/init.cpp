#include "curvopt/init.hpp"

#include <cstdlib>
#include <stdexcept>

namespace curvopt {

Vector draw_init(Index dim, InitScheme scheme, double c, Rng& rng) {
  if (dim <= 0) throw std::invalid_argument("draw_init: dim must be > 0");
  if (scheme == InitScheme::zeros) return Vector::Zero(dim);
  Vector x(dim);
  rng.fill_gaussian(x);
  if (scheme == InitScheme::normalized) {
    double nrm = x.norm();
    if (nrm == 0.0) nrm = 1.0;  // unreachable in practice
    x /= nrm;
  } else if (scheme == InitScheme::scaled) {
    x *= c;
  }
  return x;
}

std::pair<InitScheme, double> parse_init_scheme(const std::string& text) {
  if (text == "zeros") return {InitScheme::zeros, 0.0};
  if (text == "normal") return {InitScheme::normal, 1.0};
  if (text == "normalized") return {InitScheme::normalized, 1.0};
  if (text.rfind("scaled:", 0) == 0) {
    const std::string tail = text.substr(7);
    char* end = nullptr;
    double c = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str() || *end != '\0' || !(c > 0.0))
      throw std::runtime_error("init: bad gain in '" + text + "' (want scaled:C, C > 0)");
    return {InitScheme::scaled, c};
  }
  throw std::runtime_error("init: unknown scheme '" + text +
                           "' (zeros|normal|normalized|scaled:C)");
}

const char* to_string(InitScheme s) {
  switch (s) {
    case InitScheme::zeros: return "zeros";
    case InitScheme::normal: return "normal";
    case InitScheme::normalized: return "normalized";
    case InitScheme::scaled: return "scaled";
  }
  return "?";
}

}  // namespace curvopt
