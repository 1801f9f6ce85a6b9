#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace curvopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = std::int64_t;

}  // namespace curvopt
