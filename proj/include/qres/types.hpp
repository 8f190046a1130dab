#pragma once

#include <Eigen/Dense>

namespace qres {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace qres
