#ifndef UAD_CORE_LINALG_HPP
#define UAD_CORE_LINALG_HPP

#include <Eigen/Dense>

namespace uad {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

}  // namespace uad

#endif  // UAD_CORE_LINALG_HPP
