#include "g2flow/linalg.hpp"

#include <Eigen/Dense>

namespace g2 {

std::vector<double> symmetric_eigenvalues(const Matrix<double>& a) {
  const int n = a.rows();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace g2
