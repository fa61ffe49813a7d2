#include "mbo/surface_tension.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mbo {

namespace {

std::string pair_name(int i, int j) {
  std::ostringstream os;
  os << "sigma(" << i << "," << j << ")";
  return os.str();
}

// Label offset: grain matrices are reported with 1-based labels, the
// extended matrix with 0-based labels.
void check_basic(const Eigen::MatrixXd& m, int offset, const char* what) {
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v)) {
        throw InadmissibleTensions(std::string(what) + ": " + pair_name(i + offset, j + offset) +
                                   " is not finite");
      }
      if (i == j && v != 0.0) {
        throw InadmissibleTensions(std::string(what) + ": diagonal entries must vanish, " +
                                   pair_name(i + offset, j + offset) + " != 0");
      }
      if (i != j && !(v > 0.0)) {
        throw InadmissibleTensions(std::string(what) + ": off-diagonal tensions must be positive, " +
                                   pair_name(i + offset, j + offset) + " <= 0");
      }
      if (v != m(j, i)) {
        throw InadmissibleTensions(std::string(what) + ": matrix must be symmetric at " +
                                   pair_name(i + offset, j + offset));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (!(m(i, j) < m(i, k) + m(k, j))) {
          std::ostringstream os;
          os << what << ": strict triangle inequality violated, " << pair_name(i + offset, j + offset)
             << " = " << m(i, j) << " >= " << pair_name(i + offset, k + offset) << " + "
             << pair_name(k + offset, j + offset);
          throw InadmissibleTensions(os.str());
        }
      }
    }
  }
}

}  // namespace

double SurfaceTensionMatrix::max_eigenvalue_on_mean_zero(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n < 2) return -std::numeric_limits<double>::infinity();
  // Orthonormal basis of (1,...,1)^perp: the last n-1 columns of a
  // Householder reflection mapping e_0 onto the normalized ones vector.
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  v(0) -= 1.0;
  Eigen::MatrixXd reflect = Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose() / v.squaredNorm();
  Eigen::MatrixXd basis = reflect.rightCols(n - 1);
  Eigen::MatrixXd restricted = basis.transpose() * m * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (restricted + restricted.transpose()),
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

SurfaceTensionMatrix::SurfaceTensionMatrix(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
  const int p = static_cast<int>(sigma_.rows());
  if (p < 1 || sigma_.cols() != p) throw InadmissibleTensions("surface tensions: need a square P x P matrix, P >= 1");
  check_basic(sigma_, 1, "surface tensions");
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (!(sigma_(i, j) < 2.0)) {
        std::ostringstream os;
        os << "surface tensions: " << pair_name(i + 1, j + 1) << " = " << sigma_(i, j)
           << " violates sigma_ij < 2 (grain tensions are normalized by the solid-vapor tension,"
              " which must exceed half the largest grain tension)";
        throw InadmissibleTensions(os.str());
      }
    }
  }
  const double top = max_eigenvalue_on_mean_zero(sigma_);
  lower_ = (p == 1) ? std::numeric_limits<double>::infinity() : -top;
  if (!(lower_ > 0.0)) {
    std::ostringstream os;
    os << "surface tensions: sigma must be negative definite on (1,...,1)^perp; largest eigenvalue "
       << top << " >= 0";
    throw InadmissibleTensions(os.str());
  }

  extended_ = Eigen::MatrixXd::Zero(p + 1, p + 1);
  extended_.block(1, 1, p, p) = sigma_;
  for (int i = 1; i <= p; ++i) extended_(0, i) = extended_(i, 0) = 1.0;
  check_basic(extended_, 0, "extended surface tensions");
  extended_lower_ = -max_eigenvalue_on_mean_zero(extended_);
  if (!(extended_lower_ > 0.0)) {
    throw InadmissibleTensions("extended surface tensions: not negative definite on (1,...,1)^perp");
  }
}

SurfaceTensionMatrix SurfaceTensionMatrix::uniform(int grains, double value) {
  if (grains < 1) throw InadmissibleTensions("surface tensions: need at least one grain");
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(grains, grains, value);
  m.diagonal().setZero();
  return SurfaceTensionMatrix(std::move(m));
}

}  // namespace mbo
