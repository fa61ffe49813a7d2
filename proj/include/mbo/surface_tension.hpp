#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mbo {

class InadmissibleTensions : public std::invalid_argument {
 public:
  explicit InadmissibleTensions(const std::string& what) : std::invalid_argument(what) {}
};

/// Grain-boundary surface tensions sigma (P x P) with the solid-vapor tension
/// normalized to 1, plus the (P+1) x (P+1) extension whose row and column 0
/// are (0, 1, ..., 1).
///
/// Construction validates, for the grain matrix and again for the extension:
///   sigma_ii = 0, sigma_ij = sigma_ji > 0,
///   sigma_ij < sigma_ik + sigma_kj for pairwise distinct i, j, k,
///   sigma_ij < 2 (grain matrix only; it is the normalized sigma_0 > max/2),
///   sigma <= -sigma_lower < 0 as a bilinear form on (1, ..., 1)^perp.
class SurfaceTensionMatrix {
 public:
  explicit SurfaceTensionMatrix(Eigen::MatrixXd sigma);

  /// All grain pairs share the same tension.
  static SurfaceTensionMatrix uniform(int grains, double value = 1.0);

  int grains() const { return static_cast<int>(sigma_.rows()); }

  /// Extended entry for labels i, j in 0..P (label 0 is vapor).
  double operator()(int i, int j) const { return extended_(i, j); }

  const Eigen::MatrixXd& grain_matrix() const { return sigma_; }
  const Eigen::MatrixXd& extended_matrix() const { return extended_; }

  /// sigma_lower of the grain matrix; +infinity when P = 1 (empty subspace).
  double lower_bound() const { return lower_; }
  double extended_lower_bound() const { return extended_lower_; }

  /// Largest eigenvalue of the restriction of `m` to (1, ..., 1)^perp.
  static double max_eigenvalue_on_mean_zero(const Eigen::MatrixXd& m);

 private:
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd extended_;
  double lower_;
  double extended_lower_;
};

}  // namespace mbo
