#pragma once

#include <Eigen/Core>

#include <memory>

#include "varmeta/model/fields.hpp"
#include "varmeta/model/grid.hpp"

namespace varmeta {

struct CovarianceSettings {
  /// Pointwise h standard deviation as a fraction of |h_reference|.
  double h_std_fraction = 0.05;
  /// When > 0, overrides the relative rule with a constant h standard deviation.
  double h_std_absolute = 0.0;
  /// Lower bound on the pointwise h standard deviation (relative rule only).
  double h_std_floor = 1e-6;
  /// Gaussian correlation length in grid units; 0 gives an uncorrelated h block.
  double correlation_length = 5.0;
  /// Standard deviation of the white-noise hu and hv blocks.
  double uv_std = 0.05;
  /// Added to the correlation diagonal before factorization.
  double nugget = 1e-6;

  void validate() const;
};

/// Block-diagonal background error covariance B0.
///
/// h block: D (C + nugget I) D with D = diag(sigma_h) and C the periodized
/// Gaussian correlation exp(-d^2 / (2 L^2)) summed over periodic images and
/// normalized to a unit diagonal. hu, hv blocks: uv_std^2 I.
///
/// B0 = U U^T with U = blockdiag(D L_c, uv_std I, uv_std I) where L_c is the
/// Cholesky factor of the correlation block. Immutable; copies share storage.
class BackgroundCovariance {
 public:
  /// Throws FactorizationFailed if the correlation block is not SPD.
  static BackgroundCovariance build(const Grid& grid, const StateVector& reference,
                                    const CovarianceSettings& settings);

  int q() const;
  const Eigen::VectorXd& h_std() const;
  double uv_std() const;
  /// Dense h block D (C + nugget I) D.
  Eigen::MatrixXd h_block() const;
  /// Correlation block C + nugget I.
  const Eigen::MatrixXd& correlation() const;

  /// False when some standard deviation is zero.
  bool invertible() const;

  Perturbation apply_b(const Perturbation& v) const;
  /// B0^{-1} v via the cached factor; throws FactorizationFailed if not invertible.
  Perturbation apply_binv(const Perturbation& v) const;

  /// U xi (xi standard normal gives a draw with covariance B0).
  Perturbation apply_sqrt(const Eigen::VectorXd& xi) const;
  /// U^T v.
  Eigen::VectorXd apply_sqrt_transpose(const Perturbation& v) const;
  /// U^{-1} v.
  Eigen::VectorXd apply_sqrt_inverse(const Perturbation& v) const;
  /// U^{-T} w.
  Perturbation apply_sqrt_inverse_transpose(const Eigen::VectorXd& w) const;

 private:
  struct Impl;
  explicit BackgroundCovariance(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Periodized Gaussian correlation between cells a and b (grid units).
double periodic_gaussian_correlation(const Grid& grid, int a, int b, double length);

}  // namespace varmeta
