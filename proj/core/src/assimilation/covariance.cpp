#include "varmeta/assimilation/covariance.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "varmeta/errors.hpp"

namespace varmeta {

void CovarianceSettings::validate() const {
  if (h_std_fraction < 0.0 || h_std_absolute < 0.0 || h_std_floor < 0.0 || uv_std < 0.0)
    throw std::invalid_argument("covariance: standard deviations must be >= 0");
  if (correlation_length < 0.0) throw std::invalid_argument("covariance: length must be >= 0");
  if (nugget < 0.0) throw std::invalid_argument("covariance: nugget must be >= 0");
}

namespace {

// 1D periodized Gaussian kernel in grid units, normalized so k(0) = 1.
std::vector<double> periodic_kernel_1d(int q, double length) {
  std::vector<double> k(static_cast<std::size_t>(q), 0.0);
  if (length == 0.0) {
    k[0] = 1.0;
    return k;
  }
  const int images = 2 + static_cast<int>(std::ceil(8.0 * length / q));
  for (int d = 0; d < q; ++d) {
    double s = 0.0;
    for (int m = -images; m <= images; ++m) {
      const double r = d + static_cast<double>(m) * q;
      s += std::exp(-r * r / (2.0 * length * length));
    }
    k[d] = s;
  }
  const double k0 = k[0];
  for (double& v : k) v /= k0;
  return k;
}

}  // namespace

double periodic_gaussian_correlation(const Grid& grid, int a, int b, double length) {
  const std::vector<double> k = periodic_kernel_1d(grid.q, length);
  const int di = grid.wrap(a / grid.q - b / grid.q);
  const int dj = grid.wrap(a % grid.q - b % grid.q);
  return k[di] * k[dj];
}

struct BackgroundCovariance::Impl {
  int q = 0;
  Eigen::VectorXd h_std;
  double uv_std = 0.0;
  Eigen::MatrixXd correlation;
  Eigen::LLT<Eigen::MatrixXd> factor;
  bool invertible = false;
};

BackgroundCovariance BackgroundCovariance::build(const Grid& grid, const StateVector& reference,
                                                 const CovarianceSettings& settings) {
  settings.validate();
  if (reference.q() != grid.q) throw std::invalid_argument("covariance: reference/grid mismatch");
  auto impl = std::make_shared<Impl>();
  const int q = grid.q;
  const int nc = q * q;
  impl->q = q;
  impl->uv_std = settings.uv_std;

  impl->h_std.resize(nc);
  const auto h = reference.h();
  for (int c = 0; c < nc; ++c) {
    if (settings.h_std_absolute > 0.0) {
      impl->h_std[c] = settings.h_std_absolute;
    } else {
      const double s = settings.h_std_fraction * std::abs(h[c]);
      impl->h_std[c] = settings.h_std_fraction > 0.0 ? std::max(s, settings.h_std_floor) : 0.0;
    }
  }

  const std::vector<double> k = periodic_kernel_1d(q, settings.correlation_length);
  impl->correlation.resize(nc, nc);
  for (int a = 0; a < nc; ++a) {
    const int ia = a / q;
    const int ja = a % q;
    for (int b = 0; b < nc; ++b) {
      const int di = grid.wrap(ia - b / q);
      const int dj = grid.wrap(ja - b % q);
      impl->correlation(a, b) = k[di] * k[dj];
    }
  }
  impl->correlation.diagonal().array() += settings.nugget;

  impl->factor.compute(impl->correlation);
  if (impl->factor.info() != Eigen::Success)
    throw FactorizationFailed("background covariance: correlation block is not SPD");
  impl->invertible = (impl->h_std.array() > 0.0).all() && impl->uv_std > 0.0;
  return BackgroundCovariance(std::move(impl));
}

int BackgroundCovariance::q() const { return impl_->q; }
const Eigen::VectorXd& BackgroundCovariance::h_std() const { return impl_->h_std; }
double BackgroundCovariance::uv_std() const { return impl_->uv_std; }
const Eigen::MatrixXd& BackgroundCovariance::correlation() const { return impl_->correlation; }
bool BackgroundCovariance::invertible() const { return impl_->invertible; }

Eigen::MatrixXd BackgroundCovariance::h_block() const {
  const Eigen::VectorXd& s = impl_->h_std;
  return s.asDiagonal() * impl_->correlation * s.asDiagonal();
}

Perturbation BackgroundCovariance::apply_b(const Perturbation& v) const {
  const Impl& m = *impl_;
  Perturbation out(m.q);
  out.h() = m.h_std.cwiseProduct(m.correlation * m.h_std.cwiseProduct(v.h()));
  const double var = m.uv_std * m.uv_std;
  out.hu() = var * v.hu();
  out.hv() = var * v.hv();
  return out;
}

Perturbation BackgroundCovariance::apply_binv(const Perturbation& v) const {
  const Impl& m = *impl_;
  if (!m.invertible) throw FactorizationFailed("background covariance is singular");
  Perturbation out(m.q);
  const Eigen::VectorXd scaled = v.h().cwiseQuotient(m.h_std);
  out.h() = m.factor.solve(scaled).cwiseQuotient(m.h_std);
  const double var = m.uv_std * m.uv_std;
  out.hu() = v.hu() / var;
  out.hv() = v.hv() / var;
  return out;
}

Perturbation BackgroundCovariance::apply_sqrt(const Eigen::VectorXd& xi) const {
  const Impl& m = *impl_;
  const int nc = m.q * m.q;
  Perturbation out(m.q);
  out.h() = m.h_std.cwiseProduct(m.factor.matrixL() * xi.head(nc));
  out.hu() = m.uv_std * xi.segment(nc, nc);
  out.hv() = m.uv_std * xi.tail(nc);
  return out;
}

Eigen::VectorXd BackgroundCovariance::apply_sqrt_transpose(const Perturbation& v) const {
  const Impl& m = *impl_;
  const int nc = m.q * m.q;
  Eigen::VectorXd out(3 * nc);
  out.head(nc) = m.factor.matrixU() * m.h_std.cwiseProduct(v.h());
  out.segment(nc, nc) = m.uv_std * v.hu();
  out.tail(nc) = m.uv_std * v.hv();
  return out;
}

Eigen::VectorXd BackgroundCovariance::apply_sqrt_inverse(const Perturbation& v) const {
  const Impl& m = *impl_;
  if (!m.invertible) throw FactorizationFailed("background covariance is singular");
  const int nc = m.q * m.q;
  Eigen::VectorXd out(3 * nc);
  out.head(nc) = m.factor.matrixL().solve(v.h().cwiseQuotient(m.h_std));
  out.segment(nc, nc) = v.hu() / m.uv_std;
  out.tail(nc) = v.hv() / m.uv_std;
  return out;
}

Perturbation BackgroundCovariance::apply_sqrt_inverse_transpose(const Eigen::VectorXd& w) const {
  const Impl& m = *impl_;
  if (!m.invertible) throw FactorizationFailed("background covariance is singular");
  const int nc = m.q * m.q;
  Perturbation out(m.q);
  out.h() = m.factor.matrixU().solve(w.head(nc)).cwiseQuotient(
      m.h_std);
  out.hu() = w.segment(nc, nc) / m.uv_std;
  out.hv() = w.tail(nc) / m.uv_std;
  return out;
}

}  // namespace varmeta
