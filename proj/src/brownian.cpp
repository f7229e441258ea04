#include "hkcg/brownian.hpp"

#include <cmath>
#include <string>

#include "hkcg/error.hpp"

namespace hkcg {

CovarianceSpec::CovarianceSpec(int sobolev_k, std::shared_ptr<const SpectralBasis> basis,
                               std::shared_ptr<const LieBasis> lie)
    : CovarianceSpec(sobolev_k, std::move(basis), std::move(lie), true) {
  require(sobolev_k >= 1, "Sobolev order k must be >= 1 (got " + std::to_string(sobolev_k) + ")");
}

CovarianceSpec CovarianceSpec::white_noise_control(std::shared_ptr<const SpectralBasis> basis,
                                                   std::shared_ptr<const LieBasis> lie) {
  return CovarianceSpec(0, std::move(basis), std::move(lie), true);
}

CovarianceSpec::CovarianceSpec(int k, std::shared_ptr<const SpectralBasis> basis,
                               std::shared_ptr<const LieBasis> lie, bool)
    : k_(k), basis_(std::move(basis)), lie_(std::move(lie)) {
  require(basis_ != nullptr && lie_ != nullptr, "covariance spec needs a spectral and a Lie basis");
  require(k_ >= 0, "Sobolev order must be non-negative");
  weights_.reserve(basis_->modes().size());
  for (const auto& mode : basis_->modes()) {
    // lambda^0 = 1 for every mode, including the constant one.
    const double lk = (k_ == 0) ? 1.0 : std::pow(mode.eigenvalue, k_);
    weights_.push_back(1.0 / (lk + 1.0));
  }
}

std::vector<double> draw_coefficients(const CovarianceSpec& spec, double dt, RngStream& stream) {
  require(dt > 0.0, "time step dt must be > 0");
  const int modes = spec.basis().size();
  const int dim = spec.lie().dim();
  std::vector<double> coeffs(static_cast<std::size_t>(modes) * dim);
  for (int m = 0; m < modes; ++m) {
    const double scale = std::sqrt(dt * spec.weights()[m]);
    for (int a = 0; a < dim; ++a) coeffs[static_cast<std::size_t>(m) * dim + a] = scale * stream.normal();
  }
  return coeffs;
}

namespace {

inline void synthesize_point(const Eigen::MatrixXd& values, int point, int modes, int dim,
                             const double* coeffs, double* out) {
  for (int a = 0; a < dim; ++a) out[a] = 0.0;
  for (int m = 0; m < modes; ++m) {
    const double e = values(point, m);
    const double* row = coeffs + static_cast<std::size_t>(m) * dim;
    for (int a = 0; a < dim; ++a) out[a] += e * row[a];
  }
}

}  // namespace

void synthesize(const CovarianceSpec& spec, std::span<const double> coeffs, AlgebraField& out,
                Exec exec) {
  const int modes = spec.basis().size();
  const int dim = spec.lie().dim();
  require(static_cast<int>(coeffs.size()) == modes * dim, "synthesize: coefficient count mismatch");
  require(out.grid() == spec.grid() && out.width() == dim, "synthesize: output shape mismatch");
  const Eigen::MatrixXd& values = spec.basis().values();
  const int points = out.points();
  double* dst = out.data().data();
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < points; ++p)
      synthesize_point(values, p, modes, dim, coeffs.data(), dst + static_cast<std::size_t>(p) * dim);
  } else {
    for (int p = 0; p < points; ++p)
      synthesize_point(values, p, modes, dim, coeffs.data(), dst + static_cast<std::size_t>(p) * dim);
  }
}

AlgebraField sample_increment(const CovarianceSpec& spec, double dt, RngStream& stream, Exec exec) {
  const std::vector<double> coeffs = draw_coefficients(spec, dt, stream);
  AlgebraField out(spec.grid(), spec.lie().dim());
  synthesize(spec, coeffs, out, exec);
  return out;
}

std::vector<double> sample_increment_at(const CovarianceSpec& spec, double dt, RngStream& stream,
                                        std::span<const int> points) {
  const std::vector<double> coeffs = draw_coefficients(spec, dt, stream);
  const int modes = spec.basis().size();
  const int dim = spec.lie().dim();
  std::vector<double> out(points.size() * static_cast<std::size_t>(dim));
  for (std::size_t j = 0; j < points.size(); ++j) {
    require(points[j] >= 0 && points[j] < spec.grid().size(), "sample_increment_at: point out of range");
    synthesize_point(spec.basis().values(), points[j], modes, dim, coeffs.data(), out.data() + j * dim);
  }
  return out;
}

double covariance_kernel(const CovarianceSpec& spec, int point, int other_point) {
  const int n = spec.grid().size();
  require(point >= 0 && point < n && other_point >= 0 && other_point < n,
          "covariance_kernel: grid point out of range");
  const Eigen::MatrixXd& values = spec.basis().values();
  double acc = 0.0;
  for (int m = 0; m < spec.basis().size(); ++m)
    acc += spec.weights()[m] * values(point, m) * values(other_point, m);
  return acc;
}

double pointwise_variance(const CovarianceSpec& spec) { return covariance_kernel(spec, 0, 0); }

}  // namespace hkcg
