#pragma once

#include <memory>
#include <span>
#include <vector>

#include "hkcg/exec.hpp"
#include "hkcg/lie.hpp"
#include "hkcg/rng.hpp"
#include "hkcg/torus.hpp"

namespace hkcg {

// Covariance of the H-valued Brownian motion, ||h||_H^2 = int <(Delta^k + 1) h, h> dS.
// Diagonal in the eigenbasis with weights w_m = (lambda_m^k + 1)^{-1};
// Lie-algebra directions are independent.
class CovarianceSpec {
 public:
  CovarianceSpec(int sobolev_k, std::shared_ptr<const SpectralBasis> basis,
                 std::shared_ptr<const LieBasis> lie);
  // Allows k = 0 (white noise) for diagnostics.
  static CovarianceSpec white_noise_control(std::shared_ptr<const SpectralBasis> basis,
                                            std::shared_ptr<const LieBasis> lie);

  int sobolev_k() const { return k_; }
  const SpectralBasis& basis() const { return *basis_; }
  const LieBasis& lie() const { return *lie_; }
  const TorusGrid& grid() const { return basis_->grid(); }
  std::shared_ptr<const SpectralBasis> basis_ptr() const { return basis_; }
  std::shared_ptr<const LieBasis> lie_ptr() const { return lie_; }
  const std::vector<double>& weights() const { return weights_; }

  // Number of standard normals consumed per increment.
  int draws_per_increment() const { return basis_->size() * lie_->dim(); }

 private:
  CovarianceSpec(int k, std::shared_ptr<const SpectralBasis> basis,
                 std::shared_ptr<const LieBasis> lie, bool);

  int k_;
  std::shared_ptr<const SpectralBasis> basis_;
  std::shared_ptr<const LieBasis> lie_;
  std::vector<double> weights_;
};

// Draws the Karhunen-Loeve coefficients sqrt(dt w_m) xi_{m,a}, mode-major.
std::vector<double> draw_coefficients(const CovarianceSpec& spec, double dt, RngStream& stream);

// Evaluates sum_m coeff[m, a] e_m(S) at every grid point.
void synthesize(const CovarianceSpec& spec, std::span<const double> coeffs, AlgebraField& out,
                Exec exec = Exec::serial);

// Brownian increment over a step of length dt, as a field on the grid.
AlgebraField sample_increment(const CovarianceSpec& spec, double dt, RngStream& stream,
                              Exec exec = Exec::serial);

// Same draws as sample_increment, evaluated at a subset of grid points only.
// Entry j of the result belongs to points[j]; values agree bitwise with the
// full field.
std::vector<double> sample_increment_at(const CovarianceSpec& spec, double dt, RngStream& stream,
                                        std::span<const int> points);

// C_k(S, S') = sum_m w_m e_m(S) e_m(S'), per-direction covariance of B_1.
double covariance_kernel(const CovarianceSpec& spec, int point, int other_point);

// c = C_k(S, S), independent of S on the torus.
double pointwise_variance(const CovarianceSpec& spec);

}  // namespace hkcg
