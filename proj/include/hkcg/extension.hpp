#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hkcg/lie.hpp"
#include "hkcg/rng.hpp"
#include "hkcg/sampler.hpp"
#include "hkcg/torus.hpp"

namespace hkcg {

// Class in H^1(T^d; V) through its harmonic (constant) representative:
// coords[i * width + a] is the coefficient of dx^i (x) v_a.  width is
// dim Lie G for algebra-valued classes and 1 for the real-valued classes
// produced by the Killing cocycle.
struct CohomologyVector {
  int axes = 0;
  int width = 0;
  std::vector<double> coords;

  double operator()(int axis, int component) const {
    return coords[static_cast<std::size_t>(axis) * width + component];
  }
};

// Full-rank lattice L in R^N, generators stored as columns.
class LatticeSpec {
 public:
  explicit LatticeSpec(Eigen::MatrixXd generators);
  static LatticeSpec identity(int dimension);
  // Row-major N x N input as read from configuration.
  static LatticeSpec from_row_major(int dimension, std::span<const double> values);

  int dimension() const { return static_cast<int>(generators_.rows()); }
  const Eigen::MatrixXd& generators() const { return generators_; }

  Eigen::VectorXd lattice_coordinates(std::span<const double> v) const;
  Eigen::VectorXd ambient(std::span<const double> lattice_coords) const;

 private:
  Eigen::MatrixXd generators_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

// Element of Z = H^1 / L in lattice coordinates, each in [0, 1).
struct CentralTorusElement {
  std::vector<double> coords;
};

struct ExtendedElement {
  FieldState field;
  CentralTorusElement central;
};

// Element (eta, z) of the centrally extended current algebra.
struct ExtendedAlgebraElement {
  AlgebraField field;
  std::vector<double> central;
};

// N = d * dim Lie G.
inline int central_dimension(int d, int n) { return d * (n * n - 1); }

// Pointwise [eta, eta1].
AlgebraField pointwise_bracket(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1);
// Pointwise kappa(eta, eta1) as a scalar field (width 1).
AlgebraField pointwise_killing(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1);

// max |d kappa(eta, eta1) - kappa(d eta, eta1) - kappa(eta, d eta1)| over
// axes and grid points.
double leibniz_check(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1);

// Harmonic part of a 1-form: grid average of each component.
CohomologyVector harmonic_projection(const OneFormField& omega);

// Class of the 1-form kappa(eta, d eta1) in H^1(T^d; R).
CohomologyVector cocycle(const LieBasis& lie, const AlgebraField& eta, const AlgebraField& eta1);

CentralTorusElement reduce_mod_lattice(std::span<const double> v, const LatticeSpec& lattice);

// Haar (uniform) measure on Z.
CentralTorusElement haar_sample(const LatticeSpec& lattice, RngStream& stream);

// Product measure mu (x) Haar(Z).  The field is drawn from lane 0 of
// `stream` and the central part from lane 1, so the field matches
// sample_field(cfg, stream) exactly.
ExtendedElement sample_extension(const SdeConfig& cfg, const LatticeSpec& lattice, const RngStream& stream);
ExtendedElement sample_extension(const SdeConfig& cfg, const LatticeSpec& lattice);

// ([eta, eta1] pointwise, cocycle(eta, eta1)); central inputs are ignored.
std::pair<AlgebraField, CohomologyVector> extended_bracket(const LieBasis& lie,
                                                           const ExtendedAlgebraElement& x,
                                                           const ExtendedAlgebraElement& y);

// N(0, dt sigma^2) increments for the Brownian motion on Z.
std::vector<double> draw_central_increment(int dimension, double dt, double sigma, RngStream& stream);

// Field part stepped by g <- g exp(dB); central part translated by
// central_incr (ambient H^1 coordinates) and reduced mod L.
ExtendedElement extended_sde_step(const ExtendedElement& state, const AlgebraField& incr,
                                  std::span<const double> central_incr, double dt,
                                  const LatticeSpec& lattice, const LieBasis& lie);

// Random trigonometric polynomial of degree <= max_mode on the grid with
// standard normal coefficients in every width component.
AlgebraField random_band_limited_field(const TorusGrid& grid, int width, int max_mode, RngStream& stream);

}  // namespace hkcg
