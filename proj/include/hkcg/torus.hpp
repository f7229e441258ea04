#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hkcg {

// Uniform grid on the flat torus (R / 2 pi Z)^d.  Points are linearized
// row-major with axis 0 slowest.
class TorusGrid {
 public:
  TorusGrid(int d, int points_per_axis);

  int dim() const { return d_; }
  int points_per_axis() const { return p_; }
  int size() const { return size_; }
  double spacing() const;
  double volume() const;

  std::array<int, 3> multi_index(int linear) const;
  int linear_index(const std::array<int, 3>& idx) const;
  double coordinate(int linear, int axis) const;
  // Distance between consecutive points along `axis` in the linear layout.
  int stride(int axis) const { return strides_[axis]; }

  bool operator==(const TorusGrid& other) const { return d_ == other.d_ && p_ == other.p_; }

 private:
  int d_;
  int p_;
  int size_;
  std::array<int, 3> strides_{};
};

// One Laplace-Beltrami eigenfunction of the real Fourier basis.
struct Mode {
  enum class Kind { constant, cosine, sine };
  std::array<int, 3> wavevector{};
  Kind kind = Kind::constant;
  double eigenvalue = 0.0;  // |m|^2, Delta = -sum d^2
};

// Real L2(dS)-orthonormal Fourier eigenbasis truncated at |m|_inf <= M_max,
// tabulated on a grid.  Modes are ordered by eigenvalue, then by wave vector;
// each +-m pair contributes a cosine mode followed by a sine mode.  The
// ordering fixes the draw order of Karhunen-Loeve coefficients.
class SpectralBasis {
 public:
  SpectralBasis(TorusGrid grid, int max_mode);

  const TorusGrid& grid() const { return grid_; }
  int max_mode() const { return max_mode_; }
  int size() const { return static_cast<int>(modes_.size()); }
  const Mode& mode(int j) const { return modes_[j]; }
  const std::vector<Mode>& modes() const { return modes_; }
  // values()(point, mode) = e_mode(point).
  const Eigen::MatrixXd& values() const { return values_; }

  // Fourier coefficients <f, e_m> of a scalar grid function by quadrature.
  Eigen::VectorXd project(std::span<const double> f) const;

 private:
  TorusGrid grid_;
  int max_mode_;
  std::vector<Mode> modes_;
  Eigen::MatrixXd values_;
};

SpectralBasis build_spectrum(int d, int points_per_axis, int max_mode);

// Trapezoid rule on the torus: mean * (2 pi)^d.
double quadrature(const TorusGrid& grid, std::span<const double> f);

// Grid function with `width` real components per point (width = dim Lie G
// for algebra-valued fields, 1 for scalars).  Layout [point][component].
class AlgebraField {
 public:
  AlgebraField(TorusGrid grid, int width);

  const TorusGrid& grid() const { return grid_; }
  int width() const { return width_; }
  int points() const { return grid_.size(); }

  std::span<double> at(int point) {
    return {data_.data() + static_cast<std::size_t>(point) * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const double> at(int point) const {
    return {data_.data() + static_cast<std::size_t>(point) * width_, static_cast<std::size_t>(width_)};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool congruent(const AlgebraField& other) const {
    return grid_ == other.grid_ && width_ == other.width_;
  }

 private:
  TorusGrid grid_;
  int width_;
  std::vector<double> data_;
};

// omega = sum_i omega_i dx^i with one AlgebraField per axis.
struct OneFormField {
  std::vector<AlgebraField> components;

  const TorusGrid& grid() const { return components.front().grid(); }
  int width() const { return components.front().width(); }
};

// Spectral first derivative along one axis, exact for trigonometric
// polynomials of degree < P/2 (Nyquist content is discarded).
class SpectralDerivative {
 public:
  explicit SpectralDerivative(const TorusGrid& grid);

  void apply(const AlgebraField& f, int axis, AlgebraField& out) const;

 private:
  TorusGrid grid_;
  Eigen::MatrixXd matrix_;  // P x P periodic differentiation matrix
};

OneFormField exterior_derivative(const AlgebraField& eta);

}  // namespace hkcg
