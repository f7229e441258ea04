#include "hkcg/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hkcg/error.hpp"

namespace hkcg {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TorusGrid::TorusGrid(int d, int points_per_axis) : d_(d), p_(points_per_axis) {
  require(d >= 1 && d <= 3, "torus dimension must be in [1, 3] (got " + std::to_string(d) + ")");
  require(points_per_axis >= 4, "grid must have at least 4 points per axis (got " +
                                    std::to_string(points_per_axis) + ")");
  require((points_per_axis & (points_per_axis - 1)) == 0,
          "grid points per axis must be a power of two (got " + std::to_string(points_per_axis) + ")");
  size_ = 1;
  for (int i = 0; i < d; ++i) size_ *= p_;
  int s = 1;
  for (int axis = d - 1; axis >= 0; --axis) {
    strides_[axis] = s;
    s *= p_;
  }
}

double TorusGrid::spacing() const { return kTwoPi / p_; }

double TorusGrid::volume() const { return std::pow(kTwoPi, d_); }

std::array<int, 3> TorusGrid::multi_index(int linear) const {
  std::array<int, 3> idx{};
  for (int axis = 0; axis < d_; ++axis) idx[axis] = (linear / strides_[axis]) % p_;
  return idx;
}

int TorusGrid::linear_index(const std::array<int, 3>& idx) const {
  int linear = 0;
  for (int axis = 0; axis < d_; ++axis) linear += (((idx[axis] % p_) + p_) % p_) * strides_[axis];
  return linear;
}

double TorusGrid::coordinate(int linear, int axis) const {
  return spacing() * ((linear / strides_[axis]) % p_);
}

SpectralBasis::SpectralBasis(TorusGrid grid, int max_mode) : grid_(grid), max_mode_(max_mode) {
  require(max_mode >= 0, "spectral truncation M_max must be >= 0");
  require(grid.points_per_axis() > 2 * max_mode,
          "aliasing: grid points per axis P = " + std::to_string(grid.points_per_axis()) +
              " must exceed 2*M_max = " + std::to_string(2 * max_mode));
  const int d = grid.dim();

  // Representatives of +-m pairs: first nonzero component positive.
  std::vector<std::array<int, 3>> reps;
  std::array<int, 3> m{};
  const int side = 2 * max_mode + 1;
  int total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  for (int code = 0; code < total; ++code) {
    int rest = code;
    for (int axis = d - 1; axis >= 0; --axis) {
      m[axis] = rest % side - max_mode;
      rest /= side;
    }
    int first = 0;
    for (int axis = 0; axis < d; ++axis) {
      if (m[axis] != 0) {
        first = m[axis];
        break;
      }
    }
    if (first >= 0) reps.push_back(m);
  }
  auto norm2 = [](const std::array<int, 3>& v) { return v[0] * v[0] + v[1] * v[1] + v[2] * v[2]; };
  std::sort(reps.begin(), reps.end(), [&](const auto& a, const auto& b) {
    const int na = norm2(a), nb = norm2(b);
    return na != nb ? na < nb : a < b;
  });

  for (const auto& wv : reps) {
    const double lambda = norm2(wv);
    if (lambda == 0.0) {
      modes_.push_back({wv, Mode::Kind::constant, 0.0});
    } else {
      modes_.push_back({wv, Mode::Kind::cosine, lambda});
      modes_.push_back({wv, Mode::Kind::sine, lambda});
    }
  }

  const double vol = grid.volume();
  const double c0 = 1.0 / std::sqrt(vol);
  const double c1 = std::sqrt(2.0 / vol);
  values_.resize(grid.size(), size());
  for (int p = 0; p < grid.size(); ++p) {
    for (int j = 0; j < size(); ++j) {
      const Mode& md = modes_[j];
      double phase = 0.0;
      for (int axis = 0; axis < d; ++axis) phase += md.wavevector[axis] * grid.coordinate(p, axis);
      switch (md.kind) {
        case Mode::Kind::constant: values_(p, j) = c0; break;
        case Mode::Kind::cosine: values_(p, j) = c1 * std::cos(phase); break;
        case Mode::Kind::sine: values_(p, j) = c1 * std::sin(phase); break;
      }
    }
  }
}

Eigen::VectorXd SpectralBasis::project(std::span<const double> f) const {
  require(static_cast<int>(f.size()) == grid_.size(), "project: grid function size mismatch");
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), grid_.size());
  return values_.transpose() * fv * (grid_.volume() / grid_.size());
}

SpectralBasis build_spectrum(int d, int points_per_axis, int max_mode) {
  return SpectralBasis(TorusGrid(d, points_per_axis), max_mode);
}

double quadrature(const TorusGrid& grid, std::span<const double> f) {
  require(static_cast<int>(f.size()) == grid.size(), "quadrature: grid function size mismatch");
  double sum = 0.0;
  for (double v : f) sum += v;
  return sum / grid.size() * grid.volume();
}

AlgebraField::AlgebraField(TorusGrid grid, int width)
    : grid_(grid), width_(width), data_(static_cast<std::size_t>(grid.size()) * width, 0.0) {
  require(width >= 1, "field width must be >= 1");
}

SpectralDerivative::SpectralDerivative(const TorusGrid& grid) : grid_(grid) {
  const int p = grid.points_per_axis();
  const double h = grid.spacing();
  matrix_ = Eigen::MatrixXd::Zero(p, p);
  for (int k = 0; k < p; ++k) {
    for (int l = 0; l < p; ++l) {
      if (k == l) continue;
      const int diff = k - l;
      const double sign = (diff % 2 == 0) ? 1.0 : -1.0;
      matrix_(k, l) = 0.5 * sign / std::tan(0.5 * diff * h);
    }
  }
}

void SpectralDerivative::apply(const AlgebraField& f, int axis, AlgebraField& out) const {
  require(f.grid() == grid_ && out.congruent(f), "spectral derivative: grid/shape mismatch");
  require(axis >= 0 && axis < grid_.dim(), "spectral derivative: axis out of range");
  const int p = grid_.points_per_axis();
  const int stride = grid_.stride(axis);
  const int width = f.width();
  for (int pt = 0; pt < grid_.size(); ++pt) {
    const int k = (pt / stride) % p;
    const int base = pt - k * stride;
    auto dst = out.at(pt);
    const auto centre = f.at(pt);
    for (int c = 0; c < width; ++c) dst[c] = 0.0;
    // Rows of the matrix sum to zero; differencing against the centre value
    // makes constants map to exactly zero.
    for (int l = 0; l < p; ++l) {
      const double w = matrix_(k, l);
      if (w == 0.0) continue;
      const auto src = f.at(base + l * stride);
      for (int c = 0; c < width; ++c) dst[c] += w * (src[c] - centre[c]);
    }
  }
}

OneFormField exterior_derivative(const AlgebraField& eta) {
  const SpectralDerivative deriv(eta.grid());
  OneFormField omega;
  omega.components.reserve(static_cast<std::size_t>(eta.grid().dim()));
  for (int axis = 0; axis < eta.grid().dim(); ++axis) {
    omega.components.emplace_back(eta.grid(), eta.width());
    deriv.apply(eta, axis, omega.components.back());
  }
  return omega;
}

}  // namespace hkcg
