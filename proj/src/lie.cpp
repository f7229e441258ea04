#include "hkcg/lie.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "hkcg/error.hpp"

namespace hkcg {

namespace {

constexpr Complex kI{0.0, 1.0};

std::vector<CMatrix> gell_mann_generators(int n) {
  std::vector<CMatrix> out;
  out.reserve(static_cast<std::size_t>(n * n - 1));
  auto push_scaled = [&](CMatrix lambda) { out.push_back(-0.5 * kI * lambda); };
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix m = CMatrix::Zero(n, n);
      m(j, k) = 1.0;
      m(k, j) = 1.0;
      push_scaled(m);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      CMatrix m = CMatrix::Zero(n, n);
      m(j, k) = -kI;
      m(k, j) = kI;
      push_scaled(m);
    }
  }
  for (int l = 1; l < n; ++l) {
    CMatrix m = CMatrix::Zero(n, n);
    const double scale = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) m(j, j) = scale;
    m(l, l) = -scale * l;
    push_scaled(m);
  }
  return out;
}

// sin(x)/x with a series near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

LieBasis::LieBasis(int n) : n_(n), dim_(n * n - 1) {
  require(n >= 2, "group rank n must be >= 2 (got " + std::to_string(n) + ")");
  generators_ = gell_mann_generators(n);

  const std::size_t d = static_cast<std::size_t>(dim_);
  f_.assign(d * d * d, 0.0);
  for (int a = 0; a < dim_; ++a) {
    for (int b = 0; b < dim_; ++b) {
      const CMatrix comm = generators_[a] * generators_[b] - generators_[b] * generators_[a];
      for (int c = 0; c < dim_; ++c) {
        double v = -2.0 * (comm * generators_[c]).trace().real();
        if (std::abs(v) < 1e-14) v = 0.0;
        const std::size_t idx = (static_cast<std::size_t>(a) * d + b) * d + c;
        f_[idx] = v;
        if (v != 0.0) f_nonzero_.push_back(static_cast<int>(idx));
      }
    }
  }

  std::vector<Eigen::MatrixXd> ad_basis;
  ad_basis.reserve(d);
  for (int a = 0; a < dim_; ++a) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(dim_, a);
    ad_basis.push_back(ad(std::span<const double>(e.data(), d)));
  }
  killing_.resize(dim_, dim_);
  for (int a = 0; a < dim_; ++a)
    for (int b = 0; b < dim_; ++b) killing_(a, b) = (ad_basis[a] * ad_basis[b]).trace();

  casimir_ = CMatrix::Zero(n, n);
  for (const auto& t : generators_) casimir_ += t * t;
}

CMatrix LieBasis::to_matrix(std::span<const double> coeffs) const {
  CMatrix x = CMatrix::Zero(n_, n_);
  for (int a = 0; a < dim_; ++a) x += coeffs[a] * generators_[a];
  return x;
}

Eigen::VectorXd LieBasis::from_matrix(const CMatrix& x) const {
  Eigen::VectorXd out(dim_);
  for (int a = 0; a < dim_; ++a) out[a] = -2.0 * (generators_[a] * x).trace().real();
  return out;
}

Eigen::MatrixXd LieBasis::ad(std::span<const double> coeffs) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int a = 0; a < dim_; ++a) {
    if (coeffs[a] == 0.0) continue;
    for (int b = 0; b < dim_; ++b)
      for (int c = 0; c < dim_; ++c) m(c, b) += coeffs[a] * structure_constant(a, b, c);
  }
  return m;
}

void LieBasis::bracket_into(std::span<const double> x, std::span<const double> y,
                            std::span<double> out) const {
  const int d = dim_;
  for (int c = 0; c < d; ++c) out[c] = 0.0;
  for (int idx : f_nonzero_) {
    const int c = idx % d;
    const int b = (idx / d) % d;
    const int a = idx / (d * d);
    out[c] += x[a] * y[b] * f_[idx];
  }
}

double LieBasis::killing(std::span<const double> x, std::span<const double> y) const {
  double acc = 0.0;
  for (int a = 0; a < dim_; ++a) {
    double row = 0.0;
    for (int b = 0; b < dim_; ++b) row += killing_(a, b) * y[b];
    acc += x[a] * row;
  }
  return acc;
}

void LieBasis::exp_into(std::span<const double> x, std::span<Complex> out) const {
  if (n_ == 2) {
    // X = -(i/2) x.sigma ; exp(X) = cos(r/2) I - i sin(r/2) xhat.sigma
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double half = 0.5 * r;
    const double c = std::cos(half);
    const double s = 0.5 * sinc(half);  // sin(r/2) / r
    out[0] = Complex(c, -s * x[2]);
    out[1] = Complex(-s * x[1], -s * x[0]);
    out[2] = Complex(s * x[1], -s * x[0]);
    out[3] = Complex(c, s * x[2]);
    return;
  }
  // exp(X) = V diag(exp(-i h)) V^dagger with iX = V diag(h) V^dagger.
  const CMatrix h = kI * to_matrix(x);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  const CMatrix& v = eig.eigenvectors();
  Eigen::VectorXcd phases(n_);
  for (int j = 0; j < n_; ++j) phases[j] = std::exp(-kI * eig.eigenvalues()[j]);
  const CMatrix g = v * phases.asDiagonal() * v.adjoint();
  Eigen::Map<RowMajorCMatrix>(out.data(), n_, n_) = g;
}

bool LieBasis::log_into(std::span<const Complex> g, std::span<double> out) const {
  const Eigen::Map<const RowMajorCMatrix> gm(g.data(), n_, n_);
  if ((gm - CMatrix::Identity(n_, n_)).norm() >= 1.0) return false;
  if (n_ == 2) {
    // Anti-Hermitian part A = (g - g^dagger)/2 = 2 sin(theta) xhat.T
    const Complex a00 = 0.5 * (g[0] - std::conj(g[0]));
    const Complex a11 = 0.5 * (g[3] - std::conj(g[3]));
    const Complex a01 = 0.5 * (g[1] - std::conj(g[2]));
    const Complex a10 = 0.5 * (g[2] - std::conj(g[1]));
    // alpha_a = -Im tr(sigma_a A)
    const double alpha0 = -(a10 + a01).imag();
    const double alpha1 = -(kI * (a01 - a10)).imag();
    const double alpha2 = -(a00 - a11).imag();
    const double sin_theta = 0.5 * std::sqrt(alpha0 * alpha0 + alpha1 * alpha1 + alpha2 * alpha2);
    const double cos_theta = 0.5 * (g[0] + g[3]).real();
    const double theta = std::atan2(sin_theta, cos_theta);
    const double factor = 1.0 / sinc(theta);  // theta / sin(theta)
    out[0] = alpha0 * factor;
    out[1] = alpha1 * factor;
    out[2] = alpha2 * factor;
    return true;
  }
  const CMatrix l = CMatrix(gm).log();
  const Eigen::VectorXd c = from_matrix(l);
  for (int a = 0; a < dim_; ++a) out[a] = c[a];
  return true;
}

LieBasis build_basis(int n) { return LieBasis(n); }

namespace {
void check_dim(const LieBasis& basis, const AlgebraElement& x) {
  if (x.coeffs.size() != basis.dim())
    throw PreconditionError("algebra element has " + std::to_string(x.coeffs.size()) +
                            " coefficients, basis dimension is " + std::to_string(basis.dim()));
}
std::span<const double> view(const AlgebraElement& x) {
  return {x.coeffs.data(), static_cast<std::size_t>(x.coeffs.size())};
}
}  // namespace

AlgebraElement bracket(const LieBasis& basis, const AlgebraElement& x, const AlgebraElement& y) {
  check_dim(basis, x);
  check_dim(basis, y);
  AlgebraElement out{Eigen::VectorXd(basis.dim())};
  basis.bracket_into(view(x), view(y), {out.coeffs.data(), static_cast<std::size_t>(basis.dim())});
  return out;
}

double killing_form(const LieBasis& basis, const AlgebraElement& x, const AlgebraElement& y) {
  check_dim(basis, x);
  check_dim(basis, y);
  return (basis.ad(view(x)) * basis.ad(view(y))).trace();
}

GroupElement exp_map(const LieBasis& basis, const AlgebraElement& x) {
  check_dim(basis, x);
  if (!x.coeffs.allFinite()) throw PreconditionError("exp_map: non-finite algebra coefficients");
  const int n = basis.n();
  std::vector<Complex> buf(static_cast<std::size_t>(n * n));
  basis.exp_into(view(x), buf);
  return GroupElement{Eigen::Map<RowMajorCMatrix>(buf.data(), n, n)};
}

double unitarity_defect(std::span<const Complex> g, int n) {
  const Eigen::Map<const RowMajorCMatrix> gm(g.data(), n, n);
  return (gm.adjoint() * gm - CMatrix::Identity(n, n)).norm();
}

double determinant_defect(std::span<const Complex> g, int n) {
  if (n == 2) return std::abs(g[0] * g[3] - g[1] * g[2] - 1.0);
  const Eigen::Map<const RowMajorCMatrix> gm(g.data(), n, n);
  return std::abs(CMatrix(gm).determinant() - 1.0);
}

}  // namespace hkcg
