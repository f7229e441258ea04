#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hkcg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RowMajorCMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Element of su(n) as coefficients in the orthonormal basis {T_a}.
struct AlgebraElement {
  Eigen::VectorXd coeffs;
};

// Element of SU(n) in the fundamental representation.
struct GroupElement {
  CMatrix mat;
};

// Orthonormal basis of su(n) built from generalized Gell-Mann matrices,
// T_a = -(i/2) lambda_a, so that <T_a, T_b> := -2 tr(T_a T_b) = delta_ab.
//
// Ordering: symmetric off-diagonal (j < k), antisymmetric off-diagonal
// (j < k), then diagonal.  For n = 2 this is T_a = sigma_a / (2i) with
// [T_1, T_2] = T_3.
class LieBasis {
 public:
  explicit LieBasis(int n);

  int n() const { return n_; }
  int dim() const { return dim_; }
  const CMatrix& generator(int a) const { return generators_[a]; }

  // f_abc with [T_a, T_b] = sum_c f_abc T_c.
  double structure_constant(int a, int b, int c) const {
    return f_[(static_cast<std::size_t>(a) * dim_ + b) * dim_ + c];
  }
  // K_ab = tr(ad_{T_a} ad_{T_b}).
  const Eigen::MatrixXd& killing_matrix() const { return killing_; }
  // sum_a T_a T_a (Casimir of the fundamental representation).
  const CMatrix& casimir() const { return casimir_; }

  CMatrix to_matrix(std::span<const double> coeffs) const;
  // Coefficients of the projection of X onto span{T_a}: <T_a, X>.
  Eigen::VectorXd from_matrix(const CMatrix& x) const;
  // Matrix of ad_X in the basis: (ad_X)_{cb} = sum_a x_a f_abc.
  Eigen::MatrixXd ad(std::span<const double> coeffs) const;

  // Kernels on raw coefficient spans; `out` must not alias the inputs.
  void bracket_into(std::span<const double> x, std::span<const double> y,
                    std::span<double> out) const;
  double killing(std::span<const double> x, std::span<const double> y) const;
  // exp of the algebra element written to `out` as a row-major n x n block.
  void exp_into(std::span<const double> x, std::span<Complex> out) const;
  // Principal logarithm of a row-major n x n group element.  Returns false
  // (and leaves `out` untouched) when ||g - I||_F >= 1.
  bool log_into(std::span<const Complex> g, std::span<double> out) const;

 private:
  int n_;
  int dim_;
  std::vector<CMatrix> generators_;
  std::vector<double> f_;
  std::vector<int> f_nonzero_;  // flat (a,b,c) indices with f_abc != 0
  Eigen::MatrixXd killing_;
  CMatrix casimir_;
};

LieBasis build_basis(int n);

AlgebraElement bracket(const LieBasis& basis, const AlgebraElement& x, const AlgebraElement& y);
double killing_form(const LieBasis& basis, const AlgebraElement& x, const AlgebraElement& y);
GroupElement exp_map(const LieBasis& basis, const AlgebraElement& x);

// ||g^dagger g - I||_F for a row-major n x n block.
double unitarity_defect(std::span<const Complex> g, int n);
// |det g - 1| for a row-major n x n block.
double determinant_defect(std::span<const Complex> g, int n);

}  // namespace hkcg
