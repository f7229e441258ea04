#include "hkcg/lie.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "hkcg/error.hpp"
#include "hkcg/rng.hpp"

namespace hkcg {
namespace {

const Complex kI{0.0, 1.0};

Eigen::VectorXd random_coeffs(int dim, RngStream& s, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (int a = 0; a < dim; ++a) v[a] = scale * s.normal();
  return v;
}

std::span<const double> span_of(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Scaling and squaring with a 30-term Taylor series; independent of the
// library's closed form and eigendecomposition paths.
CMatrix taylor_expm(const CMatrix& x) {
  int squarings = 0;
  double norm = x.norm();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const CMatrix a = x / std::pow(2.0, squarings);
  CMatrix term = CMatrix::Identity(x.rows(), x.cols());
  CMatrix sum = term;
  for (int j = 1; j < 30; ++j) {
    term = term * a / static_cast<double>(j);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// Coefficients of a matrix in the basis via the Gram inner product.
Eigen::VectorXd coeffs_of(const LieBasis& b, const CMatrix& m) {
  Eigen::VectorXd v(b.dim());
  for (int a = 0; a < b.dim(); ++a) v[a] = -2.0 * (b.generator(a) * m).trace().real();
  return v;
}

// tr(ad_X ad_Y) with ad built from matrix commutators.
double killing_oracle(const LieBasis& b, const CMatrix& x, const CMatrix& y) {
  Eigen::MatrixXd ax(b.dim(), b.dim()), ay(b.dim(), b.dim());
  for (int c = 0; c < b.dim(); ++c) {
    const CMatrix& t = b.generator(c);
    ax.col(c) = coeffs_of(b, x * t - t * x);
    ay.col(c) = coeffs_of(b, y * t - t * y);
  }
  return (ax * ay).trace();
}

CMatrix block(std::span<const Complex> data, int n) {
  CMatrix m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = data[static_cast<std::size_t>(r) * n + c];
  return m;
}

TEST(LieBasis, RejectsSmallN) {
  EXPECT_THROW(LieBasis(1), PreconditionError);
  EXPECT_THROW(LieBasis(0), PreconditionError);
}

TEST(LieBasis, Su2IsPauliOverTwoI) {
  const LieBasis b(2);
  ASSERT_EQ(b.dim(), 3);
  CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -kI, kI, 0;
  sz << 1, 0, 0, -1;
  const CMatrix pauli[3] = {sx, sy, sz};
  for (int a = 0; a < 3; ++a) EXPECT_LT((b.generator(a) - pauli[a] / (2.0 * kI)).norm(), 1e-15) << a;
}

class BasisByN : public ::testing::TestWithParam<int> {};

TEST_P(BasisByN, GramIsIdentityAndGeneratorsAreTracelessAntiHermitian) {
  const LieBasis b(GetParam());
  EXPECT_EQ(b.dim(), GetParam() * GetParam() - 1);
  Complex trace_sum = 0.0;
  for (int a = 0; a < b.dim(); ++a) {
    trace_sum += b.generator(a).trace();
    EXPECT_LT((b.generator(a) + b.generator(a).adjoint()).norm(), 1e-15);
    for (int c = 0; c < b.dim(); ++c) {
      const double gram = -2.0 * (b.generator(a) * b.generator(c)).trace().real();
      EXPECT_NEAR(gram, a == c ? 1.0 : 0.0, 1e-14);
    }
  }
  EXPECT_LT(std::abs(trace_sum), 1e-14);
}

TEST_P(BasisByN, CasimirIsScalar) {
  const int n = GetParam();
  const LieBasis b(n);
  CMatrix sum = CMatrix::Zero(n, n);
  for (int a = 0; a < b.dim(); ++a) sum += b.generator(a) * b.generator(a);
  const double expected = -(n * n - 1.0) / (2.0 * n);
  EXPECT_LT((sum - expected * CMatrix::Identity(n, n)).norm(), 1e-13);
  EXPECT_LT((b.casimir() - sum).norm(), 1e-13);
}

TEST_P(BasisByN, BracketMatchesMatrixCommutator) {
  const LieBasis b(GetParam());
  RngStream s(1, static_cast<std::uint64_t>(GetParam()));
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = random_coeffs(b.dim(), s), y = random_coeffs(b.dim(), s);
    const CMatrix xm = b.to_matrix(span_of(x)), ym = b.to_matrix(span_of(y));
    const AlgebraElement z = bracket(b, {x}, {y});
    EXPECT_LT((b.to_matrix(span_of(z.coeffs)) - (xm * ym - ym * xm)).norm(), 1e-12);
  }
}

TEST_P(BasisByN, JacobiAndAntisymmetry) {
  const LieBasis b(GetParam());
  RngStream s(2, static_cast<std::uint64_t>(GetParam()));
  for (int trial = 0; trial < 10; ++trial) {
    const AlgebraElement x{random_coeffs(b.dim(), s)}, y{random_coeffs(b.dim(), s)}, z{random_coeffs(b.dim(), s)};
    EXPECT_LT(bracket(b, x, x).coeffs.norm(), 1e-14);
    const Eigen::VectorXd jac = bracket(b, x, bracket(b, y, z)).coeffs + bracket(b, y, bracket(b, z, x)).coeffs +
                                bracket(b, z, bracket(b, x, y)).coeffs;
    EXPECT_LT(jac.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST_P(BasisByN, KillingIsTwoNTraceAndAdInvariant) {
  const int n = GetParam();
  const LieBasis b(n);
  RngStream s(3, static_cast<std::uint64_t>(n));
  for (int trial = 0; trial < 10; ++trial) {
    const AlgebraElement x{random_coeffs(b.dim(), s)}, y{random_coeffs(b.dim(), s)}, z{random_coeffs(b.dim(), s)};
    const CMatrix xm = b.to_matrix(span_of(x.coeffs)), ym = b.to_matrix(span_of(y.coeffs));
    const double k = killing_form(b, x, y);
    EXPECT_NEAR(k, killing_form(b, y, x), 1e-12);
    EXPECT_NEAR(k, killing_oracle(b, xm, ym), 1e-10);
    EXPECT_NEAR(k, 2.0 * n * (xm * ym).trace().real(), 1e-10);
    EXPECT_NEAR(b.killing(span_of(x.coeffs), span_of(y.coeffs)), k, 1e-12);
    EXPECT_NEAR(killing_form(b, bracket(b, z, x), y) + killing_form(b, x, bracket(b, z, y)), 0.0, 1e-10);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b.killing_matrix());
  EXPECT_LT(eig.eigenvalues().maxCoeff(), 0.0);
}

TEST_P(BasisByN, ExpMatchesTaylorOracleAndStaysInGroup) {
  const int n = GetParam();
  const LieBasis b(n);
  RngStream s(4, static_cast<std::uint64_t>(n));
  for (double scale : {1e-9, 0.1, 1.0, 3.0, 10.0}) {
    Eigen::VectorXd x = random_coeffs(b.dim(), s);
    x *= scale / x.norm();
    const GroupElement g = exp_map(b, {x});
    EXPECT_LT((g.mat - taylor_expm(b.to_matrix(span_of(x)))).norm(), 1e-11 * std::max(1.0, scale)) << scale;
    std::vector<Complex> flat(static_cast<std::size_t>(n) * n);
    b.exp_into(span_of(x), flat);
    EXPECT_LT((block(flat, n) - g.mat).norm(), 1e-14);
    EXPECT_LE(unitarity_defect(flat, n), 1e-12);
    EXPECT_LE(determinant_defect(flat, n), 1e-12);
    const GroupElement ginv = exp_map(b, {-x});
    EXPECT_LT((g.mat * ginv.mat - CMatrix::Identity(n, n)).norm(), 1e-12);
  }
}

TEST_P(BasisByN, LogInvertsExpNearIdentity) {
  const LieBasis b(GetParam());
  RngStream s(5, static_cast<std::uint64_t>(GetParam()));
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x = random_coeffs(b.dim(), s);
    x *= 0.8 / x.norm();
    const int n = b.n();
    std::vector<Complex> g(static_cast<std::size_t>(n) * n);
    b.exp_into(span_of(x), g);
    std::vector<double> back(static_cast<std::size_t>(b.dim()));
    ASSERT_TRUE(b.log_into(g, back));
    for (int a = 0; a < b.dim(); ++a) EXPECT_NEAR(back[a], x[a], 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(SuN, BasisByN, ::testing::Values(2, 3, 4));

TEST(Bracket, Su2BasisRelations) {
  const LieBasis b(2);
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3), y = Eigen::VectorXd::Zero(3);
    x[a] = 1.0;
    y[(a + 1) % 3] = 1.0;
    const Eigen::VectorXd z = bracket(b, {x}, {y}).coeffs;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(z[c], c == (a + 2) % 3 ? 1.0 : 0.0, 1e-15);
    const CMatrix tx = b.generator(a), ty = b.generator((a + 1) % 3);
    EXPECT_LT((tx * ty - ty * tx - b.generator((a + 2) % 3)).norm(), 1e-15);
  }
}

TEST(Killing, Su2IsFourTraceAndMinusTwoOnBasis) {
  const LieBasis b(2);
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(b.killing_matrix()(a, c), a == c ? -2.0 : 0.0, 1e-14);
}

TEST(Exp, IdentityAtZero) {
  for (int n : {2, 3}) {
    const LieBasis b(n);
    const GroupElement g = exp_map(b, {Eigen::VectorXd::Zero(b.dim())});
    EXPECT_EQ(g.mat, CMatrix::Identity(n, n));
  }
}

TEST(Exp, RotationAboutT3HasHalfAnglePhases) {
  const LieBasis b(2);
  for (double theta : {0.3, 1.0, 2.5, 6.0}) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    x[2] = theta;
    const CMatrix oracle = taylor_expm(b.to_matrix(span_of(x)));
    const GroupElement g = exp_map(b, {x});
    // exp(theta T_3) = diag(e^{-i theta/2}, e^{i theta/2}).
    EXPECT_NEAR(std::arg(oracle(0, 0)), -theta / 2.0, 1e-12);
    EXPECT_NEAR(std::arg(oracle(1, 1)), theta / 2.0, 1e-12);
    EXPECT_LT(std::abs(g.mat(0, 0) - std::polar(1.0, -theta / 2.0)), 1e-14);
    EXPECT_LT(std::abs(g.mat(1, 1) - std::polar(1.0, theta / 2.0)), 1e-14);
    EXPECT_LT(std::abs(g.mat(0, 1)), 1e-15);
  }
}

TEST(Exp, RejectsNonFiniteInput) {
  const LieBasis b(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  x[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(exp_map(b, {x}), PreconditionError);
}

TEST(Log, RefusesOutsidePrincipalDomain) {
  const LieBasis b(2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  x[0] = 3.0;
  std::vector<Complex> g(4);
  b.exp_into(span_of(x), g);
  std::vector<double> out(3, 7.0);
  EXPECT_FALSE(b.log_into(g, out));
  EXPECT_EQ(out[0], 7.0);
}

}  // namespace
}  // namespace hkcg
