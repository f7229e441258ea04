#include "hkcg/torus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hkcg/error.hpp"
#include "hkcg/extension.hpp"
#include "hkcg/rng.hpp"

namespace hkcg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> column(const SpectralBasis& b, int m) {
  std::vector<double> v(static_cast<std::size_t>(b.grid().size()));
  for (int p = 0; p < b.grid().size(); ++p) v[p] = b.values()(p, m);
  return v;
}

TEST(TorusGrid, ValidatesShape) {
  EXPECT_THROW(TorusGrid(0, 8), PreconditionError);
  EXPECT_THROW(TorusGrid(4, 8), PreconditionError);
  EXPECT_THROW(TorusGrid(1, 2), PreconditionError);
  EXPECT_THROW(TorusGrid(1, 12), PreconditionError);
  EXPECT_NO_THROW(TorusGrid(3, 4));
}

TEST(TorusGrid, RowMajorIndexingWithWrap) {
  const TorusGrid g(3, 8);
  EXPECT_EQ(g.size(), 512);
  EXPECT_EQ(g.stride(0), 64);
  EXPECT_EQ(g.stride(2), 1);
  for (int p = 0; p < g.size(); p += 7) EXPECT_EQ(g.linear_index(g.multi_index(p)), p);
  EXPECT_EQ(g.linear_index({-1, 8, 9}), g.linear_index({7, 0, 1}));
  EXPECT_DOUBLE_EQ(g.coordinate(g.linear_index({3, 0, 5}), 0), 3 * kTwoPi / 8);
  EXPECT_DOUBLE_EQ(g.volume(), std::pow(kTwoPi, 3));
}

TEST(SpectralBasis, ConstantModeOnly) {
  const SpectralBasis b(TorusGrid(1, 8), 0);
  ASSERT_EQ(b.size(), 1);
  EXPECT_EQ(b.mode(0).eigenvalue, 0.0);
  for (int p = 0; p < 8; ++p) EXPECT_NEAR(b.values()(p, 0), 1.0 / std::sqrt(kTwoPi), 1e-15);
}

TEST(SpectralBasis, ModeCounts) {
  EXPECT_EQ(SpectralBasis(TorusGrid(1, 8), 3).size(), 7);
  EXPECT_EQ(SpectralBasis(TorusGrid(2, 8), 1).size(), 9);
  EXPECT_EQ(SpectralBasis(TorusGrid(3, 8), 1).size(), 27);
  EXPECT_EQ(build_spectrum(2, 16, 3).size(), 49);
}

TEST(SpectralBasis, RejectsAliasing) {
  EXPECT_THROW(SpectralBasis(TorusGrid(1, 64), 32), PreconditionError);
  EXPECT_THROW(SpectralBasis(TorusGrid(1, 64), 33), PreconditionError);
  EXPECT_NO_THROW(SpectralBasis(TorusGrid(1, 64), 31));
  try {
    SpectralBasis(TorusGrid(1, 64), 33);
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("aliasing"), std::string::npos);
  }
}

// Rayleigh quotient sum_i ||d_i e||^2 / ||e||^2 using the spectral derivative.
TEST(SpectralBasis, EigenvaluesFromRayleighQuotient) {
  const TorusGrid grid(1, 32);
  const SpectralBasis b(grid, 3);
  const SpectralDerivative deriv(grid);
  std::vector<double> found;
  for (int m = 0; m < b.size(); ++m) {
    AlgebraField f(grid, 1), df(grid, 1);
    f.data() = column(b, m);
    deriv.apply(f, 0, df);
    double num = 0.0, den = 0.0;
    for (int p = 0; p < grid.size(); ++p) {
      num += df.data()[p] * df.data()[p];
      den += f.data()[p] * f.data()[p];
    }
    found.push_back(num / den);
    EXPECT_NEAR(num / den, b.mode(m).eigenvalue, 1e-10);
  }
  const std::vector<double> expected{0, 1, 1, 4, 4, 9, 9};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(found[i], expected[i], 1e-10);
}

TEST(SpectralBasis, CosineBeforeSine) {
  const SpectralBasis b(TorusGrid(2, 8), 2);
  for (int m = 1; m + 1 < b.size(); m += 2) {
    EXPECT_EQ(b.mode(m).kind, Mode::Kind::cosine);
    EXPECT_EQ(b.mode(m + 1).kind, Mode::Kind::sine);
    EXPECT_EQ(b.mode(m).wavevector, b.mode(m + 1).wavevector);
    EXPECT_LE(b.mode(m - 1).eigenvalue, b.mode(m).eigenvalue);
  }
}

class QuadratureByDim : public ::testing::TestWithParam<int> {};

TEST_P(QuadratureByDim, VolumeAndOrthonormality) {
  const int d = GetParam();
  const SpectralBasis b(TorusGrid(d, 8), 2);
  const std::vector<double> ones(static_cast<std::size_t>(b.grid().size()), 1.0);
  EXPECT_NEAR(quadrature(b.grid(), ones), std::pow(kTwoPi, d), 1e-12);
  for (int m = 0; m < b.size(); ++m) {
    const auto em = column(b, m);
    for (int q = m; q < b.size(); ++q) {
      const auto eq = column(b, q);
      std::vector<double> prod(em.size());
      for (std::size_t p = 0; p < em.size(); ++p) prod[p] = em[p] * eq[p];
      EXPECT_NEAR(quadrature(b.grid(), prod), m == q ? 1.0 : 0.0, 1e-10) << m << "," << q;
    }
  }
}

TEST_P(QuadratureByDim, ParsevalForBandLimitedField) {
  const int d = GetParam();
  const TorusGrid grid(d, 16);
  RngStream s(9, static_cast<std::uint64_t>(d));
  const AlgebraField f = random_band_limited_field(grid, 1, 3, s);
  const SpectralBasis b(grid, 7);
  const Eigen::VectorXd c = b.project(f.data());
  std::vector<double> sq(f.data().size());
  for (std::size_t p = 0; p < sq.size(); ++p) sq[p] = f.data()[p] * f.data()[p];
  EXPECT_NEAR(quadrature(grid, sq), c.squaredNorm(), 1e-8 * c.squaredNorm());
}

INSTANTIATE_TEST_SUITE_P(Dims, QuadratureByDim, ::testing::Values(1, 2, 3));

TEST(ExteriorDerivative, ConstantFieldIsClosed) {
  const TorusGrid grid(2, 8);
  AlgebraField eta(grid, 3);
  for (int p = 0; p < grid.size(); ++p) eta.at(p)[1] = 2.5;
  const OneFormField d = exterior_derivative(eta);
  ASSERT_EQ(d.components.size(), 2u);
  for (const auto& c : d.components)
    for (double v : c.data()) EXPECT_NEAR(v, 0.0, 1e-13);
}

TEST(ExteriorDerivative, Sin3xAgainstFiniteDifferences) {
  for (int p_axis : {16, 32, 64}) {
    const TorusGrid grid(1, p_axis);
    const double h = grid.spacing();
    AlgebraField eta(grid, 3);
    for (int p = 0; p < p_axis; ++p) eta.at(p)[0] = std::sin(3.0 * grid.coordinate(p, 0));
    const AlgebraField d = exterior_derivative(eta).components[0];
    // Central differences of sin(3x) give (sin(3h)/h) cos(3x) exactly.
    const double fd_gain = std::sin(3.0 * h) / h;
    for (int p = 0; p < p_axis; ++p) {
      const double fd = (eta.at((p + 1) % p_axis)[0] - eta.at((p + p_axis - 1) % p_axis)[0]) / (2.0 * h);
      EXPECT_NEAR(d.at(p)[0], 3.0 * std::cos(3.0 * grid.coordinate(p, 0)), 1e-11);
      EXPECT_EQ(d.at(p)[1], 0.0);
      EXPECT_NEAR(fd, fd_gain * std::cos(3.0 * grid.coordinate(p, 0)), 1e-12);
      // Spectral vs finite differences: O(h^2) gap, 3 - sin(3h)/h <= 4.5 h^2.
      EXPECT_LE(std::abs(d.at(p)[0] - fd), 4.5 * h * h);
    }
  }
}

TEST(ExteriorDerivative, LinearAndMixedPartialsCommute) {
  const TorusGrid grid(2, 16);
  RngStream s(10, 0);
  const AlgebraField a = random_band_limited_field(grid, 3, 4, s);
  const AlgebraField b = random_band_limited_field(grid, 3, 4, s);
  AlgebraField sum(grid, 3);
  for (std::size_t i = 0; i < sum.data().size(); ++i) sum.data()[i] = a.data()[i] + b.data()[i];
  const OneFormField da = exterior_derivative(a), db = exterior_derivative(b), ds = exterior_derivative(sum);
  for (int axis = 0; axis < 2; ++axis)
    for (std::size_t i = 0; i < sum.data().size(); ++i)
      EXPECT_NEAR(ds.components[axis].data()[i], da.components[axis].data()[i] + db.components[axis].data()[i], 1e-12);
  // d(d eta) = 0: d_0 d_1 eta = d_1 d_0 eta.
  const OneFormField d0 = exterior_derivative(da.components[0]);
  const OneFormField d1 = exterior_derivative(da.components[1]);
  for (std::size_t i = 0; i < sum.data().size(); ++i)
    EXPECT_NEAR(d0.components[1].data()[i], d1.components[0].data()[i], 1e-10);
}

TEST(AlgebraField, Congruence) {
  const AlgebraField a(TorusGrid(1, 8), 3), b(TorusGrid(1, 8), 3), c(TorusGrid(1, 16), 3), e(TorusGrid(1, 8), 1);
  EXPECT_TRUE(a.congruent(b));
  EXPECT_FALSE(a.congruent(c));
  EXPECT_FALSE(a.congruent(e));
}

}  // namespace
}  // namespace hkcg
