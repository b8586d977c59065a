#include <cmath>

#include <gtest/gtest.h>

#include "chebgsee/errors.hpp"
#include "chebgsee/gsee.hpp"
#include "chebgsee/oracle.hpp"
#include "dense_reference.hpp"

using namespace chebgsee;

namespace {

std::vector<double> eigen_moments(double lambda, std::size_t d) {
  std::vector<double> mu(d + 1);
  for (std::size_t k = 0; k <= d; ++k) mu[k] = std::cos(k * std::acos(lambda));
  return mu;
}

std::vector<double> plus_under_z(std::size_t d) {
  std::vector<double> mu(d + 1);
  for (std::size_t k = 0; k <= d; ++k) mu[k] = k % 2 == 0 ? 1.0 : 0.0;
  return mu;
}

}  // namespace

TEST(Cumulative, OnlyZerothMoment) {
  std::vector<double> mu(51, 0.0);
  mu[0] = 1.0;
  const auto grid = scan_grid(0.1);
  const auto family = cheb_family(0.1, 0.05, 50, grid);
  const auto c = cumulative(mu, family);
  ASSERT_EQ(c.size(), family.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(c[i].first, family[i].meta.c);
    EXPECT_EQ(c[i].second, family[i].coeffs[0] / 2);
  }
}

TEST(Cumulative, DegreeMismatch) {
  const auto p = shifted_sign_cheb(0.0, 0.2, 0.05, 40);
  EXPECT_THROW(cumulative_at(std::vector<double>(40, 0.0), p.coeffs), ParameterError);
  EXPECT_NO_THROW(cumulative_at(std::vector<double>(41, 0.0), p.coeffs));
}

TEST(Cumulative, TwoLevelPlateau) {
  const double delta = 0.05, eta = 0.02;
  const std::size_t d = filter_degree(delta, eta);
  const auto mu = plus_under_z(d);
  const auto grid = scan_grid(delta);
  for (const auto& [x, c] : cumulative(mu, cheb_family(delta, eta, d, grid))) EXPECT_NEAR(c, 0.5, 2 * eta) << "x=" << x;
}

TEST(Cumulative, SingleExactGroundState) {
  const auto H = tfim_1d(6, 1.0, 1.0);
  const DenseSystem sys(H);
  const double lam0 = sys.eigenvalues()(0);
  const double delta = 0.04, eta = 0.01;
  const std::size_t d = filter_degree(delta, eta);
  const auto mu = dense_cheb_moments(sys, DenseVector(sys.eigenvectors().col(0)), d);
  for (const auto& [x, c] : cumulative(mu, cheb_family(delta, eta, d, scan_grid(delta)))) {
    if (x < lam0 - delta) EXPECT_NEAR(c, 0.0, 2 * eta) << "x=" << x;
    if (x > lam0 + delta) EXPECT_NEAR(c, 1.0, 2 * eta) << "x=" << x;
  }
}

TEST(EstimateEnergy, ScalarHamiltonian) {
  const double delta = 0.02;
  const std::size_t d = filter_degree(delta, 0.125);
  const auto grid = scan_grid(delta);
  for (const double lam : {grid[3], grid[40], grid[77], -0.3131, 0.5555}) {
    const auto r = estimate_energy(eigen_moments(lam, d), 1.0, delta, d);
    EXPECT_LE(r.lo, lam) << lam;
    EXPECT_GE(r.hi, lam) << lam;
    EXPECT_NEAR(r.hi - r.lo, delta, 1e-12);
    EXPECT_NEAR(r.midpoint(), r.c_star, 1e-15);
    EXPECT_EQ(r.c_trace.size(), grid.size());
  }
}

TEST(EstimateEnergy, EigenstateAtModerateDegree) {
  const auto H = tfim_1d(8, 1.0, 1.0);
  const DenseSystem sys(H);
  const double lam0 = sys.eigenvalues()(0);
  const std::size_t d = 200;
  const double delta = 1.0 / d;
  const auto mu = dense_cheb_moments(sys, DenseVector(sys.eigenvectors().col(0)), d);
  const auto r = estimate_energy(mu, 1.0, delta, d);
  EXPECT_LE(std::abs(r.midpoint() - lam0), delta);
  EXPECT_EQ(r.degree, d);
  EXPECT_DOUBLE_EQ(r.eta, 0.125);
}

TEST(EstimateEnergy, OutsideWindow) {
  const std::size_t d = 100;
  std::vector<double> mu(d + 1, 0.0);
  mu[0] = 1.0;
  EXPECT_THROW(estimate_energy(eigen_moments(0.999, d), 1.0, 0.05, d), NumericalError);
  EXPECT_THROW(estimate_energy(eigen_moments(-0.999, d), 1.0, 0.05, d), NumericalError);
  EXPECT_THROW(estimate_energy(mu, 0.0, 0.05, d), ParameterError);
  EXPECT_THROW(estimate_energy(mu, 1.0, 0.05, d + 1), ParameterError);
}

TEST(EstimateEnergy, DiagnosticsRecordFilterQuality) {
  DiagnosticsLog log;
  const std::size_t d = 30;
  estimate_energy(eigen_moments(0.1, d), 1.0, 0.05, d, {.log = &log});
  EXPECT_EQ(log.count("filter_max_error"), 1u);
  EXPECT_EQ(log.count("filter_quality"), 1u);
}

TEST(BinarySearch, IterationCount) {
  EXPECT_EQ(binary_search_iterations(1.0 / 3.0), 3u);
  EXPECT_EQ(binary_search_iterations(1.0), 0u);
  EXPECT_EQ(binary_search_iterations(0.01), static_cast<std::size_t>(std::ceil(std::log(100.0) / std::log(1.5))));
}

TEST(BinarySearch, SingleQubitEdgeGround) {
  std::size_t max_requested = 0;
  const MomentProvider provider = [&](std::size_t d) {
    max_requested = std::max(max_requested, d);
    return plus_under_z(d);
  };
  const double eps = 1e-3;
  const auto r = binary_search_energy(provider, std::sqrt(0.5), eps);
  EXPECT_EQ(r.iterations, binary_search_iterations(eps));
  EXPECT_LE(r.hi - r.lo, 2 * eps);
  EXPECT_EQ(r.lo, -1.0);
  EXPECT_EQ(r.degree, max_requested);

  const auto coarse = binary_search_energy(provider, std::sqrt(0.5), 1.0 / 3.0);
  EXPECT_EQ(coarse.iterations, 3u);
}

TEST(BinarySearch, AgreesWithScan) {
  const auto H = tfim_1d(8, 1.0, 1.0);
  const DenseSystem sys(H);
  const double lam0 = sys.eigenvalues()(0);
  DenseVector psi = sys.eigenvectors().col(0) + 0.6 * testref::random_vector(256, 4);
  psi.normalize();
  const double chi = overlap_chi(psi, sys);
  const MomentProvider provider = [&](std::size_t d) { return dense_cheb_moments(sys, psi, d); };

  const double eps = 0.01;
  const auto bs = binary_search_energy(provider, chi, eps);
  EXPECT_LE(bs.lo, lam0);
  EXPECT_GE(bs.hi, lam0);

  const double delta = 2 * eps;
  const std::size_t d = filter_degree(delta, default_eta(chi));
  const auto scan = estimate_energy(provider(d), chi, delta, d);
  EXPECT_LE(scan.lo, lam0);
  EXPECT_GE(scan.hi, lam0);
  EXPECT_LE(std::max(bs.lo, scan.lo), std::min(bs.hi, scan.hi));
}

TEST(BinarySearch, ProviderErrorsPropagate) {
  const MomentProvider provider = [](std::size_t d) -> std::vector<double> {
    if (d > 50) throw CapacityError("too deep");
    return plus_under_z(d);
  };
  EXPECT_THROW(binary_search_energy(provider, 0.7, 1e-3), CapacityError);
}
