#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "chebgsee/errors.hpp"
#include "chebgsee/linear_prediction.hpp"

using namespace chebgsee;

namespace {

std::vector<double> modes(std::size_t len, const std::vector<std::pair<double, double>>& wt) {
  std::vector<double> mu(len, 0.0);
  for (std::size_t k = 0; k < len; ++k)
    for (const auto& [w, th] : wt) mu[k] += w * std::cos(static_cast<double>(k) * th);
  return mu;
}

LpModel model_of(std::vector<double> a) {
  LpModel m;
  m.n_fit = a.size();
  m.ar_coeffs = std::move(a);
  return m;
}

}  // namespace

TEST(FitLp, SingleCosine) {
  const double th = 0.7;
  const auto mu = modes(41, {{1.0, th}});
  const auto m = fit_lp(mu, 2, 0.0);
  EXPECT_NEAR(m.ar_coeffs[0], -2.0 * std::cos(th), 1e-12);
  EXPECT_NEAR(m.ar_coeffs[1], 1.0, 1e-12);
  EXPECT_LT(m.residual_rms, 1e-10);
  EXPECT_EQ(m.window_start, 39u);
  EXPECT_EQ(m.window_end, 40u);
}

TEST(FitLp, Constant) {
  const std::vector<double> mu(9, 1.0);
  const auto m = fit_lp(mu, 1, 0.0);
  EXPECT_NEAR(m.ar_coeffs[0], -1.0, 1e-14);
}

TEST(FitLp, TwoModesRecoverProductRecurrence) {
  const double c1 = std::cos(0.3), c2 = std::cos(1.1);
  const auto mu = modes(60, {{0.6, 0.3}, {0.4, 1.1}});
  const auto m = fit_lp(mu, 4, 0.0);
  // (z^2 - 2 c1 z + 1)(z^2 - 2 c2 z + 1)
  const std::vector<double> want = {-2 * (c1 + c2), 2 + 4 * c1 * c2, -2 * (c1 + c2), 1.0};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(m.ar_coeffs[j], want[j], 1e-7) << "j=" << j;
  EXPECT_LT(m.residual_rms, 1e-9);
}

TEST(FitLp, Errors) {
  const auto mu = modes(10, {{1.0, 0.4}});
  EXPECT_THROW(fit_lp(mu, 5, 0.0), ParameterError);
  EXPECT_THROW(fit_lp(mu, 0, 0.0), ParameterError);
  EXPECT_THROW(fit_lp(mu, 2, -1.0), ParameterError);
  EXPECT_THROW(fit_lp(mu, 2, 0.0, 9), ParameterError);
  // One mode cannot determine an order-4 model.
  const auto longer = modes(40, {{1.0, 0.4}});
  try {
    fit_lp(longer, 4, 0.0);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("ridge"), std::string::npos);
  }
  EXPECT_NO_THROW(fit_lp(longer, 4, 1e-10));
}

TEST(FitLp, MomentSequenceUsesComputedPrefix) {
  MomentSequence seq;
  seq.moments = modes(30, {{1.0, 0.9}});
  seq.moments.push_back(1e6);
  seq.split_index = 30;
  const auto m = fit_lp(seq, 2, 0.0);
  EXPECT_NEAR(m.ar_coeffs[0], -2.0 * std::cos(0.9), 1e-12);
}

TEST(Stabilize, StableModelUnchanged) {
  const auto mu = modes(40, {{0.5, 0.2}, {0.5, 2.0}});
  const auto m = fit_lp(mu, 4, 0.0);
  for (const auto& z : companion_roots(m)) EXPECT_LE(std::abs(z), 1.0 + 1e-9);
  const auto s = stabilize(m);
  EXPECT_TRUE(s.stabilized);
  EXPECT_EQ(s.reflected_roots, 0u);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(s.ar_coeffs[j], m.ar_coeffs[j], 1e-12);
}

TEST(Stabilize, ReflectsOutsideRoot) {
  const double phi = 0.8, r = 1.05;
  // (z^2 - 2 r cos(phi) z + r^2)(z - 0.5)
  const double p1 = -2 * r * std::cos(phi), p2 = r * r;
  const auto m = model_of({p1 - 0.5, p2 - 0.5 * p1, -0.5 * p2});
  const auto s = stabilize(m);
  EXPECT_EQ(s.reflected_roots, 2u);
  auto roots = companion_roots(s);
  std::sort(roots.begin(), roots.end(), [](auto a, auto b) { return a.imag() < b.imag(); });
  EXPECT_NEAR(std::abs(roots[2] - std::polar(1.0 / r, phi)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(roots[0] - std::polar(1.0 / r, -phi)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(roots[1] - 0.5), 0.0, 1e-12);
  for (const auto& z : roots) EXPECT_LE(std::abs(z), 1.0 + 1e-9);

  const auto again = stabilize(s);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(again.ar_coeffs[j], s.ar_coeffs[j], 1e-12);
}

TEST(Stabilize, ExtrapolationStaysBounded) {
  // Slowly growing cosine with period 16: mu_k = (1 + 1e-8)^k cos(pi k / 8).
  const double th = M_PI / 8;
  std::vector<double> mu(64);
  for (std::size_t k = 0; k < mu.size(); ++k) mu[k] = std::pow(1.0 + 1e-8, k) * std::cos(th * k);
  const auto m = fit_lp(mu, 2, 0.0, 32);
  EXPECT_GT(std::abs(companion_roots(m)[0]), 1.0 + 5e-9);
  const auto s = stabilize(m);
  EXPECT_EQ(s.reflected_roots, 2u);
  double window_max = 0.0;
  for (std::size_t n = s.window_start - s.n_fit; n <= s.window_end; ++n) window_max = std::max(window_max, std::abs(mu[n]));
  const std::size_t target = mu.size() + 100000 - 1;
  auto sup_after = [&](const std::vector<double>& ext) {
    double sup = 0.0;
    for (std::size_t n = mu.size(); n < ext.size(); ++n) sup = std::max(sup, std::abs(ext[n]));
    return sup;
  };
  EXPECT_LE(sup_after(extrapolate(mu, s, target)), window_max * (1 + 1e-6));
  EXPECT_GT(sup_after(extrapolate(mu, m, target)), window_max * (1 + 1e-4));
}

TEST(Stabilize, HighOrderNoisyFit) {
  // Order-150 fit of 30 undamped modes plus noise: many roots land just outside
  // the unit circle, and the rebuilt coefficients must not blow up.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<double, double>> wt;
  for (int i = 0; i < 30; ++i) wt.emplace_back(u(rng) / 15, M_PI * u(rng));
  auto mu = modes(1001, wt);
  std::normal_distribution<double> noise(0.0, 1e-5);
  for (auto& v : mu) v += noise(rng);

  const auto s = stabilize(fit_lp(mu, 150, 0.0, 800));
  EXPECT_GT(s.reflected_roots, 0u);
  for (const auto& z : companion_roots(s)) EXPECT_LE(std::abs(z), 1.0 + 1e-9);
  const auto ext = extrapolate(mu, s, 20000);
  double window_max = 0.0, sup = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) window_max = std::max(window_max, std::abs(mu[n]));
  for (std::size_t n = mu.size(); n < ext.size(); ++n) sup = std::max(sup, std::abs(ext[n]));
  EXPECT_LE(sup, 2 * window_max);
}

TEST(Extrapolate, SingleCosineTenfold) {
  const double th = 1.3;
  const auto mu = modes(101, {{1.0, th}});
  const auto ext = extrapolate(mu, fit_lp(mu, 2, 0.0), 1000);
  ASSERT_EQ(ext.size(), 1001u);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 1000; ++k) worst = std::max(worst, std::abs(ext[k] - std::cos(k * th)));
  EXPECT_LE(worst, 1e-8);
}

TEST(Extrapolate, FiniteModeSignals) {
  const std::vector<std::vector<std::pair<double, double>>> cases = {
      {{1.0, 0.35}},
      {{0.7, 0.2}, {0.3, 2.4}},
      {{0.5, 0.1}, {0.3, 1.0}, {0.2, 2.9}},
      {{0.4, 0.25}, {0.3, 0.9}, {0.2, 1.7}, {0.1, 2.6}},
  };
  for (const auto& c : cases) {
    const std::size_t r = c.size();
    const std::size_t len = 10 * r + 1;
    const auto mu = modes(len, c);
    const auto truth = modes(10 * len, c);
    const auto ext = extrapolate(mu, fit_lp(mu, 2 * r, 0.0), truth.size() - 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) worst = std::max(worst, std::abs(ext[k] - truth[k]));
    EXPECT_LE(worst, 1e-8) << "r=" << r;
  }
}

TEST(Extrapolate, SequenceBookkeeping) {
  MomentSequence seq;
  seq.moments = modes(21, {{1.0, 0.6}});
  seq.cosine_errors.assign(11, 0.0);
  const auto m = fit_lp(seq, 2, 0.0);
  const auto ext = extrapolate(seq, m, 200);
  EXPECT_EQ(ext.size(), 201u);
  ASSERT_TRUE(ext.split_index.has_value());
  EXPECT_EQ(*ext.split_index, 21u);
  EXPECT_EQ(ext.computed(), 21u);
  for (std::size_t k = 0; k < 21; ++k) EXPECT_EQ(ext.moments[k], seq.moments[k]);
  EXPECT_EQ(ext.cosine_errors.size(), 11u);
  EXPECT_THROW(extrapolate(seq, m, 20), ParameterError);
  EXPECT_THROW(extrapolate(seq, m, 5), ParameterError);
}
