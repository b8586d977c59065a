#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "chebgsee/chebyshev.hpp"
#include "chebgsee/errors.hpp"
#include "chebgsee/oracle.hpp"

using namespace chebgsee;

namespace {

ChebRunConfig exact_cfg(std::size_t n_max) {
  ChebRunConfig cfg;
  cfg.chi_mps = kUnboundedBond;
  cfg.n_max = n_max;
  cfg.svd_tol = 1e-15;
  return cfg;
}

NormalizedHamiltonian single_z() {
  NormalizedHamiltonian H;
  H.terms = PauliSum(1, {{1.0, "Z"}});
  H.scale = 1.0;
  H.mpo = paulisum_to_mpo(H.terms, 0.0);
  return H;
}

Mps plus_state(std::size_t n) {
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<std::array<Complex, 2>> local(n, {Complex(r), Complex(r)});
  return Mps::product_state(local);
}

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(BondGrowth, Recurrence) {
  EXPECT_EQ(bond_growth_trace(3, 2, 3), (std::vector<std::size_t>{2, 6, 20, 66}));
  EXPECT_EQ(bond_growth_trace(1, 2, 4), (std::vector<std::size_t>{2, 2, 4, 6, 10}));
  EXPECT_EQ(bond_growth_trace(tfim_1d(6, 1, 1), 1, 0), (std::vector<std::size_t>{1}));
}

TEST(BondGrowth, UntruncatedRunStaysWithinTrace) {
  const auto H = tfim_1d(6, 1.0, 1.0);
  ChebRunConfig cfg = exact_cfg(4);
  cfg.compress = false;
  const auto seq = run_chebyshev(H, Mps::random(6, 2, 4), cfg);
  const auto trace = bond_growth_trace(H, 2, 4);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(seq.bonds[k], trace[k]) << "k=" << k;
}

TEST(ChebStep, EigenstateStaysParallel) {
  const auto H = tfim_1d(6, 1.0, 0.7);
  const DenseSystem sys(H);
  const double lam = sys.eigenvalues()(2);
  const auto psi = from_dense(DenseVector(sys.eigenvectors().col(2)));
  const auto cfg = exact_cfg(1);
  auto [t1, r1] = cheb_first_step(H.mpo, psi, cfg);
  EXPECT_NEAR(inner(psi, t1).real(), lam, 1e-10);
  Mps prev = psi, cur = t1;
  for (int k = 2; k <= 12; ++k) {
    auto [next, rep] = cheb_step(H.mpo, cur, prev, cfg);
    EXPECT_NEAR(inner(psi, next).real(), std::cos(k * std::acos(lam)), 1e-10) << "k=" << k;
    EXPECT_LE(rep.trunc_error, 1e-12);
    prev = std::move(cur);
    cur = std::move(next);
  }
}

TEST(ChebStep, SingleQubitZ) {
  const auto H = single_z();
  const auto psi = plus_state(1);
  const auto cfg = exact_cfg(2);
  auto [t1, r1] = cheb_first_step(H.mpo, psi, cfg);
  auto [t2, r2] = cheb_step(H.mpo, t1, psi, cfg);
  EXPECT_NEAR(inner(psi, t2).real(), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(inner(psi, t1)), 0.0, 1e-14);
}

TEST(ChebStep, ExactModeHasNoErrors) {
  const auto H = tfim_1d(8, 1.0, 1.0);
  const auto seq = run_chebyshev(H, Mps::random(8, 3, 1), exact_cfg(20));
  for (std::size_t k = 0; k <= 20; ++k) {
    EXPECT_LE(seq.trunc_errors[k], 1e-12);
    EXPECT_LE(seq.cosine_errors[k], 1e-12);
  }
}

TEST(ChebStep, CosineErrorIsSecondOrder) {
  const auto H = tfim_1d(10, 1.0, 1.0);
  ChebRunConfig cfg;
  cfg.chi_mps = 6;
  cfg.n_max = 1;
  const auto psi = Mps::random(10, 6, 3);
  auto [t1, r1] = cheb_first_step(H.mpo, psi, cfg);
  Mps prev = psi, cur = t1;
  for (int k = 2; k <= 15; ++k) {
    auto [next, rep] = cheb_step(H.mpo, cur, prev, cfg);
    const double bound = rep.trunc_error * rep.trunc_error / (rep.norm_before * rep.norm_before) + 1e-12;
    EXPECT_LE(rep.cos_error, bound) << "k=" << k;
    EXPECT_LE(next.max_bond(), 6u);
    prev = std::move(cur);
    cur = std::move(next);
  }
}

TEST(ChebStep, CapacityError) {
  const auto H = tfim_1d(8, 1.0, 1.0);
  ChebRunConfig cfg = exact_cfg(10);
  cfg.compress = false;
  cfg.max_intermediate_bond = 30;
  try {
    run_chebyshev(H, Mps::random(8, 2, 4), cfg);
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("intermediate bond"), std::string::npos);
  }
}

TEST(Moments, FromVectorsEigenstate) {
  const auto H = tfim_1d(5, 1.0, 0.4);
  const DenseSystem sys(H);
  const double lam = sys.eigenvalues()(0);
  const auto psi = from_dense(DenseVector(sys.eigenvectors().col(0)));
  const auto cfg = exact_cfg(1);
  auto [t1, r1] = cheb_first_step(H.mpo, psi, cfg);
  auto [t2, r2] = cheb_step(H.mpo, t1, psi, cfg);
  const auto [even, odd] = moments_from_vectors(t1, t2, 1.0, lam, 1);
  EXPECT_NEAR(even, std::cos(2 * std::acos(lam)), 1e-12);
  EXPECT_NEAR(odd, std::cos(3 * std::acos(lam)), 1e-12);
}

TEST(Moments, PlusUnderZ) {
  const auto seq = run_chebyshev(single_z(), plus_state(1), exact_cfg(6));
  ASSERT_EQ(seq.size(), 13u);
  for (std::size_t k = 0; k < seq.size(); ++k) EXPECT_NEAR(seq.moments[k], k % 2 == 0 ? 1.0 : 0.0, 1e-14);
}

TEST(Moments, ExactRunMatchesOracle) {
  const auto H = tfim_1d(10, 1.0, 1.0);
  const auto psi = Mps::random(10, 4, 12);
  const auto seq = run_chebyshev(H, psi, exact_cfg(32));
  ASSERT_EQ(seq.size(), 65u);
  const DenseSystem sys(H);
  const auto mu = dense_cheb_moments(sys, to_dense(psi), 64);
  const auto err = moment_error_profile(mu, seq);
  EXPECT_LE(*std::max_element(err.begin(), err.end()), 1e-10);
  EXPECT_NEAR(seq.moments[0], 1.0, 1e-12);
}

TEST(Moments, NotNormalizedIsPrecondition) {
  const auto H = tfim_1d(4, 1.0, 1.0);
  EXPECT_THROW(run_chebyshev(H, scale(Mps::random(4, 2, 1), 1.1), exact_cfg(3)), PreconditionError);
}

TEST(Moments, InvalidConfig) {
  const auto H = tfim_1d(4, 1.0, 1.0);
  ChebRunConfig cfg;
  cfg.chi_mps = 0;
  EXPECT_THROW(run_chebyshev(H, Mps::random(4, 2, 1), cfg), ParameterError);
  cfg.chi_mps = 4;
  cfg.n_max = 0;
  EXPECT_THROW(run_chebyshev(H, Mps::random(4, 2, 1), cfg), ParameterError);
}

TEST(Moments, TruncationBudgetWarnings) {
  const auto H = tfim_1d(10, 1.0, 1.0);
  ChebRunConfig cfg;
  cfg.chi_mps = 2;
  cfg.n_max = 10;
  cfg.overlap = 0.9;
  cfg.target_degree = 1000;
  DiagnosticsLog log;
  ChebRunHooks hooks;
  hooks.log = &log;
  run_chebyshev(H, Mps::random(10, 2, 5), cfg, hooks);
  EXPECT_EQ(log.count("trunc_budget"), 1u);
  EXPECT_GT(log.count("trunc_budget_exceeded"), 0u);
  EXPECT_NEAR(truncation_budget(0.9, 1000), 3 * M_PI * 0.81 / 16e9, 1e-24);
}

TEST(Checkpoint, ResumeIsBitIdentical) {
  const auto H = tfim_1d(8, 1.0, 1.0);
  const auto psi = Mps::random(8, 2, 21);
  ChebRunConfig cfg;
  cfg.chi_mps = 8;
  cfg.n_max = 24;
  cfg.checkpoint_every = 5;
  const auto full = run_chebyshev(H, psi, cfg);

  const auto dir = fresh_dir("chebgsee_ckpt_test");
  ChebRunHooks hooks;
  hooks.checkpoint_dir = dir;
  hooks.stop_after = 13;
  const auto partial = run_chebyshev(H, psi, cfg, hooks);
  EXPECT_EQ(partial.size(), 27u);
  ASSERT_TRUE(std::filesystem::exists(dir / "checkpoint.json"));

  hooks.stop_after.reset();
  hooks.resume = true;
  const auto resumed = run_chebyshev(H, psi, cfg, hooks);
  ASSERT_EQ(resumed.size(), full.size());
  for (std::size_t k = 0; k < full.size(); ++k) EXPECT_EQ(resumed.moments[k], full.moments[k]) << "k=" << k;
  EXPECT_EQ(resumed.trunc_errors, full.trunc_errors);
  EXPECT_EQ(resumed.cosine_errors, full.cosine_errors);

  ChebRunConfig other = cfg;
  other.chi_mps = 4;
  EXPECT_THROW(run_chebyshev(H, psi, other, hooks), ParameterError);
  std::filesystem::remove_all(dir);
}

TEST(Diagnostics, ConcurrentAppendAndCsv) {
  DiagnosticsLog log;
  std::vector<std::thread> writers;
  for (int t = 0; t < 4; ++t)
    writers.emplace_back([&log, t] {
      for (int i = 0; i < 250; ++i) log.append({"s", static_cast<std::size_t>(i), "k" + std::to_string(t), 1.0, ""});
    });
  std::size_t seen = 0;
  while (seen < 1000) seen = log.snapshot().size();
  for (auto& w : writers) w.join();
  EXPECT_EQ(log.size(), 1000u);
  EXPECT_EQ(log.count("k2"), 250u);
  std::ostringstream out;
  log.warn("gsee", 3, "note", 0.5, "has, comma");
  log.write_csv(out);
  EXPECT_NE(out.str().find("\"has, comma\""), std::string::npos);
}
