#include "daisy/closed_form.hpp"
#include "daisy/linalg.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace daisy;

namespace {

double db(double x) { return to_db(x); }

}  // namespace

TEST(TableParams, ZeroStep) {
  for (int k : {2, 5, 16}) {
    const auto p = table1_params(0.0, k);
    EXPECT_EQ(p.alpha, 1.0);
    EXPECT_EQ(p.beta, 0.0);
    EXPECT_EQ(p.nu, 1.0);
    EXPECT_EQ(p.eps, 1.0);
  }
}

TEST(TableParams, UnitStepK16) {
  const auto p = table1_params(1.0, 16);
  EXPECT_NEAR(p.alpha, 0.87867647058823528, 1e-15);
  EXPECT_NEAR(p.beta, 0.0036764705882352941, 1e-15);
  EXPECT_EQ(p.nu, 0.9375);
  EXPECT_EQ(p.eps, 0.9375);
}

TEST(TableParams, UnitStepK4) {
  const auto p = table1_params(1.0, 4);
  EXPECT_NEAR(p.alpha, 0.55, 1e-15);
  EXPECT_NEAR(p.beta, 0.05, 1e-15);
  EXPECT_EQ(p.nu, 0.75);
  EXPECT_EQ(p.eps, 0.75);
}

TEST(TableParams, SmallKRejected) { EXPECT_THROW(table1_params(1.0, 1), parameter_error); }

TEST(TableParams, AlphaPlusBetaKIsEps) {
  auto rng = gen::case_rng(17, 0);
  for (int i = 0; i < 200; ++i) {
    const int k = gen::uniform_int(rng, 2, 64);
    const double mu = gen::uniform_real(rng, 0.0, 2.0);
    const auto p = table1_params(mu, k);
    EXPECT_NEAR(p.alpha + p.beta * k, p.eps, 1e-14);
  }
}

TEST(AnalyticSir, LargeArrayAnchor) {
  const closed_form_inputs in{128, 16, 1.0, 0.0};
  EXPECT_NEAR(db(analytic_sir(in)), 36.1559642054, 1e-8);
  EXPECT_NEAR(db(analytic_sir_approx(in)), 34.7435585523, 1e-8);
  EXPECT_NEAR(std::round(db(analytic_sir(in)) * 10) / 10, 36.2, 1e-12);
  EXPECT_NEAR(std::round(db(analytic_sir_approx(in)) * 10) / 10, 34.7, 1e-12);
}

TEST(AnalyticSir, ApproximationErrorHalvesWithScale) {
  const double expected[] = {0.0390643, 0.0195029, 0.00972897};
  int i = 0;
  for (auto [m, k] : {std::pair{128, 16}, std::pair{256, 32}, std::pair{512, 64}}) {
    const closed_form_inputs in{m, k, 1.0, 0.0};
    const double exact = db(analytic_sir(in));
    const double approx = db(analytic_sir_approx(in));
    EXPECT_NEAR((exact - approx) / exact, expected[i++], 1e-6);
  }
}

TEST(AnalyticSir, SmallStepLimit) {
  // As mu -> 0 the exact form tends to ((M-1)(K+1) + 2K) / (K(K-1)).
  const closed_form_inputs in{128, 16, 1e-4, 0.0};
  const double limit = (127.0 * 17.0 + 32.0) / (16.0 * 15.0);
  EXPECT_NEAR(analytic_sir(in), 9.13636636054998, 1e-9);
  EXPECT_NEAR(analytic_sir(in) / limit, 1.0, 1e-3);
}

TEST(AnalyticSir, DomainErrors) {
  EXPECT_THROW(analytic_sir({128, 16, 0.0, 0.0}), parameter_error);
  EXPECT_THROW(analytic_sir({128, 16, 2.0, 0.0}), parameter_error);
  EXPECT_THROW(analytic_sir({128, 1, 1.0, 0.0}), parameter_error);
}

TEST(AnalyticSinr, ModerateStepAnchor) {
  const closed_form_inputs in{128, 16, 0.4, 1.0};
  const double exact = db(analytic_sinr(in));
  const double approx = db(analytic_sinr_approx(in));
  EXPECT_NEAR(exact, 16.6027221801, 1e-8);
  EXPECT_NEAR(approx, 16.6552568278, 1e-8);
  const double exact2 = std::round(exact * 100) / 100;
  const double approx2 = std::round(approx * 100) / 100;
  EXPECT_DOUBLE_EQ(exact2, 16.60);
  EXPECT_DOUBLE_EQ(approx2, 16.66);
  EXPECT_NEAR((approx2 - exact2) / exact2, 0.0036, 0.00005);
}

TEST(AnalyticSinr, NoiselessReducesToSir) {
  auto rng = gen::case_rng(23, 0);
  for (int i = 0; i < 100; ++i) {
    const auto d = gen::random_dims(rng, 512, 64);
    if (d.k < 2) continue;
    const double mu = gen::uniform_real(rng, 0.01, 1.99);
    const closed_form_inputs in{d.m, d.k, mu, 0.0};
    EXPECT_EQ(analytic_sinr(in), analytic_sir(in));
  }
}

TEST(AnalyticSinr, LowSnrLinearGrowth) {
  const double snr = from_db(-20.0);
  const int k = 16;
  const double mu = 0.5;
  const closed_form_inputs in{10000, k, mu, 1.0 / snr};
  EXPECT_NEAR(analytic_sinr_approx(in) / (snr * k * (2.0 - mu) / mu), 1.0, 0.01);
}

TEST(AnalyticSinr, NoiseTermFlattensInM) {
  const int k = 16;
  const double mu = 0.7;
  const auto p = table1_params(mu, k);
  const double z32 = analytic_noise_term({32, k, mu, 1.0});
  const double z128 = analytic_noise_term({128, k, mu, 1.0});
  EXPECT_GE(z128, z32);
  EXPECT_NEAR(z128 - z32, 1.0 / (k - 1.0) * mu / (2.0 - mu) * (std::pow(p.eps, 32) - std::pow(p.eps, 128)), 1e-14);
}

TEST(ExpectedWNorm, Values) {
  EXPECT_EQ(expected_w_norm({128, 16, 0.0, 0.0}), 0.0);
  EXPECT_NEAR(expected_w_norm({128, 16, 1.0, 0.0}), 1.06639102041, 1e-10);
  EXPECT_THROW(expected_w_norm({128, 16, 2.0, 0.0}), parameter_error);
  EXPECT_THROW(expected_w_norm({128, 16, -0.1, 0.0}), parameter_error);
}

TEST(ExpectedWNorm, MonotoneInStep) {
  for (auto [m, k] : {std::pair{32, 4}, std::pair{128, 16}, std::pair{64, 2}}) {
    double prev = -1.0;
    for (int i = 0; i < 400; ++i) {
      const double mu = i * 0.005;
      const double v = expected_w_norm({m, k, mu, 0.0});
      EXPECT_GT(v, prev) << mu;
      prev = v;
    }
  }
}

TEST(StepSize, Recommended) {
  EXPECT_NEAR(step_size_recommended(128, 16, 1.0), 0.389895289065, 1e-10);
  EXPECT_NEAR(step_size_recommended(128, 16, 100.0), 0.677718425689, 1e-10);
  EXPECT_THROW(step_size_recommended(128, 16, 1.0 / 512.0), parameter_error);
  double prev = 0.0;
  for (double db_snr = 0.0; db_snr <= 60.0; db_snr += 10.0) {
    const double mu0 = step_size_recommended(128, 16, from_db(db_snr));
    EXPECT_GT(mu0, prev);
    prev = mu0;
  }
}

TEST(StepSize, OptimalBeatsRecommended) {
  const double mu_star = step_size_optimal(128, 16, 1.0);
  const double mu0 = step_size_recommended(128, 16, 1.0);
  EXPECT_GE(analytic_sinr({128, 16, mu_star, 1.0}), analytic_sinr({128, 16, mu0, 1.0}));
}

TEST(StepSize, OptimalAtHighSnr) {
  const double mu_star = step_size_optimal(128, 16, 100.0);
  EXPECT_GT(mu_star, 0.6);
  EXPECT_LT(mu_star, 1.0);
  // Coarse grid oracle.
  double best = 0.0, best_mu = 0.0;
  for (int i = 1; i < 200; ++i) {
    const double v = analytic_sinr({128, 16, i * 0.01, 0.01});
    if (v > best) {
      best = v;
      best_mu = i * 0.01;
    }
  }
  EXPECT_NEAR(mu_star, best_mu, 0.01);
  EXPECT_GE(analytic_sinr({128, 16, mu_star, 0.01}), best * (1 - 1e-9));
}

TEST(StepSize, NoiselessOptimumIsUnity) {
  const double mu_star = step_size_optimal(128, 16, 1e12);
  EXPECT_NEAR(mu_star, 1.0, 1e-3);
  for (double mu : {0.5, 0.9, 1.1, 1.5})
    EXPECT_LT(analytic_sir_approx({128, 16, mu, 0.0}), analytic_sir_approx({128, 16, 1.0, 0.0}));
}

TEST(StepSize, OptimalIsGridMaximumProperty) {
  auto rng = gen::case_rng(31, 0);
  for (int i = 0; i < 20; ++i) {
    const int k = gen::uniform_int(rng, 2, 32);
    const int m = gen::uniform_int(rng, k, 512);
    const double snr = from_db(gen::uniform_real(rng, -10.0, 30.0));
    const double mu_star = step_size_optimal(m, k, snr);
    const double f_star = analytic_sinr({m, k, mu_star, 1.0 / snr});
    for (int g = 1; g < 199; ++g) EXPECT_GE(f_star, analytic_sinr({m, k, g * 0.01, 1.0 / snr}) * (1 - 1e-6));
  }
}
