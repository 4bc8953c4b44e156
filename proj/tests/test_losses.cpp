#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "colordet/error.hpp"
#include "colordet/losses.hpp"
#include "support/oracles.hpp"

using namespace colordet;
using colordet::testing::numeric_grad;

namespace {

using Vec = std::vector<double>;

double one(double (*f)(std::span<const double>, std::span<const double>, double, Reduction),
           double pred, double target, double beta) {
  const Vec p{pred}, t{target};
  return f(p, t, beta, Reduction::Mean);
}

/// Random probability rows bounded away from 0 so finite differences stay inside (0, 1].
Vec random_probs(std::mt19937& rng, std::size_t rows, std::size_t k) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Vec p(rows * k);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < k; ++c) s += p[r * k + c] = u(rng);
    for (std::size_t c = 0; c < k; ++c) p[r * k + c] /= s;
  }
  return p;
}

}  // namespace

TEST(Vcr, Examples) {
  const Vec a{0.3, -1.2}, b{0.3, -1.2};
  EXPECT_EQ(vcr_loss(a, b), 0.0);
  EXPECT_NEAR(one(vcr_loss, 0.0, 0.11, 0.11), 0.055, 1e-15);
  EXPECT_NEAR(one(vcr_loss, 0.0, -0.11, 0.11), 0.055, 1e-15);
  EXPECT_NEAR(one(vcr_loss, 0.0, 1.0, 0.11), 0.945, 1e-15);
}

TEST(Vcr, GradientExamples) {
  const Vec zero{0.0};
  EXPECT_EQ(vcr_loss_grad(zero, zero)[0], 0.0);
  const Vec target{0.055};
  EXPECT_NEAR(vcr_loss_grad(zero, target, 0.11)[0], -0.5, 1e-15);
  // At the knee the linear branch is used; both branches give -1 there.
  const Vec knee{0.11};
  EXPECT_EQ(vcr_loss_grad(zero, knee, 0.11)[0], -1.0);
}

TEST(Vcr, ContinuousAtKnee) {
  for (double beta : {0.11, 0.5, 1.0, 3.0}) {
    const double quad = 0.5 * beta * beta / beta;
    const double lin = beta - 0.5 * beta;
    EXPECT_NEAR(quad, lin, 1e-15);
    const double below = one(vcr_loss, 0.0, beta * (1 - 1e-12), beta);
    const double at = one(vcr_loss, 0.0, beta, beta);
    EXPECT_NEAR(below, at, 1e-9);
    const Vec z{0.0}, lo{beta * (1 - 1e-12)}, hi{beta};
    EXPECT_NEAR(vcr_loss_grad(z, lo, beta)[0], vcr_loss_grad(z, hi, beta)[0], 1e-9);
  }
}

TEST(Vcr, BetaOneIsSmoothL1) {
  std::mt19937 rng(1);
  std::normal_distribution<double> n(0, 2);
  for (int i = 0; i < 500; ++i) {
    const Vec p{n(rng), n(rng), n(rng)}, t{n(rng), n(rng), n(rng)};
    EXPECT_EQ(vcr_loss(p, t, 1.0), smooth_l1_loss(p, t));
    EXPECT_EQ(vcr_loss_grad(p, t, 1.0), smooth_l1_loss_grad(p, t));
  }
}

TEST(Vcr, SmallBetaApproachesAbs) {
  for (double d : {-2.0, -0.3, 0.01, 0.7}) EXPECT_NEAR(one(vcr_loss, 0.0, d, 1e-6), std::abs(d), 1e-5);
}

TEST(Vcr, KneeShiftIsAffineInLinearRegion) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> beta(0.01, 1.0), extra(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double b1 = beta(rng), b2 = beta(rng);
    const double lo = std::min(b1, b2), hi = std::max(b1, b2);
    const double d = (rng() % 2 ? 1 : -1) * (hi + extra(rng));
    EXPECT_NEAR(one(vcr_loss, 0.0, d, lo) - one(vcr_loss, 0.0, d, hi), 0.5 * (hi - lo), 1e-12);
  }
}

TEST(Regression, NonNegativeAndZeroIffEqual) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 300; ++i) {
    const Vec p{n(rng), n(rng)}, t{n(rng), n(rng)};
    for (double v : {vcr_loss(p, t), smooth_l1_loss(p, t), l1_loss(p, t), mse_loss(p, t)})
      EXPECT_GT(v, 0.0);
    for (double v : {vcr_loss(p, p), smooth_l1_loss(p, p), l1_loss(p, p), mse_loss(p, p)})
      EXPECT_EQ(v, 0.0);
  }
  const Vec z{0.0}, h{0.5};
  EXPECT_EQ(l1_loss(z, h), 0.5);
  EXPECT_EQ(mse_loss(h, h), 0.0);
}

TEST(Regression, ReductionSumVsMean) {
  const Vec p{0, 0, 0, 0}, t{1, -2, 0.05, 0.5};
  EXPECT_NEAR(vcr_loss(p, t, 0.11, Reduction::Sum), 4 * vcr_loss(p, t), 1e-12);
  EXPECT_NEAR(mse_loss(p, t, Reduction::Sum), 4 * mse_loss(p, t), 1e-12);
}

TEST(Regression, Errors) {
  const Vec a{1, 2}, b{1};
  EXPECT_THROW(vcr_loss(a, b), InvalidInput);
  EXPECT_THROW(vcr_loss(a, a, 0.0), InvalidInput);
  EXPECT_THROW(vcr_loss(a, a, -1.0), InvalidInput);
  EXPECT_THROW(vcr_loss(Vec{}, Vec{}), InvalidInput);
  EXPECT_THROW(mse_loss_grad(a, b), InvalidInput);
}

TEST(Gradients, RegressionMatchFiniteDifferences) {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> v(-2, 2), beta(0.05, 1.5);
  std::uniform_int_distribution<int> len(1, 6);
  int checked = 0;
  while (checked < 1000) {
    const std::size_t n = len(rng);
    Vec p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = v(rng);
      t[i] = v(rng);
    }
    const double b = beta(rng);
    // Skip points whose residual sits within h of the L1 kink.
    bool near_kink = false;
    for (std::size_t i = 0; i < n; ++i) near_kink |= std::abs(t[i] - p[i]) < 1e-4;
    if (near_kink) continue;
    const Reduction red = checked % 2 ? Reduction::Sum : Reduction::Mean;
    const std::vector<std::pair<std::function<double(const Vec&)>, Vec>> cases = {
        {[&](const Vec& x) { return vcr_loss(x, t, b, red); }, vcr_loss_grad(p, t, b, red)},
        {[&](const Vec& x) { return smooth_l1_loss(x, t, 1.0, red); },
         smooth_l1_loss_grad(p, t, 1.0, red)},
        {[&](const Vec& x) { return l1_loss(x, t, red); }, l1_loss_grad(p, t, red)},
        {[&](const Vec& x) { return mse_loss(x, t, red); }, mse_loss_grad(p, t, red)},
    };
    for (const auto& [f, analytic] : cases) {
      const Vec numeric = numeric_grad(f, p);
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(analytic[i], numeric[i], 1e-5);
    }
    ++checked;
  }
}

TEST(Gradients, ClassificationMatchFiniteDifferences) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> rows(1, 4), classes(2, 5);
  std::uniform_real_distribution<double> gamma(0.0, 3.0), alpha(0.1, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t r = rows(rng), k = classes(rng);
    const Vec p = random_probs(rng, r, k);
    std::vector<int> labels(r);
    for (auto& l : labels) l = static_cast<int>(rng() % k);
    const double g = gamma(rng), a = alpha(rng);
    const Reduction red = trial % 2 ? Reduction::Sum : Reduction::Mean;
    const Vec ce = cross_entropy_loss_grad(p, k, labels, red);
    const Vec ce_num =
        numeric_grad([&](const Vec& x) { return cross_entropy_loss(x, k, labels, red); }, p);
    const Vec fo = focal_loss_grad(p, k, labels, g, a, red);
    const Vec fo_num =
        numeric_grad([&](const Vec& x) { return focal_loss(x, k, labels, g, a, red); }, p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      ASSERT_NEAR(ce[i], ce_num[i], 1e-5) << trial;
      ASSERT_NEAR(fo[i], fo_num[i], 1e-5) << trial;
    }
  }
}

TEST(Focal, Examples) {
  const Vec certain{1.0, 0.0};
  const std::vector<int> label{0};
  EXPECT_EQ(focal_loss(certain, 2, label), 0.0);
  const Vec half{0.5, 0.5};
  EXPECT_NEAR(focal_loss(half, 2, label, 2.0, 1.0), 0.25 * std::log(2.0), 1e-15);
  EXPECT_NEAR(focal_loss(half, 2, label, 2.0, 1.0), 0.1733, 5e-5);
  EXPECT_NEAR(cross_entropy_loss(half, 2, label), std::log(2.0), 1e-15);
}

TEST(Classification, RejectsBadProbabilities) {
  const std::vector<int> label{0};
  const Vec zero{0.0, 1.0}, over{1.5, -0.5};
  EXPECT_THROW(cross_entropy_loss(zero, 2, label), InvalidInput);
  EXPECT_THROW(focal_loss(over, 2, label), InvalidInput);
  const std::vector<int> bad_label{2};
  const Vec ok{0.5, 0.5};
  EXPECT_THROW(cross_entropy_loss(ok, 2, bad_label), InvalidInput);
}

TEST(Softmax, RowsSumToOne) {
  const Vec logits{1000.0, 1001.0, 1002.0, -1, 0, 1};
  const Vec p = softmax(logits, 3);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
  EXPECT_NEAR(p[3] + p[4] + p[5], 1.0, 1e-12);
  EXPECT_NEAR(p[0], p[3], 1e-12);
}

TEST(Config, Dispatch) {
  EXPECT_EQ(LossConfig::for_kind(LossKind::Vcr).beta, 0.11);
  EXPECT_EQ(LossConfig::for_kind(LossKind::SmoothL1).beta, 1.0);
  for (auto k : {LossKind::Vcr, LossKind::SmoothL1, LossKind::L1, LossKind::Mse,
                 LossKind::CrossEntropy, LossKind::Focal})
    EXPECT_EQ(parse_loss_kind(loss_kind_name(k)), k);
  EXPECT_THROW(parse_loss_kind("hinge"), InvalidInput);

  const Vec p{0.0}, t{1.0};
  EXPECT_EQ(baseline_loss(LossConfig::for_kind(LossKind::Vcr), p, t), vcr_loss(p, t));
  EXPECT_EQ(baseline_loss(LossConfig::for_kind(LossKind::SmoothL1), p, t), 0.5);
  EXPECT_THROW(baseline_loss(LossConfig::for_kind(LossKind::CrossEntropy), p, t), InvalidInput);
  const Vec probs{0.5, 0.5};
  const std::vector<int> label{1};
  EXPECT_THROW(baseline_loss(LossConfig::for_kind(LossKind::Mse), probs, 2, label), InvalidInput);
  EXPECT_NEAR(baseline_loss(LossConfig::for_kind(LossKind::Focal), probs, 2, label),
              0.25 * 0.25 * std::log(2.0), 1e-15);
}
