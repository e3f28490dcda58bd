#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "htl/bounds.hpp"
#include "htl/errors.hpp"
#include "htl/rng.hpp"

using namespace htl;

namespace {

bound_context make_ctx(double kappa, double lambda, std::size_t n,
                       double source_risk, double m_s,
                       double source_risk_train = -1.0) {
  bound_context ctx;
  ctx.kappa = kappa;
  ctx.lambda = lambda;
  ctx.n = n;
  ctx.source_risk = source_risk;
  ctx.source_risk_train =
      source_risk_train >= 0.0 ? source_risk_train : source_risk;
  ctx.m_s = m_s;
  ctx.s = 0.1;
  return ctx;
}

}  // namespace

TEST_CASE("radius") {
  CHECK(radius(make_ctx(1.0, 1.0, 10, 0.5, 1.0, 0.0)) == 0.0);
  CHECK(radius(make_ctx(1.0, 1.0, 10, 0.5, 1.0, 0.25)) ==
        doctest::Approx(0.5).epsilon(1e-12));
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.1, 0.5, 1.0, 5.0, 25.0}) {
    const double r = radius(make_ctx(1.0, lambda, 10, 0.5, 1.0, 0.3));
    CHECK(r <= prev);
    prev = r;
  }
}

TEST_CASE("per-index radii") {
  SUBCASE("constant per-sample loss") {
    const double c = 0.36;
    const bound_context ctx = make_ctx(2.0, 1.0, 4, c, 1.0, c);
    const loo_radii rad = radius_loo(ctx, {c, c, c, c});
    for (double r : rad.r)
      CHECK(r == doctest::Approx(std::sqrt(2.0 * c)).epsilon(1e-12));
  }
  SUBCASE("tau dominates rho when m_s bounds the per-sample losses") {
    rng64 rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> losses(6);
      double worst = 0.0;
      for (auto& v : losses) {
        v = 2.0 * rng.uniform01();
        worst = std::max(worst, v);
      }
      double mean = 0.0;
      for (double v : losses) mean += v / 6.0;
      const bound_context ctx = make_ctx(1.5, 0.7, 6, mean, worst, mean);
      const loo_radii rad = radius_loo(ctx, losses);
      for (std::size_t i = 0; i < losses.size(); ++i)
        CHECK(rad.tau[i] >= rad.rho[i] - 1e-12);
    }
  }
  SUBCASE("zero m_s collapses tau onto r") {
    const bound_context ctx = make_ctx(1.0, 1.0, 3, 0.4, 0.0, 0.4);
    const loo_radii rad = radius_loo(ctx, {0.1, 0.4, 0.7});
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(rad.tau[i] == doctest::Approx(rad.r[i]).epsilon(1e-12));
  }
}

TEST_CASE("beta bound") {
  SUBCASE("logistic cap regime") {
    const bound_context ctx = make_ctx(2.0, 1.0, 100, 1e6, 1.0);
    CHECK(beta_bound(loss_spec::logistic(), ctx) ==
          doctest::Approx(0.02).epsilon(1e-12));
  }
  SUBCASE("zero source risk zeroes every loss") {
    const bound_context ctx = make_ctx(1.0, 1.0, 50, 0.0, 1.0);
    const loss_spec all[] = {loss_spec::exponential(), loss_spec::logistic(),
                             loss_spec::mse(), loss_spec::squared_hinge(),
                             loss_spec::softplus(0.1)};
    for (const auto& loss : all) CHECK(beta_bound(loss, ctx) == 0.0);
  }
  SUBCASE("mse hand value") {
    const bound_context ctx = make_ctx(2.0, 1.0, 100, 0.25, 1.0);
    CHECK(beta_bound(loss_spec::mse(), ctx) ==
          doctest::Approx(0.36).epsilon(1e-12));
  }
}

TEST_CASE("gamma bound") {
  SUBCASE("zero risk") {
    CHECK(gamma_bound(loss_spec::exponential(),
                      make_ctx(1.0, 1.0, 30, 0.0, 1.0)) == 0.0);
  }
  SUBCASE("softplus cap for huge source risk") {
    const bound_context ctx = make_ctx(3.0, 1.0, 60, 1e9, 1.0);
    CHECK(gamma_bound(loss_spec::softplus(0.1), ctx) ==
          doctest::Approx(3.0 / 60.0).epsilon(1e-12));
  }
  SUBCASE("exponential hand value") {
    const std::size_t n = 100;
    const bound_context ctx = make_ctx(1.0, 1.0, n, 0.1, 1.0);
    const double c = std::exp(2.0 + 2.0 / 100.0 + 4.0 / 99.0);
    CHECK(gamma_bound(loss_spec::exponential(), ctx) ==
          doctest::Approx(1.0 * c * 1.0 * 0.1 * std::exp(0.2) / 100.0)
              .epsilon(1e-12));
  }
}

TEST_CASE("moment constant c_s") {
  CHECK(c_s(make_ctx(1.0, 1.0, 10, 0.1, 0.0)) ==
        doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  CHECK(c_s(make_ctx(1.0, 1.0, 101, 0.1, 1.0)) ==
        doctest::Approx(std::exp(2.0 + 2.0 / 101.0 + 4.0 / 100.0))
            .epsilon(1e-12));
  CHECK(c_s(make_ctx(1.0, 1.0, 101, 0.1, 1.0)) ==
        doctest::Approx(7.8446).epsilon(1e-4));
  rng64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const bound_context ctx =
        make_ctx(0.1 + 3.0 * rng.uniform01(), 0.1 + rng.uniform01(),
                 2 + static_cast<std::size_t>(rng.uniform01() * 100),
                 rng.uniform01(), 2.0 * rng.uniform01());
    CHECK(c_s(ctx) >= std::exp(2.0));
  }
}

TEST_CASE("generalization gap bound") {
  SUBCASE("zero risk") {
    CHECK(gen_gap_bound(loss_spec::logistic(),
                        make_ctx(1.0, 1.0, 40, 0.0, 1.0)) == 0.0);
  }
  SUBCASE("logistic cap regime: 2 alpha / n") {
    const bound_context ctx = make_ctx(2.0, 1.0, 100, 1e6, 1.0);
    CHECK(gen_gap_bound(loss_spec::logistic(), ctx) ==
          doctest::Approx(0.04).epsilon(1e-12));
  }
  SUBCASE("equals beta + gamma when no cap binds") {
    const bound_context ctx = make_ctx(2.0, 1.0, 100, 0.25, 1.0);
    CHECK(gen_gap_bound(loss_spec::mse(), ctx) ==
          doctest::Approx(beta_bound(loss_spec::mse(), ctx) +
                          gamma_bound(loss_spec::mse(), ctx))
              .epsilon(1e-12));
  }
  SUBCASE("never exceeds beta + gamma") {
    rng64 rng(7);
    const loss_spec all[] = {loss_spec::exponential(), loss_spec::logistic(),
                             loss_spec::mse(), loss_spec::squared_hinge(),
                             loss_spec::softplus(0.1)};
    for (int rep = 0; rep < 100; ++rep) {
      const bound_context ctx =
          make_ctx(0.2 + 2.0 * rng.uniform01(), 0.2 + rng.uniform01(),
                   5 + static_cast<std::size_t>(rng.uniform01() * 200),
                   2.0 * rng.uniform01(), rng.uniform01());
      for (const auto& loss : all)
        CHECK(gen_gap_bound(loss, ctx) <=
              beta_bound(loss, ctx) + gamma_bound(loss, ctx) + 1e-12);
    }
  }
}

TEST_CASE("stability bounds shrink with n and grow with the source risk") {
  const loss_spec all[] = {loss_spec::exponential(), loss_spec::logistic(),
                           loss_spec::mse(), loss_spec::squared_hinge(),
                           loss_spec::softplus(0.1)};
  for (const auto& loss : all) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {10, 20, 40, 80, 160}) {
      const double b = beta_bound(loss, make_ctx(1.0, 1.0, n, 0.3, 1.0));
      CHECK(b <= prev + 1e-15);
      prev = b;
    }
    prev = -1.0;
    for (double risk : {0.0, 0.1, 0.3, 0.9, 2.7}) {
      const double b = beta_bound(loss, make_ctx(1.0, 1.0, 50, risk, 1.0));
      CHECK(b >= prev - 1e-15);
      prev = b;
    }
  }
  // cap dominance for the bounded-slope losses
  for (double risk : {0.0, 0.5, 5.0, 500.0}) {
    const bound_context ctx = make_ctx(2.0, 0.5, 25, risk, 1.0);
    CHECK(beta_bound(loss_spec::logistic(), ctx) <= ctx.alpha() / 25.0 + 1e-15);
    CHECK(beta_bound(loss_spec::softplus(0.1), ctx) <=
          ctx.alpha() / 25.0 + 1e-15);
  }
}

TEST_CASE("excess-risk lambda schedules") {
  SUBCASE("quadratic losses") {
    const lambda_schedule s =
        excess_lambda_schedule(loss_spec::mse(), 10000, 0.04, 1.0, 0.0);
    CHECK(s.lambda == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(s.rate_label == "sqrt(R/sqrt n)");
    // degenerate zero risk falls back to the safe schedule
    const lambda_schedule z =
        excess_lambda_schedule(loss_spec::squared_hinge(), 100, 0.0, 1.0, 0.0);
    CHECK(z.lambda == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("logistic default is 1/sqrt n") {
    for (std::size_t n : {4, 100, 10000}) {
      const lambda_schedule s =
          excess_lambda_schedule(loss_spec::logistic(), n, 0.9, 1.0, 0.0);
      CHECK(s.lambda ==
            doctest::Approx(1.0 / std::sqrt(static_cast<double>(n)))
                .epsilon(1e-12));
      CHECK(s.rate_label == "1/sqrt n");
    }
  }
  SUBCASE("logistic small-risk improvement") {
    // n = 100, R = 0.05 <= 0.1: lambda = 8 / sqrt(-100 ln 0.05)
    const lambda_schedule s =
        excess_lambda_schedule(loss_spec::logistic(), 100, 0.05, 1.0, 0.0);
    CHECK(s.lambda ==
          doctest::Approx(8.0 / std::sqrt(-100.0 * std::log(0.05)))
              .epsilon(1e-12));
    CHECK(s.lambda == doctest::Approx(0.46221).epsilon(1e-4));
    CHECK(s.rate_label == "1/sqrt(-n ln R)");
  }
  SUBCASE("softplus needs a cooperative temperature") {
    // 1/s = 10 <= -ln R requires R <= e^{-10}
    const double risk_ok = 4e-5;   // below e^{-10} ~ 4.54e-5
    const double risk_bad = 1e-3;  // above it
    const lambda_schedule ok = excess_lambda_schedule(
        loss_spec::softplus(0.1), 10000, risk_ok, 1.0, 0.1);
    CHECK(ok.rate_label == "1/sqrt(-n ln R)");
    const lambda_schedule bad = excess_lambda_schedule(
        loss_spec::softplus(0.1), 10000, risk_bad, 1.0, 0.1);
    CHECK(bad.rate_label == "1/sqrt n");
  }
  SUBCASE("exponential branch condition checked at the given n") {
    // n = 55, m_s = 1, R = 0.5: 55 >= ln(55)^2 / 0.5 ~ 32.1 holds
    const lambda_schedule s =
        excess_lambda_schedule(loss_spec::exponential(), 55, 0.5, 1.0, 0.0);
    CHECK(s.lambda ==
          doctest::Approx(4.0 * std::sqrt(0.5) / std::log(55.0))
              .epsilon(1e-12));
    CHECK(s.lambda == doctest::Approx(0.70581).epsilon(1e-4));
    CHECK(s.rate_label == "(sqrt R min 1)/ln n");
    // tiny risk pushes the condition out of reach
    const lambda_schedule fallback =
        excess_lambda_schedule(loss_spec::exponential(), 55, 1e-6, 1.0, 0.0);
    const double log55 = std::log(55.0);
    CHECK(fallback.lambda ==
          doctest::Approx(log55 * log55 / std::sqrt(55.0)).epsilon(1e-12));
    CHECK(fallback.rate_label == "ln^2 n/sqrt n");
  }
  SUBCASE("every loss yields a label") {
    const loss_spec all[] = {loss_spec::exponential(), loss_spec::logistic(),
                             loss_spec::mse(), loss_spec::squared_hinge(),
                             loss_spec::softplus(0.1)};
    for (const auto& loss : all) {
      const lambda_schedule s =
          excess_lambda_schedule(loss, 200, 0.3, 1.0, 0.1);
      CHECK(!s.rate_label.empty());
      CHECK(s.lambda > 0.0);
    }
  }
}

TEST_CASE("loss bound estimate") {
  dataset pooled;
  pooled.features.resize(3, 1);
  pooled.features << 1.0, -2.0, 0.5;
  pooled.labels.resize(3);
  pooled.labels << 1.0, -1.0, 1.0;

  SUBCASE("analytic when the sup-norm is known") {
    const source_hypothesis src = source_hypothesis::constant(0.7);
    CHECK(estimate_loss_bound(loss_spec::logistic(), src, pooled) ==
          doctest::Approx(std::log(1.0 + std::exp(0.7))).epsilon(1e-12));
    CHECK(estimate_loss_bound(loss_spec::mse(), src, pooled) ==
          doctest::Approx((1.0 + 0.7) * (1.0 + 0.7)).epsilon(1e-12));
  }
  SUBCASE("exponential always measures the data") {
    const source_hypothesis src = source_hypothesis::constant(0.7);
    // margins: 0.7, -0.7, 0.7 -> max loss e^{0.7}
    CHECK(estimate_loss_bound(loss_spec::exponential(), src, pooled) ==
          doctest::Approx(1.1 * std::exp(0.7)).epsilon(1e-12));
  }
  SUBCASE("unhinted linear source measures the data") {
    Eigen::VectorXd w(1);
    w << 1.0;
    const source_hypothesis src = source_hypothesis::linear(w);
    // margins: 1, 2, 0.5 -> max logistic loss at margin 0.5
    CHECK(estimate_loss_bound(loss_spec::logistic(), src, pooled) ==
          doctest::Approx(1.1 * std::log(1.0 + std::exp(-0.5)))
              .epsilon(1e-12));
  }
}

TEST_CASE("bound context assembly") {
  dataset train;
  train.features.resize(4, 1);
  train.features << 1.0, -1.0, 2.0, -2.0;
  train.labels.resize(4);
  train.labels << 1.0, -1.0, 1.0, -1.0;
  dataset test = train;

  const bound_context ctx =
      make_bound_context(loss_spec::logistic(), kernel_spec::gaussian(1.0),
                         0.5, train, test, source_hypothesis::constant(0.2));
  CHECK(ctx.kappa == 1.0);
  CHECK(ctx.alpha() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ctx.n == 4);
  CHECK(ctx.source_risk == doctest::Approx(ctx.source_risk_train));
  CHECK(ctx.source_risk > 0.0);
  CHECK(ctx.m_s >= ctx.source_risk);

  const Eigen::VectorXd scores =
      source_hypothesis::constant(0.2).scores(train.features);
  std::vector<double> losses;
  for (Eigen::Index i = 0; i < 4; ++i)
    losses.push_back(loss_value(loss_spec::logistic(),
                                scores[i] * train.labels[i]));
  const stability_bound_report report =
      build_report(loss_spec::logistic(), ctx, losses);
  CHECK(report.gen_gap <= report.beta + report.gamma + 1e-12);
  CHECK(report.radius == doctest::Approx(radius(ctx)));
  CHECK(report.radius_loo.r.size() == 4);
  CHECK(!report.excess_schedule.rate_label.empty());
}
