#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "htl/dataset.hpp"
#include "htl/errors.hpp"
#include "htl/rerm.hpp"
#include "htl/risk.hpp"
#include "htl/rng.hpp"
#include "htl/source.hpp"

using namespace htl;

namespace {

dataset toy_two_points() {
  // x1 = 1 with label +1, x2 = 2 with label -1
  dataset d;
  d.features.resize(2, 1);
  d.features << 1.0, 2.0;
  d.labels.resize(2);
  d.labels << 1.0, -1.0;
  return d;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() /
         (std::string("htl_test_") + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("dataset validation") {
  dataset d = toy_two_points();
  CHECK_NOTHROW(d.validate());
  d.labels[0] = 0.5;
  CHECK_THROWS_AS(d.validate(), config_error);
  d = toy_two_points();
  d.features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(d.validate(), config_error);
  CHECK_THROWS_AS(dataset{}.validate(), config_error);
}

TEST_CASE("dataset csv round-trip") {
  rng64 rng(1);
  dataset d;
  d.features.resize(7, 3);
  for (Eigen::Index i = 0; i < 7; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      d.features(i, j) = 10.0 * (rng.uniform01() - 0.5) / 3.0;
  d.labels.resize(7);
  for (Eigen::Index i = 0; i < 7; ++i)
    d.labels[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;

  const auto path = temp_file("roundtrip.csv");
  write_dataset_csv(d, path.string());
  const dataset back = read_dataset_csv(path.string());
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  std::filesystem::remove(path);
}

TEST_CASE("dataset csv error paths") {
  CHECK_THROWS_AS(read_dataset_csv("/nonexistent/nowhere.csv"), io_error);

  const auto path = temp_file("corrupt.csv");
  {
    std::ofstream out(path);
    out << "x1,label\n1.0,abc\n";
  }
  CHECK_THROWS_AS(read_dataset_csv(path.string()), io_error);
  {
    std::ofstream out(path);
    out << "x1,label\n1.0,0.5\n";  // label outside {-1, 1}
  }
  CHECK_THROWS_AS(read_dataset_csv(path.string()), io_error);
  std::filesystem::remove(path);
}

TEST_CASE("predict_score") {
  SUBCASE("zero correction leaves the source") {
    fitted_model m;
    m.coeffs = Eigen::VectorXd::Zero(2);
    m.train_features = toy_two_points().features;
    m.gram = gram(kernel_spec::linear(), m.train_features);
    m.kernel = kernel_spec::linear();
    m.source = source_hypothesis::constant(0.7);
    Eigen::VectorXd x(1);
    x << 5.0;
    CHECK(m.predict_score(x) == doctest::Approx(0.7));
  }
  SUBCASE("single linear support point") {
    fitted_model m;
    m.coeffs = Eigen::VectorXd::Constant(1, 0.5);
    m.train_features.resize(1, 1);
    m.train_features << 1.0;
    m.gram = gram(kernel_spec::linear(), m.train_features);
    m.kernel = kernel_spec::linear();
    m.source = source_hypothesis::constant(0.0);
    Eigen::VectorXd x(1);
    x << 2.0;
    CHECK(m.predict_score(x) == doctest::Approx(1.0));
  }
  SUBCASE("training-point prediction equals the gram-row sum") {
    rng64 rng(8);
    dataset d;
    d.features.resize(6, 2);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        d.features(i, j) = 2.0 * rng.uniform01() - 1.0;
    d.labels = Eigen::VectorXd::Ones(6);

    fitted_model m;
    m.kernel = kernel_spec::gaussian(0.9);
    m.train_features = d.features;
    m.gram = gram(m.kernel, d.features);
    m.coeffs.resize(6);
    for (Eigen::Index i = 0; i < 6; ++i)
      m.coeffs[i] = rng.uniform01() - 0.5;
    m.source = source_hypothesis::constant(0.25);

    for (Eigen::Index i = 0; i < 6; ++i) {
      const double expected = m.gram.row(i).dot(m.coeffs) + 0.25;
      CHECK(m.predict_score(d.features.row(i)) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("dimension mismatch") {
    fitted_model m;
    m.coeffs = Eigen::VectorXd::Zero(1);
    m.train_features.resize(1, 2);
    m.train_features << 0.0, 0.0;
    m.kernel = kernel_spec::linear();
    m.source = source_hypothesis::constant(0.0);
    Eigen::VectorXd x(3);
    x << 1, 2, 3;
    CHECK_THROWS_AS(m.predict_score(x), config_error);
  }
}

TEST_CASE("empirical risk") {
  SUBCASE("perfect mse fit") {
    Eigen::VectorXd scores(3), labels(3);
    scores << 1, -1, 1;
    labels << 1, -1, 1;
    CHECK(empirical_risk(scores, labels, loss_spec::mse()) == 0.0);
  }
  SUBCASE("zero scores under the logistic loss") {
    Eigen::VectorXd scores = Eigen::VectorXd::Zero(5);
    Eigen::VectorXd labels(5);
    labels << 1, -1, 1, 1, -1;
    CHECK(empirical_risk(scores, labels, loss_spec::logistic()) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("two-point exponential hand sum") {
    Eigen::VectorXd scores(2), labels(2);
    scores << 0.0, std::log(2.0);
    labels << 1.0, 1.0;
    CHECK(empirical_risk(scores, labels, loss_spec::exponential()) ==
          doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("empirical risk with one sample deleted") {
  const loss_spec mse = loss_spec::mse();
  SUBCASE("n=2 keeps the other sample") {
    Eigen::VectorXd scores(2), labels(2);
    // margins chosen so the per-sample losses are 0.2 and 0.6
    scores << 1.0 - std::sqrt(0.2), 1.0 - std::sqrt(0.6);
    labels << 1.0, 1.0;
    CHECK(empirical_risk_minus_i(scores, labels, mse, 0) ==
          doctest::Approx(0.6).epsilon(1e-12));
    CHECK(empirical_risk_minus_i(scores, labels, mse, 1) ==
          doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("constant per-sample loss is unchanged") {
    Eigen::VectorXd scores = Eigen::VectorXd::Constant(4, 0.3);
    Eigen::VectorXd labels = Eigen::VectorXd::Ones(4);
    const double c = loss_value(mse, 0.3);
    for (Eigen::Index i = 0; i < 4; ++i)
      CHECK(empirical_risk_minus_i(scores, labels, mse, i) ==
            doctest::Approx(c).epsilon(1e-12));
  }
  SUBCASE("n=3 hand value") {
    Eigen::VectorXd scores(3), labels(3);
    // losses 0, 1, 2
    scores << 1.0, 0.0, 1.0 - std::sqrt(2.0);
    labels << 1.0, 1.0, 1.0;
    CHECK(empirical_risk_minus_i(scores, labels, mse, 2) ==
          doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("degenerate dataset") {
    Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    CHECK_THROWS_AS(empirical_risk_minus_i(one, one, mse, 0), config_error);
  }
}

TEST_CASE("scale_score") {
  SUBCASE("zero source stays zero") {
    const source_hypothesis zero = source_hypothesis::constant(0.0);
    const source_hypothesis scaled = scale_score(zero, 2.0);
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(scaled.score(x) == 0.0);
  }
  SUBCASE("sup-norm point maps to 0.99 of the bound") {
    Eigen::VectorXd w(1);
    w << 1.0;
    const source_hypothesis src = source_hypothesis::linear(w, 3.0);
    const source_hypothesis scaled = scale_score(src, 5.0);
    Eigen::VectorXd x(1);
    x << 3.0;  // score = sup-norm hint
    CHECK(scaled.score(x) == doctest::Approx(0.99 * 5.0).epsilon(1e-12));
    x << -3.0;
    CHECK(scaled.score(x) == doctest::Approx(-0.99 * 5.0).epsilon(1e-12));
  }
  SUBCASE("monotone and sign preserving") {
    Eigen::VectorXd w(1);
    w << 2.0;
    const source_hypothesis src = source_hypothesis::linear(w, 10.0);
    const source_hypothesis scaled = scale_score(src, 1.0);
    double prev = -2.0;
    for (double t = -4.0; t <= 4.0; t += 0.25) {
      Eigen::VectorXd x(1);
      x << t;
      const double v = scaled.score(x);
      CHECK(v > prev);
      CHECK(std::abs(v) <= 1.0);
      if (t != 0.0)
        CHECK(v * src.score(x) > 0.0);
      prev = v;
    }
  }
  SUBCASE("needs a sup-norm or a sample") {
    Eigen::VectorXd w(1);
    w << 1.0;
    const source_hypothesis src = source_hypothesis::linear(w);
    CHECK_THROWS_AS(scale_score(src, 1.0), config_error);
    Eigen::MatrixXd sample(2, 1);
    sample << 1.0, -4.0;
    const source_hypothesis scaled = scale_score(src, 1.0, &sample);
    Eigen::VectorXd x(1);
    x << -4.0;
    CHECK(scaled.score(x) == doctest::Approx(-0.99).epsilon(1e-12));
  }
}

TEST_CASE("loo risk") {
  SUBCASE("perfect source forces a zero correction on every fold") {
    dataset d;
    d.features.resize(4, 1);
    d.features << 1.0, -1.0, 1.0, -1.0;
    d.labels.resize(4);
    d.labels << 1.0, -1.0, 1.0, -1.0;
    Eigen::VectorXd w(1);
    w << 1.0;  // w.x = y on these points
    const source_hypothesis src = source_hypothesis::linear(w);
    const double risk = loo_risk(d, loss_spec::mse(), kernel_spec::linear(),
                                 1.0, src, {});
    CHECK(risk == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("n=2 linear mse toy against fold-wise ridge") {
    // The deleted objective keeps the divisor n = 2, so each fold solves the
    // one-point ridge with effective lambda' = lambda * n / (n - 1) = 2:
    //   without sample 0: u = 2*(-1)/(4 + 2) = -1/3, loss (1 + 1/3)^2 = 16/9
    //   without sample 1: u = 1*1/(1 + 2) = 1/3, loss (1 + 2/3)^2 = 25/9
    const dataset d = toy_two_points();
    const double risk =
        loo_risk(d, loss_spec::mse(), kernel_spec::linear(), 1.0,
                 source_hypothesis::constant(0.0), {});
    CHECK(risk == doctest::Approx(41.0 / 18.0).epsilon(1e-6));

    // same numbers via the ridge oracle on each fold
    dataset fold0;
    fold0.features.resize(1, 1);
    fold0.features << 2.0;
    fold0.labels.resize(1);
    fold0.labels << -1.0;
    const double u0 =
        ridge_oracle(fold0, 2.0, Eigen::VectorXd::Zero(1))[0];
    CHECK(u0 == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    const double loss0 = loss_value(loss_spec::mse(), u0 * 1.0 * 1.0);
    dataset fold1;
    fold1.features.resize(1, 1);
    fold1.features << 1.0;
    fold1.labels.resize(1);
    fold1.labels << 1.0;
    const double u1 =
        ridge_oracle(fold1, 2.0, Eigen::VectorXd::Zero(1))[0];
    const double loss1 = loss_value(loss_spec::mse(), u1 * 2.0 * -1.0);
    CHECK(risk == doctest::Approx((loss0 + loss1) / 2.0).epsilon(1e-6));
  }
  SUBCASE("non-negative and thread-count independent") {
    rng64 rng(77);
    dataset d;
    d.features.resize(10, 2);
    for (Eigen::Index i = 0; i < 10; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        d.features(i, j) = 2.0 * rng.uniform01() - 1.0;
    d.labels.resize(10);
    for (Eigen::Index i = 0; i < 10; ++i)
      d.labels[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    const source_hypothesis src = source_hypothesis::constant(0.1);
    const double serial = loo_risk(d, loss_spec::logistic(),
                                   kernel_spec::gaussian(0.5), 0.5, src, {});
    const double parallel = loo_risk(d, loss_spec::logistic(),
                                     kernel_spec::gaussian(0.5), 0.5, src, {},
                                     4);
    CHECK(serial >= 0.0);
    CHECK(serial == parallel);
  }
}

TEST_CASE("fit never does worse than the bare source") {
  rng64 rng(91);
  for (int rep = 0; rep < 10; ++rep) {
    dataset d;
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform01() * 15);
    d.features.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < 2; ++j)
        d.features(i, j) = 3.0 * (2.0 * rng.uniform01() - 1.0);
    d.labels.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      d.labels[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    Eigen::VectorXd w(2);
    w << rng.uniform01() - 0.5, rng.uniform01() - 0.5;
    const source_hypothesis src = source_hypothesis::linear(w);

    const loss_spec loss = rep % 2 == 0 ? loss_spec::logistic()
                                        : loss_spec::squared_hinge();
    const double lambda = 0.2 + rng.uniform01();
    const fitted_model m =
        fit(d, loss, kernel_spec::gaussian(0.8), lambda, src, {});
    const double lhs =
        empirical_risk(m, d, loss) + lambda * m.rkhs_norm_sq();
    const double rhs = empirical_risk(src, d, loss);
    CHECK(lhs <= rhs + 1e-8);
  }
}
