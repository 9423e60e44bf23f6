#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "virolfi/gp_classifier.hpp"
#include "virolfi/rng.hpp"

using namespace virolfi;

namespace {

struct Labelled {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

// Valid iff the first coordinate is below 0.5.
Labelled half_plane(int n, int dim, Rng& rng) {
  Labelled d{Eigen::MatrixXd(n, dim), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) d.x(i, j) = rng.uniform();
    d.y[i] = d.x(i, 0) < 0.5 ? 1 : -1;
  }
  return d;
}

}  // namespace

TEST_CASE("a single class is predicted everywhere") {
  Rng rng(1);
  Labelled d = half_plane(20, 2, rng);
  std::fill(d.y.begin(), d.y.end(), 1);
  GPClassifier clf(2, {});
  clf.fit(d.x, d.y);
  CHECK(clf.is_constant());
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d q(rng.uniform(), rng.uniform());
    CHECK(clf.predict(q) > 0.5);
    CHECK(clf.predicts_valid(q));
  }
}

TEST_CASE("one-dimensional boundary is located") {
  Rng rng(2);
  const Labelled d = half_plane(200, 1, rng);
  GPClassifier clf(1, {});
  clf.fit(d.x, d.y);
  optimize_classifier_hyper(clf);
  double boundary = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double q = k / 1000.0;
    if (clf.predict(Eigen::VectorXd::Constant(1, q)) < 0.5) {
      boundary = q;
      break;
    }
  }
  CHECK(std::abs(boundary - 0.5) < 0.1);
  CHECK(clf.predict(Eigen::VectorXd::Constant(1, 0.1)) > 0.5);
  CHECK(clf.predict(Eigen::VectorXd::Constant(1, 0.9)) < 0.5);
}

TEST_CASE("fast validity check agrees with the probability") {
  Rng rng(3);
  const Labelled d = half_plane(150, 3, rng);
  GPClassifier clf(3, {});
  clf.fit(d.x, d.y);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d q(rng.uniform(), rng.uniform(), rng.uniform());
    CHECK(clf.predicts_valid(q) == (clf.predict(q) >= 0.5));
  }
}

TEST_CASE("training order does not matter") {
  Rng rng(4);
  const Labelled d = half_plane(80, 2, rng);
  std::vector<int> order(80);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Labelled p{Eigen::MatrixXd(80, 2), std::vector<int>(80)};
  for (int i = 0; i < 80; ++i) {
    p.x.row(i) = d.x.row(order[i]);
    p.y[i] = d.y[order[i]];
  }
  GPClassifier a(2, {}), b(2, {});
  a.fit(d.x, d.y);
  b.fit(p.x, p.y);
  for (int i = 0; i < 40; ++i) {
    const Eigen::Vector2d q(rng.uniform(), rng.uniform());
    CHECK(a.predict(q) == doctest::Approx(b.predict(q)).epsilon(1e-8));
  }
}

TEST_CASE("incremental fitting matches a batch fit") {
  Rng rng(5);
  const Labelled d = half_plane(60, 2, rng);
  GPClassifier batch(2, {}), inc(2, {});
  batch.fit(d.x, d.y);
  for (int i = 0; i < 60; ++i) inc.add_point(d.x.row(i).transpose(), d.y[i]);
  const Eigen::Vector2d q(0.45, 0.3);
  CHECK(inc.predict(q) == doctest::Approx(batch.predict(q)).epsilon(1e-6));
}

TEST_CASE("refit from a stored latent mode reproduces the model") {
  Rng rng(6);
  const Labelled d = half_plane(70, 2, rng);
  GPClassifier a(2, {});
  a.fit(d.x, d.y);
  GPClassifier b(2, a.hyper());
  b.fit(d.x, d.y, a.latent_mode());
  const Eigen::Vector2d q(0.52, 0.7);
  CHECK(b.predict(q) == doctest::Approx(a.predict(q)).epsilon(1e-10));
}

TEST_CASE("hyperparameter search never lowers the evidence") {
  Rng rng(7);
  const Labelled d = half_plane(100, 2, rng);
  GPClassifier clf(2, {});
  clf.fit(d.x, d.y);
  const ClassifierOptOutcome out = optimize_classifier_hyper(clf);
  CHECK(out.evidence_after >= out.evidence_before);
  CHECK(clf.log_evidence() == doctest::Approx(out.evidence_after));
}
