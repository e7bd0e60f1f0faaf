#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "sleepgp/classifiers.hpp"
#include "sleepgp/rng.hpp"

using namespace sleepgp;

namespace {

// Two well-separated Gaussian blobs in d dimensions.
void make_blobs(int n_per_class, int d, double gap, std::uint64_t seed, Matrix& x,
                std::vector<int>& y) {
  rng_t rng(seed);
  x.clear();
  y.clear();
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < n_per_class; ++i) {
      std::vector<double> row(static_cast<size_t>(d));
      for (auto& v : row) v = rng.normal(c ? gap : 0.0, 1.0);
      x.push_back(std::move(row));
      y.push_back(c);
    }
}

}  // namespace

TEST_CASE("knn matches a brute-force oracle and reproduces training labels") {
  Matrix x;
  std::vector<int> y;
  make_blobs(60, 3, 2.0, 7, x, y);

  ClassifierSpec spec;
  spec.kind = ClassifierKind::knn;
  spec.knn_k = 5;
  Model m = train_classifier(spec, x, y, 1);

  SUBCASE("brute-force neighbor oracle on random queries") {
    rng_t rng(8);
    Matrix queries;
    for (int q = 0; q < 200; ++q) {
      std::vector<double> row(3);
      for (auto& v : row) v = rng.normal(1.0, 2.0);
      queries.push_back(std::move(row));
    }
    auto scores = predict_score(m, queries);

    // oracle re-standardizes with the model's vectors, then exhaustively
    // sorts (distance, index) pairs
    for (size_t q = 0; q < queries.size(); ++q) {
      std::vector<std::pair<double, size_t>> all;
      for (size_t i = 0; i < x.size(); ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < 3; ++j) {
          double zq = (queries[q][j] - m.mean[j]) * m.scale[j];
          double zi = (x[i][j] - m.mean[j]) * m.scale[j];
          acc += (zq - zi) * (zq - zi);
        }
        all.emplace_back(acc, i);
      }
      std::sort(all.begin(), all.end());
      double s = 0.0;
      for (int i = 0; i < 5; ++i) s += y[all[static_cast<size_t>(i)].second];
      CHECK(scores[q] == doctest::Approx(s / 5.0).epsilon(1e-12));
    }
  }
  SUBCASE("k=1 reproduces the training labels") {
    ClassifierSpec k1 = spec;
    k1.knn_k = 1;
    Model m1 = train_classifier(k1, x, y, 1);
    auto lab = predict_label(m1, x);
    CHECK(lab == y);
  }
  SUBCASE("score is the positive fraction among the k nearest") {
    Matrix tx = {{0.0}, {0.1}, {0.2}, {5.0}, {5.1}, {10.0}, {11.0}};
    std::vector<int> ty = {1, 1, 1, 0, 0, 1, 0};
    Model mk = train_classifier(spec, tx, ty, 1);
    auto s = predict_score(mk, Matrix{{0.05}});
    // 5 nearest of 0.05: rows 0,1,2 (pos), 3,4 (neg)
    CHECK(s[0] == doctest::Approx(0.6));
  }
}

TEST_CASE("gaussian_nb closed form") {
  Matrix x = {{0.0}, {0.0}, {1.0}, {1.0}};
  std::vector<int> y = {0, 0, 1, 1};
  ClassifierSpec spec;
  spec.kind = ClassifierKind::gaussian_nb;
  Model m = train_classifier(spec, x, y, 1);

  SUBCASE("class parameters in standardized space") {
    // raw {0,0,1,1} standardizes to {-1,-1,1,1}
    CHECK(m.nb_mean[0][0] == doctest::Approx(-1.0));
    CHECK(m.nb_mean[1][0] == doctest::Approx(1.0));
    CHECK(m.nb_var[0][0] == doctest::Approx(1e-9));  // floored
    CHECK(m.nb_var[1][0] == doctest::Approx(1e-9));
    CHECK(std::exp(m.nb_log_prior[0]) == doctest::Approx(0.5));
    CHECK(std::exp(m.nb_log_prior[1]) == doctest::Approx(0.5));
  }
  SUBCASE("midpoint of symmetric classes scores one half") {
    auto s = predict_score(m, Matrix{{0.5}});
    CHECK(s[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("posteriors match an independent closed-form oracle to 1e-12") {
    Matrix xs;
    std::vector<int> ys;
    make_blobs(40, 2, 1.5, 3, xs, ys);
    Model mb = train_classifier(spec, xs, ys, 1);

    rng_t rng(4);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> q{rng.normal(0.75, 2.0), rng.normal(0.75, 2.0)};
      double lp[2];
      for (int c = 0; c < 2; ++c) {
        lp[c] = mb.nb_log_prior[c];
        for (size_t j = 0; j < 2; ++j) {
          double z = (q[j] - mb.mean[j]) * mb.scale[j];
          double v = mb.nb_var[c][j];
          double d = z - mb.nb_mean[c][j];
          lp[c] += -0.5 * std::log(2.0 * M_PI * v) - d * d / (2.0 * v);
        }
      }
      double p1 = std::exp(lp[1]) / (std::exp(lp[0]) + std::exp(lp[1]));
      auto s = predict_score(mb, Matrix{q});
      CHECK(s[0] == doctest::Approx(p1).epsilon(1e-12));
      // posterior pair sums to one by construction of the oracle; the
      // model's score must agree with both sides
      CHECK(1.0 - s[0] == doctest::Approx(std::exp(lp[0]) /
                                          (std::exp(lp[0]) + std::exp(lp[1])))
                              .epsilon(1e-9));
    }
  }
}

TEST_CASE("decision_tree") {
  ClassifierSpec spec;
  spec.kind = ClassifierKind::decision_tree;

  SUBCASE("one clean split with pure leaves") {
    Matrix x = {{0.0}, {0.0}, {1.0}, {1.0}};
    std::vector<int> y = {0, 0, 1, 1};
    Model m = train_classifier(spec, x, y, 1);
    REQUIRE(m.dt_nodes.size() == 3);
    const DtNode& root = m.dt_nodes[0];
    CHECK_FALSE(root.is_leaf());
    CHECK(m.dt_nodes[static_cast<size_t>(root.left)].value == doctest::Approx(0.0));
    CHECK(m.dt_nodes[static_cast<size_t>(root.right)].value == doctest::Approx(1.0));
    auto s = predict_score(m, x);
    CHECK(s[0] == doctest::Approx(0.0));
    CHECK(s[3] == doctest::Approx(1.0));
  }
  SUBCASE("perfect training accuracy on separable 2-D data") {
    Matrix x;
    std::vector<int> y;
    make_blobs(50, 2, 8.0, 5, x, y);
    Model m = train_classifier(spec, x, y, 1);
    CHECK(predict_label(m, x) == y);
  }
  SUBCASE("training accuracy is non-decreasing in max_depth") {
    Matrix x;
    std::vector<int> y;
    make_blobs(80, 2, 1.0, 9, x, y);  // overlapping blobs
    double prev = -1.0;
    for (int depth = 1; depth <= 8; ++depth) {
      ClassifierSpec s2 = spec;
      s2.dt_max_depth = depth;
      Model m = train_classifier(s2, x, y, 1);
      auto lab = predict_label(m, x);
      long correct = 0;
      for (size_t i = 0; i < y.size(); ++i) correct += lab[i] == y[i];
      double acc = static_cast<double>(correct) / static_cast<double>(y.size());
      CHECK(acc >= prev - 1e-12);
      prev = acc;
    }
  }
  SUBCASE("max_depth 0 gives the prior leaf; score 0.5 maps to label 1") {
    ClassifierSpec s2 = spec;
    s2.dt_max_depth = 0;
    Matrix x = {{0.0}, {1.0}, {2.0}, {3.0}};
    std::vector<int> y = {0, 1, 0, 1};
    Model m = train_classifier(s2, x, y, 1);
    auto sc = predict_score(m, x);
    CHECK(sc[0] == doctest::Approx(0.5));
    CHECK(predict_label(m, x) == std::vector<int>{1, 1, 1, 1});
  }
}

TEST_CASE("mlp") {
  ClassifierSpec spec;
  spec.kind = ClassifierKind::mlp;
  spec.mlp_hidden = 6;
  spec.mlp_epochs = 150;

  SUBCASE("identical seeds give identical weights") {
    Matrix x;
    std::vector<int> y;
    make_blobs(30, 3, 2.0, 2, x, y);
    Model a = train_classifier(spec, x, y, 77);
    Model b = train_classifier(spec, x, y, 77);
    CHECK(a.mlp.w1 == b.mlp.w1);
    CHECK(a.mlp.w2 == b.mlp.w2);
    CHECK(a.mlp.b1 == b.mlp.b1);
    CHECK(a.mlp.b2 == b.mlp.b2);
  }
  SUBCASE("learns a separable problem") {
    Matrix x;
    std::vector<int> y;
    make_blobs(60, 2, 4.0, 6, x, y);
    Model m = train_classifier(spec, x, y, 3);
    auto lab = predict_label(m, x);
    long correct = 0;
    for (size_t i = 0; i < y.size(); ++i) correct += lab[i] == y[i];
    CHECK(static_cast<double>(correct) / static_cast<double>(y.size()) > 0.95);
  }
  SUBCASE("analytic gradient matches central differences") {
    Matrix x = {{0.3, -1.2}, {1.4, 0.2}, {-0.7, 0.9}, {2.0, -0.4}, {0.1, 0.1}};
    std::vector<int> y = {0, 1, 0, 1, 1};

    MlpParams p;
    p.n_in = 2;
    p.n_hidden = 4;
    rng_t rng(12);
    for (int i = 0; i < 8; ++i) p.w1.push_back(rng.uniform(-0.7, 0.7));
    for (int i = 0; i < 4; ++i) p.b1.push_back(rng.uniform(-0.3, 0.3));
    for (int i = 0; i < 4; ++i) p.w2.push_back(rng.uniform(-0.7, 0.7));
    p.b2 = 0.2;

    MlpParams g;
    mlp_detail::loss_and_grad(p, x, y, &g);

    const double eps = 1e-5;
    auto check_component = [&](double* param, double analytic) {
      double orig = *param;
      *param = orig + eps;
      double up = mlp_detail::loss_and_grad(p, x, y, nullptr);
      *param = orig - eps;
      double dn = mlp_detail::loss_and_grad(p, x, y, nullptr);
      *param = orig;
      double numeric = (up - dn) / (2.0 * eps);
      double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      CHECK(std::abs(numeric - analytic) / denom < 1e-4);
    };
    for (size_t i = 0; i < p.w1.size(); ++i) check_component(&p.w1[i], g.w1[i]);
    for (size_t i = 0; i < p.b1.size(); ++i) check_component(&p.b1[i], g.b1[i]);
    for (size_t i = 0; i < p.w2.size(); ++i) check_component(&p.w2[i], g.w2[i]);
    check_component(&p.b2, g.b2);
  }
}

TEST_CASE("classifier error paths and invariances") {
  Matrix x = {{0.0}, {1.0}};

  SUBCASE("single-class labels are an error") {
    ClassifierSpec spec;
    CHECK_THROWS_AS(train_classifier(spec, x, {1, 1}, 1), data_error);
  }
  SUBCASE("dimension mismatch at predict time") {
    ClassifierSpec spec;
    Model m = train_classifier(spec, x, {0, 1}, 1);
    CHECK_THROWS_AS(predict_score(m, Matrix{{1.0, 2.0}}), data_error);
  }
  SUBCASE("positive affine rescaling of raw columns leaves scores unchanged") {
    Matrix xs;
    std::vector<int> ys;
    make_blobs(40, 3, 2.0, 13, xs, ys);
    Matrix scaled = xs;
    for (auto& row : scaled)
      for (size_t j = 0; j < row.size(); ++j)
        row[j] = row[j] * (2.0 + static_cast<double>(j)) + 5.0;

    Matrix q, qs;
    rng_t rng(14);
    for (int i = 0; i < 30; ++i) {
      std::vector<double> row(3);
      for (auto& v : row) v = rng.normal(1.0, 2.0);
      q.push_back(row);
      for (size_t j = 0; j < 3; ++j)
        row[j] = row[j] * (2.0 + static_cast<double>(j)) + 5.0;
      qs.push_back(row);
    }

    for (auto kind : {ClassifierKind::knn, ClassifierKind::gaussian_nb,
                      ClassifierKind::decision_tree, ClassifierKind::mlp}) {
      ClassifierSpec spec2;
      spec2.kind = kind;
      spec2.mlp_epochs = 40;
      Model m1 = train_classifier(spec2, xs, ys, 21);
      Model m2 = train_classifier(spec2, scaled, ys, 21);
      auto s1 = predict_score(m1, q);
      auto s2 = predict_score(m2, qs);
      for (size_t i = 0; i < s1.size(); ++i)
        CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-9).scale(1e-9));
    }
  }
}
