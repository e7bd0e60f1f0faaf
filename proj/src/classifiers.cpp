#include "sleepgp/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sleepgp/rng.hpp"

namespace sleepgp {

ClassifierKind classifier_kind_from_string(const std::string& s) {
  if (s == "knn") return ClassifierKind::knn;
  if (s == "nb" || s == "gaussian_nb") return ClassifierKind::gaussian_nb;
  if (s == "dt" || s == "decision_tree") return ClassifierKind::decision_tree;
  if (s == "mlp") return ClassifierKind::mlp;
  throw config_error("unknown classifier '" + s + "' (knn, gaussian_nb, decision_tree, mlp)");
}

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::gaussian_nb: return "gaussian_nb";
    case ClassifierKind::decision_tree: return "decision_tree";
    case ClassifierKind::mlp: return "mlp";
  }
  return "?";
}

namespace {

void standardize_fit(const Matrix& x, std::vector<double>& mean,
                     std::vector<double>& scale) {
  const size_t n = x.size(), d = x.front().size();
  mean.assign(d, 0.0);
  for (const auto& row : x)
    for (size_t j = 0; j < d; ++j) mean[j] += row[j];
  for (auto& v : mean) v /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (const auto& row : x)
    for (size_t j = 0; j < d; ++j) {
      double dv = row[j] - mean[j];
      var[j] += dv * dv;
    }
  scale.assign(d, 0.0);
  for (size_t j = 0; j < d; ++j) {
    double sd = std::sqrt(var[j] / static_cast<double>(n));
    scale[j] = sd < 1e-12 ? 0.0 : 1.0 / sd;
  }
}

Matrix standardize_apply(const Matrix& x, const std::vector<double>& mean,
                         const std::vector<double>& scale) {
  Matrix z(x.size(), std::vector<double>(mean.size()));
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != mean.size())
      throw data_error("classifier: feature dimension mismatch");
    for (size_t j = 0; j < mean.size(); ++j)
      z[i][j] = (x[i][j] - mean[j]) * scale[j];
  }
  return z;
}

// ---- decision tree ----------------------------------------------------

struct SplitChoice {
  double gini = 2.0;
  int feature = -1;
  double threshold = 0.0;
};

double gini_impurity(long pos, long total) {
  if (total == 0) return 0.0;
  double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

int grow_tree(std::vector<DtNode>& nodes, const Matrix& z, const std::vector<int>& y,
              std::vector<size_t> idx, int depth, const ClassifierSpec& spec) {
  long pos = 0;
  for (size_t i : idx) pos += y[i];
  const long n = static_cast<long>(idx.size());

  auto make_leaf = [&]() {
    DtNode leaf;
    leaf.value = static_cast<double>(pos) / static_cast<double>(n);
    nodes.push_back(leaf);
    return static_cast<int>(nodes.size() - 1);
  };

  if (depth >= spec.dt_max_depth || pos == 0 || pos == n ||
      n < 2 * spec.dt_min_leaf)
    return make_leaf();

  const size_t d = z.front().size();
  SplitChoice best;
  std::vector<size_t> sorted = idx;
  for (size_t f = 0; f < d; ++f) {
    std::sort(sorted.begin(), sorted.end(),
              [&](size_t a, size_t b) { return z[a][f] < z[b][f]; });
    long left_n = 0, left_pos = 0;
    for (size_t k = 0; k + 1 < sorted.size(); ++k) {
      left_n++;
      left_pos += y[sorted[k]];
      double lo = z[sorted[k]][f], hi = z[sorted[k + 1]][f];
      if (lo == hi) continue;  // candidate thresholds sit between distinct values
      if (left_n < spec.dt_min_leaf || n - left_n < spec.dt_min_leaf) continue;
      double thr = 0.5 * (lo + hi);
      double g = (static_cast<double>(left_n) * gini_impurity(left_pos, left_n) +
                  static_cast<double>(n - left_n) *
                      gini_impurity(pos - left_pos, n - left_n)) /
                 static_cast<double>(n);
      // Strict improvement keeps the (lower feature, lower threshold) tie rule.
      if (g < best.gini) {
        best.gini = g;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
      }
    }
  }
  if (best.feature < 0) return make_leaf();

  std::vector<size_t> left_idx, right_idx;
  for (size_t i : idx)
    (z[i][static_cast<size_t>(best.feature)] <= best.threshold ? left_idx : right_idx)
        .push_back(i);

  int self = static_cast<int>(nodes.size());
  nodes.push_back(DtNode{});
  nodes[self].feature = best.feature;
  nodes[self].threshold = best.threshold;
  int l = grow_tree(nodes, z, y, std::move(left_idx), depth + 1, spec);
  int r = grow_tree(nodes, z, y, std::move(right_idx), depth + 1, spec);
  nodes[self].left = l;
  nodes[self].right = r;
  return self;
}

// ---- mlp ---------------------------------------------------------------

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void mlp_axpy(MlpParams& dst, const MlpParams& g, double a) {
  for (size_t i = 0; i < dst.w1.size(); ++i) dst.w1[i] += a * g.w1[i];
  for (size_t i = 0; i < dst.b1.size(); ++i) dst.b1[i] += a * g.b1[i];
  for (size_t i = 0; i < dst.w2.size(); ++i) dst.w2[i] += a * g.w2[i];
  dst.b2 += a * g.b2;
}

}  // namespace

namespace mlp_detail {

double loss_and_grad(const MlpParams& p, const Matrix& x, const std::vector<int>& y,
                     MlpParams* grad) {
  const size_t n = x.size();
  const auto h = static_cast<size_t>(p.n_hidden);
  const auto d = static_cast<size_t>(p.n_in);
  if (grad) {
    grad->n_in = p.n_in;
    grad->n_hidden = p.n_hidden;
    grad->w1.assign(p.w1.size(), 0.0);
    grad->b1.assign(p.b1.size(), 0.0);
    grad->w2.assign(p.w2.size(), 0.0);
    grad->b2 = 0.0;
  }

  double loss = 0.0;
  std::vector<double> z1(h), a1(h);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < h; ++j) {
      double acc = p.b1[j];
      const double* wrow = &p.w1[j * d];
      for (size_t k = 0; k < d; ++k) acc += wrow[k] * x[i][k];
      z1[j] = acc;
      a1[j] = acc > 0.0 ? acc : 0.0;
    }
    double z2 = p.b2;
    for (size_t j = 0; j < h; ++j) z2 += p.w2[j] * a1[j];
    double prob = sigmoid(z2);
    double pc = std::clamp(prob, 1e-12, 1.0 - 1e-12);
    double yi = static_cast<double>(y[i]);
    loss += -(yi * std::log(pc) + (1.0 - yi) * std::log(1.0 - pc));

    if (grad) {
      double dz2 = prob - yi;
      grad->b2 += dz2;
      for (size_t j = 0; j < h; ++j) {
        grad->w2[j] += dz2 * a1[j];
        if (z1[j] > 0.0) {
          double dz1 = dz2 * p.w2[j];
          grad->b1[j] += dz1;
          double* grow = &grad->w1[j * d];
          for (size_t k = 0; k < d; ++k) grow[k] += dz1 * x[i][k];
        }
      }
    }
  }
  double inv_n = 1.0 / static_cast<double>(n);
  if (grad) {
    for (auto& v : grad->w1) v *= inv_n;
    for (auto& v : grad->b1) v *= inv_n;
    for (auto& v : grad->w2) v *= inv_n;
    grad->b2 *= inv_n;
  }
  return loss * inv_n;
}

}  // namespace mlp_detail

Model train_classifier(const ClassifierSpec& spec, const Matrix& x,
                       const std::vector<int>& y, std::uint64_t seed) {
  if (x.empty() || x.size() != y.size())
    throw data_error("classifier: rows and labels must match and be nonempty");
  const size_t d = x.front().size();
  for (const auto& row : x)
    if (row.size() != d) throw data_error("classifier: ragged feature matrix");
  long pos = 0;
  for (int v : y) pos += v;
  if (pos == 0 || pos == static_cast<long>(y.size()))
    throw data_error("classifier: training labels contain a single class");

  Model m;
  m.kind = spec.kind;
  m.spec = spec;
  standardize_fit(x, m.mean, m.scale);
  Matrix z = standardize_apply(x, m.mean, m.scale);

  switch (spec.kind) {
    case ClassifierKind::knn: {
      if (spec.knn_k < 1 || spec.knn_k % 2 == 0)
        throw config_error("knn: k must be odd and >= 1");
      m.knn_x = std::move(z);
      m.knn_y = y;
      break;
    }
    case ClassifierKind::gaussian_nb: {
      long counts[2] = {static_cast<long>(y.size()) - pos, pos};
      for (int c = 0; c < 2; ++c) {
        m.nb_mean[c].assign(d, 0.0);
        m.nb_var[c].assign(d, 0.0);
        m.nb_log_prior[c] = std::log(static_cast<double>(counts[c]) /
                                     static_cast<double>(y.size()));
      }
      for (size_t i = 0; i < z.size(); ++i)
        for (size_t j = 0; j < d; ++j) m.nb_mean[y[i]][j] += z[i][j];
      for (int c = 0; c < 2; ++c)
        for (size_t j = 0; j < d; ++j) m.nb_mean[c][j] /= static_cast<double>(counts[c]);
      for (size_t i = 0; i < z.size(); ++i)
        for (size_t j = 0; j < d; ++j) {
          double dv = z[i][j] - m.nb_mean[y[i]][j];
          m.nb_var[y[i]][j] += dv * dv;
        }
      for (int c = 0; c < 2; ++c)
        for (size_t j = 0; j < d; ++j)
          m.nb_var[c][j] = std::max(m.nb_var[c][j] / static_cast<double>(counts[c]), 1e-9);
      break;
    }
    case ClassifierKind::decision_tree: {
      std::vector<size_t> idx(z.size());
      std::iota(idx.begin(), idx.end(), 0);
      grow_tree(m.dt_nodes, z, y, std::move(idx), 0, spec);
      break;
    }
    case ClassifierKind::mlp: {
      if (spec.mlp_hidden < 1 || spec.mlp_lr <= 0.0)
        throw config_error("mlp: hidden >= 1 and lr > 0 required");
      MlpParams& p = m.mlp;
      p.n_in = static_cast<int>(d);
      p.n_hidden = spec.mlp_hidden;
      p.w1.resize(static_cast<size_t>(p.n_hidden) * d);
      p.b1.assign(static_cast<size_t>(p.n_hidden), 0.0);
      p.w2.resize(static_cast<size_t>(p.n_hidden));

      rng_t rng(derive_seed(seed, 31));
      double lim1 = 1.0 / std::sqrt(static_cast<double>(d));
      for (auto& w : p.w1) w = rng.uniform(-lim1, lim1);
      double lim2 = 1.0 / std::sqrt(static_cast<double>(p.n_hidden));
      for (auto& w : p.w2) w = rng.uniform(-lim2, lim2);

      const size_t n = z.size();
      std::vector<size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      size_t batch = std::max<size_t>(1, static_cast<size_t>(spec.mlp_batch));
      MlpParams grad;
      Matrix bx;
      std::vector<int> by;
      for (int epoch = 0; epoch < spec.mlp_epochs; ++epoch) {
        for (size_t i = n - 1; i > 0; --i) {
          size_t j = rng.uniform_index(i + 1);
          std::swap(order[i], order[j]);
        }
        for (size_t start = 0; start < n; start += batch) {
          size_t stop = std::min(n, start + batch);
          bx.clear();
          by.clear();
          for (size_t k = start; k < stop; ++k) {
            bx.push_back(z[order[k]]);
            by.push_back(y[order[k]]);
          }
          mlp_detail::loss_and_grad(p, bx, by, &grad);
          mlp_axpy(p, grad, -spec.mlp_lr);
        }
      }
      break;
    }
  }
  return m;
}

std::vector<double> predict_score(const Model& m, const Matrix& x) {
  Matrix z = standardize_apply(x, m.mean, m.scale);
  std::vector<double> scores;
  scores.reserve(z.size());

  switch (m.kind) {
    case ClassifierKind::knn: {
      const size_t n = m.knn_x.size();
      const size_t k = std::min<size_t>(static_cast<size_t>(m.spec.knn_k), n);
      std::vector<std::pair<double, size_t>> dist(n);
      for (const auto& q : z) {
        for (size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (size_t j = 0; j < q.size(); ++j) {
            double dv = q[j] - m.knn_x[i][j];
            acc += dv * dv;
          }
          dist[i] = {acc, i};  // ties broken by lower training-row index
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
        double s = 0.0;
        for (size_t i = 0; i < k; ++i) s += m.knn_y[dist[i].second];
        scores.push_back(s / static_cast<double>(k));
      }
      break;
    }
    case ClassifierKind::gaussian_nb: {
      const size_t d = m.mean.size();
      for (const auto& q : z) {
        double lp[2];
        for (int c = 0; c < 2; ++c) {
          double acc = m.nb_log_prior[c];
          for (size_t j = 0; j < d; ++j) {
            double v = m.nb_var[c][j];
            double dv = q[j] - m.nb_mean[c][j];
            acc += -0.5 * std::log(2.0 * M_PI * v) - dv * dv / (2.0 * v);
          }
          lp[c] = acc;
        }
        scores.push_back(sigmoid(lp[1] - lp[0]));
      }
      break;
    }
    case ClassifierKind::decision_tree: {
      for (const auto& q : z) {
        int node = 0;
        while (!m.dt_nodes[static_cast<size_t>(node)].is_leaf()) {
          const DtNode& nd = m.dt_nodes[static_cast<size_t>(node)];
          node = q[static_cast<size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        scores.push_back(m.dt_nodes[static_cast<size_t>(node)].value);
      }
      break;
    }
    case ClassifierKind::mlp: {
      const auto h = static_cast<size_t>(m.mlp.n_hidden);
      const auto d = static_cast<size_t>(m.mlp.n_in);
      for (const auto& q : z) {
        double z2 = m.mlp.b2;
        for (size_t j = 0; j < h; ++j) {
          double acc = m.mlp.b1[j];
          const double* wrow = &m.mlp.w1[j * d];
          for (size_t kk = 0; kk < d; ++kk) acc += wrow[kk] * q[kk];
          if (acc > 0.0) z2 += m.mlp.w2[j] * acc;
        }
        scores.push_back(sigmoid(z2));
      }
      break;
    }
  }
  return scores;
}

std::vector<int> predict_label(const Model& m, const Matrix& x) {
  auto scores = predict_score(m, x);
  std::vector<int> out(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] >= 0.5 ? 1 : 0;
  return out;
}

// ---- serialization ------------------------------------------------------

nlohmann::json spec_to_json(const ClassifierSpec& s) {
  return {{"kind", to_string(s.kind)},   {"knn_k", s.knn_k},
          {"dt_max_depth", s.dt_max_depth}, {"dt_min_leaf", s.dt_min_leaf},
          {"mlp_hidden", s.mlp_hidden},  {"mlp_lr", s.mlp_lr},
          {"mlp_epochs", s.mlp_epochs},  {"mlp_batch", s.mlp_batch}};
}

ClassifierSpec spec_from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  s.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
  s.knn_k = j.value("knn_k", s.knn_k);
  s.dt_max_depth = j.value("dt_max_depth", s.dt_max_depth);
  s.dt_min_leaf = j.value("dt_min_leaf", s.dt_min_leaf);
  s.mlp_hidden = j.value("mlp_hidden", s.mlp_hidden);
  s.mlp_lr = j.value("mlp_lr", s.mlp_lr);
  s.mlp_epochs = j.value("mlp_epochs", s.mlp_epochs);
  s.mlp_batch = j.value("mlp_batch", s.mlp_batch);
  return s;
}

nlohmann::json model_to_json(const Model& m) {
  nlohmann::json j;
  j["kind"] = to_string(m.kind);
  j["spec"] = spec_to_json(m.spec);
  j["mean"] = m.mean;
  j["scale"] = m.scale;
  switch (m.kind) {
    case ClassifierKind::knn:
      j["train_x"] = m.knn_x;
      j["train_y"] = m.knn_y;
      break;
    case ClassifierKind::gaussian_nb:
      j["log_prior"] = {m.nb_log_prior[0], m.nb_log_prior[1]};
      j["class_mean"] = {m.nb_mean[0], m.nb_mean[1]};
      j["class_var"] = {m.nb_var[0], m.nb_var[1]};
      break;
    case ClassifierKind::decision_tree: {
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& nd : m.dt_nodes)
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", nd.value}});
      j["nodes"] = std::move(nodes);
      break;
    }
    case ClassifierKind::mlp:
      j["n_in"] = m.mlp.n_in;
      j["n_hidden"] = m.mlp.n_hidden;
      j["w1"] = m.mlp.w1;
      j["b1"] = m.mlp.b1;
      j["w2"] = m.mlp.w2;
      j["b2"] = m.mlp.b2;
      break;
  }
  return j;
}

Model model_from_json(const nlohmann::json& j) {
  Model m;
  m.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
  m.spec = spec_from_json(j.at("spec"));
  m.mean = j.at("mean").get<std::vector<double>>();
  m.scale = j.at("scale").get<std::vector<double>>();
  switch (m.kind) {
    case ClassifierKind::knn:
      m.knn_x = j.at("train_x").get<Matrix>();
      m.knn_y = j.at("train_y").get<std::vector<int>>();
      break;
    case ClassifierKind::gaussian_nb:
      m.nb_log_prior[0] = j.at("log_prior")[0].get<double>();
      m.nb_log_prior[1] = j.at("log_prior")[1].get<double>();
      m.nb_mean[0] = j.at("class_mean")[0].get<std::vector<double>>();
      m.nb_mean[1] = j.at("class_mean")[1].get<std::vector<double>>();
      m.nb_var[0] = j.at("class_var")[0].get<std::vector<double>>();
      m.nb_var[1] = j.at("class_var")[1].get<std::vector<double>>();
      break;
    case ClassifierKind::decision_tree:
      for (const auto& nd : j.at("nodes")) {
        DtNode n;
        n.feature = nd.at("feature").get<int>();
        n.threshold = nd.at("threshold").get<double>();
        n.left = nd.at("left").get<int>();
        n.right = nd.at("right").get<int>();
        n.value = nd.at("value").get<double>();
        m.dt_nodes.push_back(n);
      }
      break;
    case ClassifierKind::mlp:
      m.mlp.n_in = j.at("n_in").get<int>();
      m.mlp.n_hidden = j.at("n_hidden").get<int>();
      m.mlp.w1 = j.at("w1").get<std::vector<double>>();
      m.mlp.b1 = j.at("b1").get<std::vector<double>>();
      m.mlp.w2 = j.at("w2").get<std::vector<double>>();
      m.mlp.b2 = j.at("b2").get<double>();
      break;
  }
  return m;
}

}  // namespace sleepgp
