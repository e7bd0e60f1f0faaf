#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sleepgp/common.hpp"

namespace sleepgp {

enum class ClassifierKind { knn, gaussian_nb, decision_tree, mlp };

ClassifierKind classifier_kind_from_string(const std::string& s);
std::string to_string(ClassifierKind k);

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::knn;
  int knn_k = 5;
  int dt_max_depth = 10;
  int dt_min_leaf = 2;
  int mlp_hidden = 15;
  double mlp_lr = 0.01;
  int mlp_epochs = 200;
  int mlp_batch = 32;
};

struct DtNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf positive fraction

  bool is_leaf() const { return feature < 0; }
};

struct MlpParams {
  int n_in = 0;
  int n_hidden = 0;
  std::vector<double> w1;  // n_hidden x n_in, row-major
  std::vector<double> b1;  // n_hidden
  std::vector<double> w2;  // n_hidden
  double b2 = 0.0;
};

// Trained model; only the block matching `kind` is populated. Inputs are
// z-scored with (mean, scale) at both fit and predict time, which makes
// scores invariant to positive affine rescaling of the raw columns.
struct Model {
  ClassifierKind kind = ClassifierKind::knn;
  ClassifierSpec spec;
  std::vector<double> mean;
  std::vector<double> scale;  // 1/sd, 0 for constant columns

  Matrix knn_x;
  std::vector<int> knn_y;

  double nb_log_prior[2] = {0.0, 0.0};
  std::vector<double> nb_mean[2];
  std::vector<double> nb_var[2];  // floored at 1e-9

  std::vector<DtNode> dt_nodes;

  MlpParams mlp;
};

Model train_classifier(const ClassifierSpec& spec, const Matrix& x,
                       const std::vector<int>& y, std::uint64_t seed);

// Positive-class score in [0, 1] per row.
std::vector<double> predict_score(const Model& m, const Matrix& x);

// Hard labels: score >= 0.5 maps to 1.
std::vector<int> predict_label(const Model& m, const Matrix& x);

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ClassifierSpec& s);
ClassifierSpec spec_from_json(const nlohmann::json& j);

namespace mlp_detail {

// Mean binary cross-entropy over (x, y) plus its gradient; used by training
// and by the finite-difference checks.
double loss_and_grad(const MlpParams& p, const Matrix& x, const std::vector<int>& y,
                     MlpParams* grad);

}  // namespace mlp_detail

}  // namespace sleepgp
