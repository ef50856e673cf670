#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "midec/features.hpp"

namespace midec {

struct FisherRanking {
  Eigen::VectorXd scores;     // per feature, nonnegative
  std::vector<int> selected;  // top-k indices, descending score, ties by index
};

// score_j = (mu1_j - mu0_j)^2 / (var0_j + var1_j); zero-denominator features
// score 0. Requires both classes present.
FisherRanking fisher_scores(const FeatureMatrix& x, int top_k = 10);

// Gaussian class-conditional model with a shared diagonal covariance over the
// selected features.
struct DldaModel {
  Eigen::VectorXd mean0, mean1;
  Eigen::VectorXd pooled_var;  // floored to stay positive
  double prior0{0.5}, prior1{0.5};
  std::vector<int> selected;
  std::vector<std::pair<std::string, double>> selected_features;  // labels
  bool variance_floor_warning{false};  // set when > 50% of features were floored
  int n_floored{0};
};

DldaModel dlda_fit(const FeatureMatrix& x, const std::vector<int>& selected);

// Argmax of the linear discriminant over the full feature row (the model
// indexes its selected features); ties go to class 0.
int dlda_predict(const DldaModel& model, const Eigen::Ref<const Eigen::VectorXd>& row);

std::string dlda_to_json(const DldaModel& model);
DldaModel dlda_from_json(const std::string& text);

}  // namespace midec
