#include "midec/dlda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace midec {

namespace {

constexpr double kVarianceFloor = 1e-12;

struct ClassStats {
  Eigen::VectorXd mean0, mean1, var0, var1;
  Eigen::Index n0{0}, n1{0};
};

ClassStats class_stats(const FeatureMatrix& x) {
  ClassStats s;
  const Eigen::Index d = x.n_features();
  s.mean0 = Eigen::VectorXd::Zero(d);
  s.mean1 = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < x.n_samples(); ++i) {
    if (x.labels[static_cast<size_t>(i)] == 1) {
      s.mean1 += x.x.row(i).transpose();
      ++s.n1;
    } else {
      s.mean0 += x.x.row(i).transpose();
      ++s.n0;
    }
  }
  if (s.n0 == 0 || s.n1 == 0) {
    throw InvalidArgumentError("both classes must be present (n0=" +
                               std::to_string(s.n0) + ", n1=" + std::to_string(s.n1) +
                               ")");
  }
  s.mean0 /= static_cast<double>(s.n0);
  s.mean1 /= static_cast<double>(s.n1);

  s.var0 = Eigen::VectorXd::Zero(d);
  s.var1 = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = 0; i < x.n_samples(); ++i) {
    if (x.labels[static_cast<size_t>(i)] == 1) {
      s.var1 += (x.x.row(i).transpose() - s.mean1).array().square().matrix();
    } else {
      s.var0 += (x.x.row(i).transpose() - s.mean0).array().square().matrix();
    }
  }
  if (s.n0 > 1) s.var0 /= static_cast<double>(s.n0 - 1);
  if (s.n1 > 1) s.var1 /= static_cast<double>(s.n1 - 1);
  return s;
}

}  // namespace

FisherRanking fisher_scores(const FeatureMatrix& x, int top_k) {
  if (top_k <= 0) throw InvalidArgumentError("top_k must be positive");
  const ClassStats s = class_stats(x);

  FisherRanking out;
  out.scores = Eigen::VectorXd::Zero(x.n_features());
  for (Eigen::Index j = 0; j < x.n_features(); ++j) {
    const double denom = s.var0(j) + s.var1(j);
    const double diff = s.mean1(j) - s.mean0(j);
    out.scores(j) = denom > 0.0 ? diff * diff / denom : 0.0;
  }

  std::vector<int> order(static_cast<size_t>(x.n_features()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (out.scores(a) != out.scores(b)) return out.scores(a) > out.scores(b);
    return a < b;
  });
  const auto k = std::min<size_t>(static_cast<size_t>(top_k), order.size());
  out.selected.assign(order.begin(), order.begin() + static_cast<long>(k));
  return out;
}

DldaModel dlda_fit(const FeatureMatrix& x, const std::vector<int>& selected) {
  if (selected.empty()) throw InvalidArgumentError("no features selected");
  for (int j : selected) {
    if (j < 0 || j >= x.n_features()) {
      throw InvalidArgumentError("selected feature index " + std::to_string(j) +
                                 " out of range");
    }
  }
  const ClassStats s = class_stats(x);
  const auto d = static_cast<Eigen::Index>(selected.size());

  DldaModel m;
  m.selected = selected;
  m.mean0.resize(d);
  m.mean1.resize(d);
  m.pooled_var.resize(d);
  const double denom = std::max<double>(1.0, static_cast<double>(s.n0 + s.n1 - 2));
  for (Eigen::Index i = 0; i < d; ++i) {
    const int j = selected[static_cast<size_t>(i)];
    m.mean0(i) = s.mean0(j);
    m.mean1(i) = s.mean1(j);
    const double pooled = (static_cast<double>(s.n0 - 1) * s.var0(j) +
                           static_cast<double>(s.n1 - 1) * s.var1(j)) /
                          denom;
    if (pooled < kVarianceFloor) {
      m.pooled_var(i) = kVarianceFloor;
      ++m.n_floored;
    } else {
      m.pooled_var(i) = pooled;
    }
    if (!x.feature_index.empty()) {
      m.selected_features.push_back(x.feature_index[static_cast<size_t>(j)]);
    }
  }
  m.prior0 = static_cast<double>(s.n0) / static_cast<double>(s.n0 + s.n1);
  m.prior1 = 1.0 - m.prior0;
  m.variance_floor_warning = 2 * m.n_floored > static_cast<int>(selected.size());
  return m;
}

int dlda_predict(const DldaModel& model, const Eigen::Ref<const Eigen::VectorXd>& row) {
  double g0 = std::log(model.prior0);
  double g1 = std::log(model.prior1);
  for (Eigen::Index i = 0; i < model.mean0.size(); ++i) {
    const int j = model.selected[static_cast<size_t>(i)];
    if (j >= row.size()) {
      throw InvalidArgumentError("feature row shorter than selected index " +
                                 std::to_string(j));
    }
    const double v = model.pooled_var(i);
    const double x = row(j);
    // Linear discriminant of a shared-variance Gaussian; the quadratic term
    // cancels between classes.
    g0 += (x * model.mean0(i) - 0.5 * model.mean0(i) * model.mean0(i)) / v;
    g1 += (x * model.mean1(i) - 0.5 * model.mean1(i) * model.mean1(i)) / v;
  }
  return g1 > g0 ? 1 : 0;
}

std::string dlda_to_json(const DldaModel& model) {
  nlohmann::json j;
  j["selected"] = model.selected;
  nlohmann::json feats = nlohmann::json::array();
  for (const auto& [label, freq] : model.selected_features) {
    feats.push_back({{"channel", label}, {"frequency_hz", freq}});
  }
  j["selected_features"] = feats;
  j["mean0"] = std::vector<double>(model.mean0.begin(), model.mean0.end());
  j["mean1"] = std::vector<double>(model.mean1.begin(), model.mean1.end());
  j["pooled_var"] =
      std::vector<double>(model.pooled_var.begin(), model.pooled_var.end());
  j["prior0"] = model.prior0;
  j["prior1"] = model.prior1;
  j["variance_floor_warning"] = model.variance_floor_warning;
  j["n_floored"] = model.n_floored;
  return j.dump(2);
}

DldaModel dlda_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DldaModel m;
  m.selected = j.at("selected").get<std::vector<int>>();
  for (const auto& f : j.at("selected_features")) {
    m.selected_features.emplace_back(f.at("channel").get<std::string>(),
                                     f.at("frequency_hz").get<double>());
  }
  const auto mean0 = j.at("mean0").get<std::vector<double>>();
  const auto mean1 = j.at("mean1").get<std::vector<double>>();
  const auto var = j.at("pooled_var").get<std::vector<double>>();
  m.mean0 = Eigen::Map<const Eigen::VectorXd>(mean0.data(),
                                              static_cast<Eigen::Index>(mean0.size()));
  m.mean1 = Eigen::Map<const Eigen::VectorXd>(mean1.data(),
                                              static_cast<Eigen::Index>(mean1.size()));
  m.pooled_var =
      Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size()));
  m.prior0 = j.at("prior0").get<double>();
  m.prior1 = j.at("prior1").get<double>();
  m.variance_floor_warning = j.value("variance_floor_warning", false);
  m.n_floored = j.value("n_floored", 0);
  return m;
}

}  // namespace midec
