#include "midec/riemann.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <json.hpp>

namespace midec {

namespace {

constexpr double kEigClamp = 1e-12;

void require_spd(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!is_spd(m)) {
    throw NumericalError(std::string(what) + ": matrix is not symmetric positive definite");
  }
}

// f applied to the clamped eigenvalues of a symmetric matrix.
template <typename F>
Eigen::MatrixXd sym_apply(const Eigen::Ref<const Eigen::MatrixXd>& m, F&& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed");
  }
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    vals(i) = f(std::max(vals(i), kEigClamp));
  }
  return eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

bool is_spd(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() > 0.0;
}

Eigen::MatrixXd spd_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return sym_apply(m, [](double x) { return std::sqrt(x); });
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return sym_apply(m, [](double x) { return 1.0 / std::sqrt(x); });
}

Eigen::MatrixXd spd_log(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return sym_apply(m, [](double x) { return std::log(x); });
}

Eigen::MatrixXd spd_pow(const Eigen::Ref<const Eigen::MatrixXd>& m, double exponent) {
  return sym_apply(m, [exponent](double x) { return std::pow(x, exponent); });
}

SpdSample epoch_covariance(const Eigen::Ref<const Eigen::MatrixXd>& epoch_signal,
                           double shrinkage) {
  const Eigen::Index n = epoch_signal.rows();
  const Eigen::Index t = epoch_signal.cols();
  if (n < 2) throw InvalidArgumentError("covariance needs >= 2 channels");
  if (t < 2) throw InvalidArgumentError("covariance needs >= 2 samples");
  if (shrinkage < 0.0 || shrinkage > 1.0) {
    throw InvalidArgumentError("shrinkage must be in [0, 1]");
  }

  Eigen::MatrixXd centered = epoch_signal;
  centered.colwise() -= epoch_signal.rowwise().mean();
  Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(t - 1);
  // Symmetrize away accumulation asymmetry before the SPD check.
  cov = 0.5 * (cov + cov.transpose());

  const double trace_mean = cov.trace() / static_cast<double>(n);
  Eigen::MatrixXd c = (1.0 - shrinkage) * cov +
                      shrinkage * trace_mean *
                          Eigen::MatrixXd::Identity(n, n);

  SpdSample sample;
  sample.c = 0.5 * (c + c.transpose());
  if (!is_spd(sample.c)) {
    throw NumericalError(
        "epoch covariance is not positive definite (rank-deficient signal with "
        "shrinkage " +
        std::to_string(shrinkage) + ")");
  }
  return sample;
}

double airm_distance(const Eigen::Ref<const Eigen::MatrixXd>& a,
                     const Eigen::Ref<const Eigen::MatrixXd>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgumentError("AIRM distance: dimension mismatch");
  }
  require_spd(a, "airm_distance");
  require_spd(b, "airm_distance");
  const Eigen::MatrixXd whitened = spd_inv_sqrt(a) * b * spd_inv_sqrt(a);
  return spd_log(0.5 * (whitened + whitened.transpose())).norm();
}

Eigen::MatrixXd frechet_mean(const std::vector<Eigen::MatrixXd>& samples, double tol,
                             int max_iter) {
  if (samples.empty()) throw InvalidArgumentError("Frechet mean of an empty set");
  const Eigen::Index n = samples.front().rows();
  for (const auto& s : samples) {
    if (s.rows() != n || s.cols() != n) {
      throw InvalidArgumentError("Frechet mean: dimension mismatch");
    }
    require_spd(s, "frechet_mean");
  }
  if (samples.size() == 1) return samples.front();

  // Arithmetic mean start, then fixed-point iteration with unit step.
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());

  double residual = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::MatrixXd root = spd_sqrt(mean);
    const Eigen::MatrixXd inv_root = spd_inv_sqrt(mean);
    Eigen::MatrixXd tangent = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : samples) {
      const Eigen::MatrixXd whitened = inv_root * s * inv_root;
      tangent += spd_log(0.5 * (whitened + whitened.transpose()));
    }
    tangent /= static_cast<double>(samples.size());
    residual = tangent.norm();
    if (residual < tol) return mean;
    Eigen::MatrixXd next = root * sym_apply(tangent, [](double x) { return std::exp(x); }) * root;
    mean = 0.5 * (next + next.transpose());
  }
  throw ConvergenceError("Frechet mean did not converge after " +
                             std::to_string(max_iter) + " iterations (residual " +
                             std::to_string(residual) + ")",
                         mean, residual);
}

Eigen::MatrixXd frechet_mean_of(const std::vector<SpdSample>& samples, double tol,
                                int max_iter) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(samples.size());
  for (const auto& s : samples) mats.push_back(s.c);
  return frechet_mean(mats, tol, max_iter);
}

MdmModel mdm_fit(const std::vector<SpdSample>& samples, double tol, int max_iter) {
  std::vector<Eigen::MatrixXd> class0, class1;
  for (const auto& s : samples) {
    (s.label == 1 ? class1 : class0).push_back(s.c);
  }
  if (class0.empty() || class1.empty()) {
    throw InvalidArgumentError("MDM needs training samples for both classes");
  }
  MdmModel m;
  m.mean0 = frechet_mean(class0, tol, max_iter);
  m.mean1 = frechet_mean(class1, tol, max_iter);
  return m;
}

int mdm_predict(const MdmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& c) {
  const double d0 = airm_distance(model.mean0, c);
  const double d1 = airm_distance(model.mean1, c);
  return d1 < d0 ? 1 : 0;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> values;
  values.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"row_major", values}};
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto values = j.at("row_major").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != rows * cols) {
    throw SessionFormatError("matrix JSON: element count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = values[static_cast<size_t>(r * cols + c)];
    }
  }
  return m;
}

}  // namespace

std::string mdm_to_json(const MdmModel& model) {
  nlohmann::json j;
  j["mean0"] = matrix_to_json(model.mean0);
  j["mean1"] = matrix_to_json(model.mean1);
  return j.dump(2);
}

MdmModel mdm_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MdmModel m;
  m.mean0 = matrix_from_json(j.at("mean0"));
  m.mean1 = matrix_from_json(j.at("mean1"));
  return m;
}

RecenterState RecenterState::identity(int dim) {
  if (dim <= 0) throw InvalidArgumentError("re-centering dimension must be positive");
  return {Eigen::MatrixXd::Identity(dim, dim), 0};
}

RecenterState RecenterState::from(Eigen::MatrixXd reference, std::int64_t count) {
  require_spd(reference, "RecenterState");
  if (count < 0) throw InvalidArgumentError("re-centering count must be >= 0");
  return {std::move(reference), count};
}

Eigen::MatrixXd recenter_update(RecenterState& state,
                                const Eigen::Ref<const Eigen::MatrixXd>& c) {
  if (c.rows() != state.reference.rows() || c.cols() != state.reference.cols()) {
    throw InvalidArgumentError("re-centering: dimension mismatch");
  }
  require_spd(c, "recenter_update");

  const Eigen::MatrixXd inv_root = spd_inv_sqrt(state.reference);
  Eigen::MatrixXd transformed = inv_root * c * inv_root;
  transformed = 0.5 * (transformed + transformed.transpose());

  // Geodesic step R <- R^{1/2} (R^{-1/2} C R^{-1/2})^{1/(k+1)} R^{1/2}.
  const Eigen::MatrixXd root = spd_sqrt(state.reference);
  const double exponent = 1.0 / static_cast<double>(state.count + 1);
  Eigen::MatrixXd next = root * spd_pow(transformed, exponent) * root;
  state.reference = 0.5 * (next + next.transpose());
  ++state.count;
  return transformed;
}

}  // namespace midec
