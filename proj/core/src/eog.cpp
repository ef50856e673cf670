#include "midec/eog.hpp"

#include <Eigen/Dense>
#include <json.hpp>

namespace midec {

EogFilterMatrix fit_eog_filter(const Recording& calibration) {
  const auto eeg_idx = calibration.eeg_indices();
  const auto eog_idx = calibration.eog_indices();
  if (eeg_idx.empty() || eog_idx.empty()) {
    throw InvalidArgumentError("calibration needs both EEG and EOG channels");
  }
  const auto min_samples =
      static_cast<Eigen::Index>(10) * calibration.sample_rate_hz;
  if (calibration.n_samples() < min_samples) {
    throw InvalidArgumentError("calibration shorter than 10 s (" +
                               std::to_string(calibration.n_samples()) + " samples at " +
                               std::to_string(calibration.sample_rate_hz) + " Hz)");
  }

  // Samples as rows; mean removal provides the bias term.
  Eigen::MatrixXd u = calibration.channel_rows(eog_idx).transpose();
  Eigen::MatrixXd y = calibration.channel_rows(eeg_idx).transpose();
  u.rowwise() -= u.colwise().mean().eval();
  y.rowwise() -= y.colwise().mean().eval();

  const Eigen::MatrixXd gram = u.transpose() * u;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-10);
  if (lu.rank() < gram.rows()) {
    throw NumericalError("EOG covariance is rank-deficient (rank " +
                         std::to_string(lu.rank()) + " of " +
                         std::to_string(gram.rows()) +
                         "); duplicated or constant EOG channels?");
  }

  EogFilterMatrix out;
  out.b = lu.solve(u.transpose() * y);
  out.eog_labels = calibration.labels(eog_idx);
  out.eeg_labels = calibration.labels(eeg_idx);
  out.fitted_on = std::to_string(calibration.n_samples()) + " samples @" +
                  std::to_string(calibration.sample_rate_hz) + " Hz, run " +
                  std::to_string(calibration.run_id);
  return out;
}

Eigen::MatrixXd apply_eog_filter(const EogFilterMatrix& filter,
                                 const Eigen::Ref<const Eigen::MatrixXd>& eeg,
                                 const Eigen::Ref<const Eigen::MatrixXd>& eog) {
  if (eog.rows() != filter.b.rows() || eeg.rows() != filter.b.cols()) {
    throw InvalidArgumentError(
        "EOG filter shaped " + std::to_string(filter.b.rows()) + "x" +
        std::to_string(filter.b.cols()) + " cannot apply to eog " +
        std::to_string(eog.rows()) + " / eeg " + std::to_string(eeg.rows()) +
        " channels");
  }
  if (eeg.cols() != eog.cols()) {
    throw InvalidArgumentError("eeg and eog sample counts differ");
  }
  return eeg - filter.b.transpose() * eog;
}

std::string eog_filter_to_json(const EogFilterMatrix& filter) {
  nlohmann::json j;
  j["eog_labels"] = filter.eog_labels;
  j["eeg_labels"] = filter.eeg_labels;
  j["fitted_on"] = filter.fitted_on;
  j["rows"] = filter.b.rows();
  j["cols"] = filter.b.cols();
  std::vector<double> coeffs;
  coeffs.reserve(static_cast<size_t>(filter.b.size()));
  for (Eigen::Index r = 0; r < filter.b.rows(); ++r) {
    for (Eigen::Index c = 0; c < filter.b.cols(); ++c) {
      coeffs.push_back(filter.b(r, c));
    }
  }
  j["coefficients_row_major"] = coeffs;
  return j.dump(2);
}

EogFilterMatrix eog_filter_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EogFilterMatrix out;
  out.eog_labels = j.at("eog_labels").get<std::vector<std::string>>();
  out.eeg_labels = j.at("eeg_labels").get<std::vector<std::string>>();
  out.fitted_on = j.value("fitted_on", "");
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto coeffs = j.at("coefficients_row_major").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(coeffs.size()) != rows * cols) {
    throw SessionFormatError("EOG filter JSON: coefficient count mismatch");
  }
  out.b.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out.b(r, c) = coeffs[static_cast<size_t>(r * cols + c)];
    }
  }
  return out;
}

}  // namespace midec
