#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "midec/session.hpp"

namespace midec {

// Least-squares EOG-to-EEG mixing estimate fitted on calibration data.
struct EogFilterMatrix {
  Eigen::MatrixXd b;  // n_eog x n_eeg coefficients
  std::vector<std::string> eog_labels;
  std::vector<std::string> eeg_labels;
  std::string fitted_on;  // calibration segment descriptor
};

// Regresses EEG on EOG over the calibration recording: b = (U^T U)^-1 U^T Y
// with samples as rows, after removing each channel's mean (the bias term).
// The recording is used as given; band-pass it first to match the
// preprocessing order. Throws NumericalError on rank-deficient EOG data
// instead of falling back to a pseudo-inverse.
EogFilterMatrix fit_eog_filter(const Recording& calibration);

// output = eeg - b^T * eog, channels x samples. Memoryless: applying it
// sample-by-sample equals batch application bit-exactly.
Eigen::MatrixXd apply_eog_filter(const EogFilterMatrix& filter,
                                 const Eigen::Ref<const Eigen::MatrixXd>& eeg,
                                 const Eigen::Ref<const Eigen::MatrixXd>& eog);

std::string eog_filter_to_json(const EogFilterMatrix& filter);
EogFilterMatrix eog_filter_from_json(const std::string& text);

}  // namespace midec
