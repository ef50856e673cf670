#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "midec/dsp.hpp"
#include "midec/session.hpp"

namespace midec {

inline constexpr double kWindowSeconds = 0.5;
inline constexpr double kStepSeconds = 1.0 / 16.0;

enum class Task { Onset, Offset };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

// channel x frequency x time block of sliding-window spectral power
// (or its ERD/ERS log-ratio, if is_erd is set).
struct Spectrogram {
  std::vector<double> times_s;   // window start times
  std::vector<double> freqs_hz;  // ascending grid
  std::vector<std::string> channel_labels;
  std::vector<Eigen::MatrixXd> values;  // per channel: freqs x times
  bool is_erd{false};
  double window_s{kWindowSeconds};
  double step_s{kStepSeconds};

  Eigen::Index n_times() const { return static_cast<Eigen::Index>(times_s.size()); }
  Eigen::Index n_freqs() const { return static_cast<Eigen::Index>(freqs_hz.size()); }
};

// samples x features of raw band power, with per-sample class labels and
// provenance (run, trial, window index 0..8). Feature order is channel-major,
// frequency ascending, and stable across runs.
struct FeatureMatrix {
  Eigen::MatrixXd x;
  std::vector<std::pair<std::string, double>> feature_index;  // (channel, freq)
  std::vector<int> labels;
  std::vector<int> run_ids;
  std::vector<int> trial_indices;
  std::vector<int> window_indices;

  Eigen::Index n_samples() const { return x.rows(); }
  Eigen::Index n_features() const { return x.cols(); }
};

// Sliding-window Welch power over an arbitrary channels x samples block.
// `t0_s` sets the time of the first window (used to align trial segments).
Spectrogram segment_spectrogram(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                const std::vector<std::string>& labels,
                                int sample_rate_hz, double band_lo_hz,
                                double band_hi_hz, double resolution_hz,
                                double window_s = kWindowSeconds,
                                double step_s = kStepSeconds, double t0_s = 0.0);

// Whole-recording sliding spectrogram over the EEG channels.
Spectrogram sliding_spectrogram(const Recording& rec, double band_lo_hz,
                                double band_hi_hz, double resolution_hz,
                                double window_s = kWindowSeconds,
                                double step_s = kStepSeconds);

// Mean Welch power over the sliding windows of one epoch (per channel);
// used for the per-trial RS baseline.
Psd epoch_mean_psd(const Recording& rec, const Epoch& epoch, double band_lo_hz,
                   double band_hi_hz, double resolution_hz,
                   double window_s = kWindowSeconds, double step_s = kStepSeconds);

// value(f, t) = log10(A(f, t) / B(f)). Baseline bins must be strictly
// positive; the error names the first offending channel/frequency.
Spectrogram erd_transform(const Spectrogram& spec, const Psd& baseline);

// Builds the labeled feature matrix for one recording's epochs.
// task=onset: class 0 = RS, class 1 = bMI; task=offset: class 0 = dMI,
// class 1 = eMI. Each 1 s epoch yields 9 windows of 0.5 s stepped 1/16 s.
FeatureMatrix build_feature_matrix(const std::vector<Epoch>& epochs,
                                   const Recording& rec, Task task,
                                   double band_lo_hz = 8.0, double band_hi_hz = 30.0,
                                   double resolution_hz = 1.0,
                                   bool log_power = false);

// Row-wise concatenation; feature indices must agree.
FeatureMatrix concat_features(const std::vector<FeatureMatrix>& parts);

}  // namespace midec
