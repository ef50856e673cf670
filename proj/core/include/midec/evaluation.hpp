#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "midec/pipeline.hpp"
#include "midec/riemann.hpp"

namespace midec {

// Binomial chance level: the accuracy that must be exceeded for significance
// at level alpha under fair-coin misclassification, i.e. the largest k/n whose
// exceedance probability P(X >= k) is still > alpha.
double chance_level(std::int64_t n_samples, double alpha);

struct FoldResult {
  int held_out_run{0};
  double train_accuracy{0.0};
  double test_accuracy{0.0};
  std::int64_t n_train{0};
  std::int64_t n_test{0};
  std::vector<int> selected_features;  // fitted on training folds only
};

struct WindowPoint {
  int window_index{0};
  double offset_s{0.0};  // decision time relative to epoch start
  double accuracy{0.0};
  double stddev{0.0};  // across folds
};

struct EvalReport {
  Task task{Task::Onset};
  std::string pipeline;  // "dlda_offline" or "mdm_pseudo_online"
  std::vector<FoldResult> folds;
  double mean_train{0.0}, std_train{0.0}, min_train{0.0}, max_train{0.0};
  double mean_test{0.0}, std_test{0.0}, min_test{0.0}, max_test{0.0};
  double chance{0.0};
  std::vector<WindowPoint> window_curve;

  void finalize(double chance_alpha);  // fills aggregates from folds
};

// Predicted-label trace around the task cue (GoCue for onset, StopCue for
// offset), aggregated across a fold's trials on the 1/16 s grid.
struct PredictionTrace {
  Task task{Task::Onset};
  std::vector<double> time_s;     // relative to the cue
  std::vector<double> mean_label; // grand average of predicted labels
  std::vector<double> std_label;
  std::vector<int> n;
};

// Per-fold correct/total tallies keyed by window index.
using WindowTally = std::map<int, std::pair<std::int64_t, std::int64_t>>;

// Accuracy per window index with across-fold standard deviation.
std::vector<WindowPoint> time_resolved_accuracy(
    const std::vector<WindowTally>& per_fold, double step_s,
    double first_offset_s = 0.0);

// Leave-one-run-out cross-validation of the dLDA pipeline. Accepts a raw
// bundle (preprocesses internally) or an already-preprocessed one. Feature
// selection is fitted on training folds only.
EvalReport loro_cv(const SessionBundle& session, Task task,
                   const PipelineConfig& cfg);

// Strictly causal replay of each held-out run: causal band-pass, streaming
// EOG regression, sliding 1 s covariance windows stepped 1/16 s, adaptive
// re-centering in arrival order, MDM prediction. Headline accuracy scores the
// decision window aligned with each trained epoch; the window curve steps
// through the epoch at 1/16 s.
std::pair<EvalReport, PredictionTrace> pseudo_online_replay(
    const SessionBundle& session, Task task, const PipelineConfig& cfg);

// Causal sliding-window covariances via prefix sums: one sample per step,
// window [end - win, end), keyed by the end sample. Exposed so the replay
// bookkeeping can be cross-validated against direct epoch covariances.
std::vector<std::pair<std::int64_t, Eigen::MatrixXd>> sliding_covariances(
    const Eigen::Ref<const Eigen::MatrixXd>& signal, Eigen::Index win_samples,
    Eigen::Index step_samples, double shrinkage);

// Two-sided Mann-Whitney U p-value: exact rank-sum enumeration when both
// groups have <= 20 samples and no ties, tie-corrected normal approximation
// otherwise. All-identical input yields p = 1.
double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b);

struct ContrastResult {
  std::vector<double> freqs_hz;
  std::vector<double> p_adjusted;  // Bonferroni across frequencies
  std::vector<int> direction;      // +1: test > control, -1: test < control
};

// Per-frequency two-sided Mann-Whitney U with Bonferroni adjustment.
// Rows are trials, columns are frequencies.
ContrastResult condition_contrast(const Eigen::Ref<const Eigen::MatrixXd>& test_values,
                                  const Eigen::Ref<const Eigen::MatrixXd>& control_values,
                                  const std::vector<double>& freqs_hz);

std::string report_to_json(const EvalReport& report, const PipelineConfig& cfg);

}  // namespace midec
