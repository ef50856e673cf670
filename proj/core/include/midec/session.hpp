#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "midec/errors.hpp"

namespace midec {

enum class ChannelKind { Eeg, Eog };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& s);

struct ChannelInfo {
  std::string label;  // 10-20 name, e.g. "C3"
  ChannelKind kind{ChannelKind::Eeg};
};

// Trial phase cues in the order they occur within a trial.
enum class EventKind {
  TrialStart,
  CountdownStart,
  GoCue,           // LEDs green: begin MI
  RobotMoveStart,  // robot starts the reaching movement
  StopCue,         // LEDs red: stop MI
  RobotStop,
  ReturnCue,       // LEDs blue: robot returns
  TrialEnd,
};

inline constexpr int kNumEventKinds = 8;

std::string to_string(EventKind kind);
// Throws SessionFormatError for unknown names; `context` names the file/field.
EventKind event_kind_from_string(const std::string& s, const std::string& context = {});

struct EventMarker {
  std::int64_t sample_index{0};
  EventKind kind{EventKind::TrialStart};
  int trial_index{0};
};

// Per-trial phase schedule, all in seconds. Defaults match the task paradigm:
// 3 s rest, 3 s countdown, 1 s cue-to-movement latency, 2.2 s of movement
// until the stop cue, 1 s until the robot stops, 6 s hold, 3.2 s return.
struct TrialTimeline {
  double rest_s{3.0};
  double countdown_s{3.0};
  double bmi_latency_s{1.0};      // GoCue -> RobotMoveStart
  double move_to_stopcue_s{2.2};  // RobotMoveStart -> StopCue
  double emi_latency_s{1.0};      // StopCue -> RobotStop
  double hold_s{6.0};
  double return_s{3.2};

  double trial_seconds() const;
  // Offset of a cue from trial start, in seconds.
  double offset_s(EventKind kind) const;
  void validate() const;  // throws InvalidArgumentError on non-positive phases
};

struct Recording {
  int sample_rate_hz{512};
  std::vector<ChannelInfo> channels;
  // channels x samples; column-major, so one column is one sample frame.
  Eigen::MatrixXd data;
  std::vector<EventMarker> events;  // ordered by sample index
  int run_id{1};

  Eigen::Index n_channels() const { return data.rows(); }
  Eigen::Index n_samples() const { return data.cols(); }

  std::vector<int> eeg_indices() const;
  std::vector<int> eog_indices() const;
  std::vector<std::string> labels(const std::vector<int>& indices) const;
  int channel_index(const std::string& label) const;  // -1 if absent

  // Row-selected copies of the data block.
  Eigen::MatrixXd channel_rows(const std::vector<int>& indices) const;

  // Sample index of a given marker in a given trial, if present.
  std::optional<std::int64_t> marker_sample(int trial_index, EventKind kind) const;
  int n_trials() const;

  // Throws Error naming the violated invariant (channel counts, label
  // uniqueness, marker range/ordering).
  void validate() const;
};

enum class Condition { Rs, Bmi, Dmi, Emi };

std::string to_string(Condition c);

// Classification epochs are 1 s long; dMI is taken from [-1.25 s, -0.25 s)
// relative to the stop cue.
inline constexpr double kEpochSeconds = 1.0;
inline constexpr double kDmiLeadSeconds = 1.25;
inline constexpr double kDmiTailSeconds = 0.25;

struct Epoch {
  Condition condition{Condition::Rs};
  std::int64_t start_sample{0};
  int length_samples{0};
  int trial_index{0};
  int run_id{1};

  std::int64_t end_sample() const { return start_sample + length_samples; }
};

struct EpochExtraction {
  struct Skip {
    int trial_index;
    std::string reason;
  };
  std::vector<Epoch> epochs;
  std::vector<Skip> skipped;
};

// Slices the four condition epochs out of each trial:
//   RS  = [CountdownStart - 1 s, CountdownStart)
//   bMI = [GoCue, GoCue + 1 s)
//   dMI = [StopCue - 1.25 s, StopCue - 0.25 s)
//   eMI = [StopCue, StopCue + 1 s)
// Trials with missing markers (or epochs that would leave the recording) are
// skipped and reported in the result.
EpochExtraction extract_epochs(const Recording& rec, const TrialTimeline& timeline);

// The 22 cortical 10-20 locations used for EEG plus three EOG electrodes.
std::vector<ChannelInfo> standard_channel_set();

}  // namespace midec
