#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "midec/session_io.hpp"

namespace midec {

// Ground-truth generator configuration. The seed fully determines the output;
// runs derive independent streams so they can be generated in parallel.
struct SynthConfig {
  std::uint64_t seed{7};
  int n_runs{6};
  int n_trials{20};
  int sample_rate_hz{512};

  // Fractional power reduction of the mu (10 Hz) and beta (20 Hz) rhythms
  // while motor imagery is active.
  double erd_depth_mu{0.5};
  double erd_depth_beta{0.3};

  // Scales the band-limited (5-45 Hz) movement noise; its envelope follows
  // the robot velocity (ramps up at movement start, decays late in the
  // deceleration).
  double robot_noise_gain{2.0};

  // Delay between a cue and the subject's (de)activation of motor imagery.
  double response_latency_s{0.2};

  // EOG-channel x EEG-channel contamination coefficients; empty = defaults
  // (frontal-weighted).
  Eigen::MatrixXd eog_mixing;
  // Per-EEG-channel rhythm gains; empty = defaults peaking over C3 and its
  // neighbours (right-arm imagery, contralateral motor cortex).
  std::vector<double> spatial_profile;

  TrialTimeline timeline{};
};

struct GroundTruthTrial {
  int run_id{1};
  int trial_index{0};
  bool control{false};  // passive trial: no MI-related ERD
};

struct GroundTruth {
  std::uint64_t seed{0};
  double erd_depth_mu{0.0};
  double erd_depth_beta{0.0};
  double robot_noise_gain{0.0};
  double response_latency_s{0.0};
  std::vector<GroundTruthTrial> trials;

  std::string to_json() const;
  static GroundTruth from_json(const std::string& text);
};

struct SynthSession {
  SessionBundle bundle;  // runs + calibration + timeline
  GroundTruth truth;
};

// Full MI session: pink background, mu/beta rhythms with MI-driven and
// passive movement-evoked ERD, velocity-shaped robot noise, EOG-contaminated
// EEG, ideal markers on the timeline, and a 90 s eye-movement calibration.
SynthSession generate_session(const SynthConfig& cfg);

// As generate_session, but half of each run's trials are passive controls
// (randomly interleaved): no MI, so their ERD appears only after the robot
// starts moving.
SynthSession generate_control_session(const SynthConfig& cfg);

}  // namespace midec
