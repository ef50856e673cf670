#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "midec/eog.hpp"
#include "midec/features.hpp"
#include "midec/session_io.hpp"

namespace midec {

// Every tunable in the processing chain, defaulted to the values the
// experiment used. The canonical JSON form is hashed into every output so
// results are traceable to their exact configuration.
struct PipelineConfig {
  // Offline preprocessing: 4th-order zero-phase band-pass 0.1-45 Hz.
  double preproc_band_lo_hz{0.1};
  double preproc_band_hi_hz{45.0};
  int preproc_order{4};

  // Pseudo-online preprocessing: 2nd-order causal band-pass 8-30 Hz.
  double causal_band_lo_hz{8.0};
  double causal_band_hi_hz{30.0};
  int causal_order{2};

  // Feature extraction: 0.5 s windows stepped 1/16 s, 8-30 Hz at 1 Hz.
  double feature_band_lo_hz{8.0};
  double feature_band_hi_hz{30.0};
  double resolution_hz{1.0};
  double window_s{kWindowSeconds};
  double step_s{kStepSeconds};
  bool log_features{false};

  // Classification.
  int top_k_features{10};
  double shrinkage_alpha{0.05};
  double frechet_tol{1e-8};
  int frechet_max_iter{50};
  double chance_alpha{0.05};
  bool recenter_warm_start{true};

  std::uint64_t seed{0};
  // When set, class labels are shuffled with this seed before cross-validation
  // (permutation null).
  std::optional<std::uint64_t> label_permutation_seed;

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  // FNV-1a hash of the canonical JSON form, as 16 hex digits.
  std::string hash() const;
};

struct PreprocessResult {
  SessionBundle bundle;  // preprocessed flag set
  EogFilterMatrix eog;
};

// Offline chain: zero-phase band-pass (all channels), EOG regression fitted on
// the band-passed calibration, common average reference over EEG channels.
// Requires bundle.calibration.
PreprocessResult preprocess_offline(const SessionBundle& raw,
                                    const PipelineConfig& cfg);

// Pseudo-online chain: causal band-pass with per-run fresh state, EOG
// regression fitted on the causally filtered calibration, CAR. Every step is
// causal, so batch output equals streaming output bit-exactly.
PreprocessResult preprocess_causal(const SessionBundle& raw,
                                   const PipelineConfig& cfg);

// Feature matrices of all runs concatenated (skipped trials logged).
FeatureMatrix build_session_features(const SessionBundle& processed, Task task,
                                     const PipelineConfig& cfg);

}  // namespace midec
