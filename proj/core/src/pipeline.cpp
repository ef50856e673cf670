#include "midec/pipeline.hpp"

#include <json.hpp>

namespace midec {

namespace {

using nlohmann::json;

json config_to_json_obj(const PipelineConfig& c) {
  json j;
  j["preproc_band_lo_hz"] = c.preproc_band_lo_hz;
  j["preproc_band_hi_hz"] = c.preproc_band_hi_hz;
  j["preproc_order"] = c.preproc_order;
  j["causal_band_lo_hz"] = c.causal_band_lo_hz;
  j["causal_band_hi_hz"] = c.causal_band_hi_hz;
  j["causal_order"] = c.causal_order;
  j["feature_band_lo_hz"] = c.feature_band_lo_hz;
  j["feature_band_hi_hz"] = c.feature_band_hi_hz;
  j["resolution_hz"] = c.resolution_hz;
  j["window_s"] = c.window_s;
  j["step_s"] = c.step_s;
  j["log_features"] = c.log_features;
  j["top_k_features"] = c.top_k_features;
  j["shrinkage_alpha"] = c.shrinkage_alpha;
  j["frechet_tol"] = c.frechet_tol;
  j["frechet_max_iter"] = c.frechet_max_iter;
  j["chance_alpha"] = c.chance_alpha;
  j["recenter_warm_start"] = c.recenter_warm_start;
  j["seed"] = c.seed;
  if (c.label_permutation_seed) {
    j["label_permutation_seed"] = *c.label_permutation_seed;
  } else {
    j["label_permutation_seed"] = nullptr;
  }
  return j;
}

}  // namespace

std::string PipelineConfig::to_json() const { return config_to_json_obj(*this).dump(2); }

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  PipelineConfig c;
  c.preproc_band_lo_hz = j.value("preproc_band_lo_hz", c.preproc_band_lo_hz);
  c.preproc_band_hi_hz = j.value("preproc_band_hi_hz", c.preproc_band_hi_hz);
  c.preproc_order = j.value("preproc_order", c.preproc_order);
  c.causal_band_lo_hz = j.value("causal_band_lo_hz", c.causal_band_lo_hz);
  c.causal_band_hi_hz = j.value("causal_band_hi_hz", c.causal_band_hi_hz);
  c.causal_order = j.value("causal_order", c.causal_order);
  c.feature_band_lo_hz = j.value("feature_band_lo_hz", c.feature_band_lo_hz);
  c.feature_band_hi_hz = j.value("feature_band_hi_hz", c.feature_band_hi_hz);
  c.resolution_hz = j.value("resolution_hz", c.resolution_hz);
  c.window_s = j.value("window_s", c.window_s);
  c.step_s = j.value("step_s", c.step_s);
  c.log_features = j.value("log_features", c.log_features);
  c.top_k_features = j.value("top_k_features", c.top_k_features);
  c.shrinkage_alpha = j.value("shrinkage_alpha", c.shrinkage_alpha);
  c.frechet_tol = j.value("frechet_tol", c.frechet_tol);
  c.frechet_max_iter = j.value("frechet_max_iter", c.frechet_max_iter);
  c.chance_alpha = j.value("chance_alpha", c.chance_alpha);
  c.recenter_warm_start = j.value("recenter_warm_start", c.recenter_warm_start);
  c.seed = j.value("seed", c.seed);
  if (j.contains("label_permutation_seed") && !j["label_permutation_seed"].is_null()) {
    c.label_permutation_seed = j["label_permutation_seed"].get<std::uint64_t>();
  }
  return c;
}

std::string PipelineConfig::hash() const {
  // FNV-1a over the canonical (key-sorted) JSON dump.
  const std::string text = config_to_json_obj(*this).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// Replaces the EEG rows of `rec` through EOG regression + CAR; EOG rows keep
// their band-passed values (they are excluded from CAR).
void regress_and_rereference(Recording& rec, const EogFilterMatrix& eog_filter) {
  const auto eeg_idx = rec.eeg_indices();
  const auto eog_idx = rec.eog_indices();
  Eigen::MatrixXd eeg = rec.channel_rows(eeg_idx);
  if (!eog_idx.empty()) {
    eeg = apply_eog_filter(eog_filter, eeg, rec.channel_rows(eog_idx));
  }
  eeg = common_average_reference(eeg);
  for (size_t i = 0; i < eeg_idx.size(); ++i) {
    rec.data.row(eeg_idx[i]) = eeg.row(static_cast<Eigen::Index>(i));
  }
}

}  // namespace

PreprocessResult preprocess_offline(const SessionBundle& raw,
                                    const PipelineConfig& cfg) {
  if (raw.preprocessed) {
    throw InvalidArgumentError("session is already preprocessed");
  }
  if (!raw.calibration) {
    throw InvalidArgumentError(
        "offline preprocessing needs a calibration recording for the EOG filter");
  }
  const int fs = raw.runs.front().sample_rate_hz;
  const IirFilter bp = design_butterworth(
      cfg.preproc_order, FilterKind::Bandpass,
      {cfg.preproc_band_lo_hz, cfg.preproc_band_hi_hz}, fs);

  PreprocessResult out;
  out.bundle.timeline = raw.timeline;
  out.bundle.preprocessed = true;

  Recording cal = *raw.calibration;
  cal.data = filter_zero_phase(bp, cal.data);
  out.eog = fit_eog_filter(cal);

  for (const Recording& run : raw.runs) {
    Recording processed = run;
    processed.data = filter_zero_phase(bp, processed.data);
    regress_and_rereference(processed, out.eog);
    out.bundle.runs.push_back(std::move(processed));
  }
  return out;
}

PreprocessResult preprocess_causal(const SessionBundle& raw,
                                   const PipelineConfig& cfg) {
  if (raw.preprocessed) {
    throw InvalidArgumentError("session is already preprocessed");
  }
  if (!raw.calibration) {
    throw InvalidArgumentError(
        "pseudo-online preprocessing needs a calibration recording for the EOG filter");
  }
  const int fs = raw.runs.front().sample_rate_hz;
  const IirFilter bp =
      design_butterworth(cfg.causal_order, FilterKind::Bandpass,
                         {cfg.causal_band_lo_hz, cfg.causal_band_hi_hz}, fs);

  PreprocessResult out;
  out.bundle.timeline = raw.timeline;
  out.bundle.preprocessed = true;

  Recording cal = *raw.calibration;
  {
    FilterState state = make_filter_state(bp, static_cast<int>(cal.n_channels()));
    cal.data = filter_causal(bp, state, cal.data);
  }
  out.eog = fit_eog_filter(cal);

  for (const Recording& run : raw.runs) {
    Recording processed = run;
    FilterState state = make_filter_state(bp, static_cast<int>(run.n_channels()));
    processed.data = filter_causal(bp, state, processed.data);
    regress_and_rereference(processed, out.eog);
    out.bundle.runs.push_back(std::move(processed));
  }
  return out;
}

FeatureMatrix build_session_features(const SessionBundle& processed, Task task,
                                     const PipelineConfig& cfg) {
  std::vector<FeatureMatrix> parts;
  for (const Recording& run : processed.runs) {
    const EpochExtraction extraction = extract_epochs(run, processed.timeline);
    parts.push_back(build_feature_matrix(extraction.epochs, run, task,
                                         cfg.feature_band_lo_hz, cfg.feature_band_hi_hz,
                                         cfg.resolution_hz, cfg.log_features));
  }
  return concat_features(parts);
}

}  // namespace midec
