#include "midec/features.hpp"

#include <algorithm>
#include <cmath>

namespace midec {

std::string to_string(Task task) { return task == Task::Onset ? "onset" : "offset"; }

Task task_from_string(const std::string& s) {
  if (s == "onset") return Task::Onset;
  if (s == "offset") return Task::Offset;
  throw InvalidArgumentError("unknown task \"" + s + "\" (expected onset or offset)");
}

namespace {

struct BandBins {
  Eigen::Index first{0};
  Eigen::Index count{0};
  std::vector<double> freqs;
};

BandBins select_band(const Psd& psd, double lo, double hi) {
  BandBins bins;
  bool started = false;
  for (size_t i = 0; i < psd.freqs_hz.size(); ++i) {
    const double f = psd.freqs_hz[i];
    if (f >= lo - 1e-9 && f <= hi + 1e-9) {
      if (!started) {
        bins.first = static_cast<Eigen::Index>(i);
        started = true;
      }
      ++bins.count;
      bins.freqs.push_back(f);
    }
  }
  if (bins.count == 0) {
    throw InvalidArgumentError("no PSD bins inside band [" + std::to_string(lo) +
                               ", " + std::to_string(hi) + "] Hz");
  }
  return bins;
}

}  // namespace

Spectrogram segment_spectrogram(const Eigen::Ref<const Eigen::MatrixXd>& block,
                                const std::vector<std::string>& labels,
                                int sample_rate_hz, double band_lo_hz,
                                double band_hi_hz, double resolution_hz,
                                double window_s, double step_s, double t0_s) {
  const auto win = static_cast<Eigen::Index>(std::llround(window_s * sample_rate_hz));
  const auto step = static_cast<Eigen::Index>(std::llround(step_s * sample_rate_hz));
  if (step <= 0) throw InvalidArgumentError("window step too small");
  if (block.cols() < win) {
    throw InvalidArgumentError("segment of " + std::to_string(block.cols()) +
                               " samples shorter than one " + std::to_string(win) +
                               "-sample window");
  }
  const Eigen::Index n_windows = 1 + (block.cols() - win) / step;

  Spectrogram spec;
  spec.channel_labels = labels;
  spec.window_s = window_s;
  spec.step_s = step_s;
  spec.times_s.resize(static_cast<size_t>(n_windows));
  for (Eigen::Index w = 0; w < n_windows; ++w) {
    spec.times_s[static_cast<size_t>(w)] =
        t0_s + static_cast<double>(w * step) / sample_rate_hz;
  }

  BandBins bins;
  spec.values.assign(static_cast<size_t>(block.rows()), Eigen::MatrixXd());
  for (Eigen::Index w = 0; w < n_windows; ++w) {
    const Psd psd = welch_psd(block.middleCols(w * step, win), window_s,
                              sample_rate_hz, resolution_hz);
    if (w == 0) {
      bins = select_band(psd, band_lo_hz, band_hi_hz);
      spec.freqs_hz = bins.freqs;
      for (auto& v : spec.values) {
        v = Eigen::MatrixXd::Zero(bins.count, n_windows);
      }
    }
    for (Eigen::Index ch = 0; ch < block.rows(); ++ch) {
      spec.values[static_cast<size_t>(ch)].col(w) =
          psd.power.row(ch).segment(bins.first, bins.count).transpose();
    }
  }
  return spec;
}

Spectrogram sliding_spectrogram(const Recording& rec, double band_lo_hz,
                                double band_hi_hz, double resolution_hz,
                                double window_s, double step_s) {
  const auto eeg_idx = rec.eeg_indices();
  return segment_spectrogram(rec.channel_rows(eeg_idx), rec.labels(eeg_idx),
                             rec.sample_rate_hz, band_lo_hz, band_hi_hz,
                             resolution_hz, window_s, step_s);
}

Psd epoch_mean_psd(const Recording& rec, const Epoch& epoch, double band_lo_hz,
                   double band_hi_hz, double resolution_hz, double window_s,
                   double step_s) {
  const auto eeg_idx = rec.eeg_indices();
  const Spectrogram spec = segment_spectrogram(
      rec.channel_rows(eeg_idx).middleCols(epoch.start_sample, epoch.length_samples),
      rec.labels(eeg_idx), rec.sample_rate_hz, band_lo_hz, band_hi_hz, resolution_hz,
      window_s, step_s);
  Psd out;
  out.freqs_hz = spec.freqs_hz;
  out.power = Eigen::MatrixXd(static_cast<Eigen::Index>(spec.values.size()),
                              spec.n_freqs());
  for (size_t ch = 0; ch < spec.values.size(); ++ch) {
    out.power.row(static_cast<Eigen::Index>(ch)) =
        spec.values[ch].rowwise().mean().transpose();
  }
  return out;
}

Spectrogram erd_transform(const Spectrogram& spec, const Psd& baseline) {
  if (spec.is_erd) throw InvalidArgumentError("spectrogram is already ERD-transformed");
  if (baseline.power.rows() != static_cast<Eigen::Index>(spec.values.size()) ||
      baseline.power.cols() != spec.n_freqs()) {
    throw InvalidArgumentError("baseline shape does not match spectrogram");
  }
  Spectrogram out = spec;
  out.is_erd = true;
  for (size_t ch = 0; ch < spec.values.size(); ++ch) {
    for (Eigen::Index f = 0; f < spec.n_freqs(); ++f) {
      const double b = baseline.power(static_cast<Eigen::Index>(ch), f);
      if (!(b > 0.0)) {
        throw NumericalError(
            "nonpositive baseline power at channel " + spec.channel_labels[ch] +
            ", " + std::to_string(spec.freqs_hz[static_cast<size_t>(f)]) + " Hz");
      }
      for (Eigen::Index t = 0; t < spec.n_times(); ++t) {
        out.values[ch](f, t) = std::log10(spec.values[ch](f, t) / b);
      }
    }
  }
  return out;
}

FeatureMatrix build_feature_matrix(const std::vector<Epoch>& epochs,
                                   const Recording& rec, Task task,
                                   double band_lo_hz, double band_hi_hz,
                                   double resolution_hz, bool log_power) {
  const Condition class0 = task == Task::Onset ? Condition::Rs : Condition::Dmi;
  const Condition class1 = task == Task::Onset ? Condition::Bmi : Condition::Emi;

  std::vector<const Epoch*> used;
  bool saw0 = false, saw1 = false;
  for (const auto& e : epochs) {
    if (e.condition == class0) saw0 = true;
    if (e.condition == class1) saw1 = true;
    if (e.condition == class0 || e.condition == class1) used.push_back(&e);
  }
  if (!saw0 || !saw1) {
    throw InvalidArgumentError("epoch list is missing condition " +
                               to_string(saw0 ? class1 : class0) + " for task " +
                               to_string(task));
  }

  const auto eeg_idx = rec.eeg_indices();
  const auto eeg_labels = rec.labels(eeg_idx);
  const Eigen::MatrixXd eeg = rec.channel_rows(eeg_idx);

  FeatureMatrix fm;
  std::vector<Eigen::VectorXd> rows;
  for (const Epoch* e : used) {
    const Spectrogram spec = segment_spectrogram(
        eeg.middleCols(e->start_sample, e->length_samples), eeg_labels,
        rec.sample_rate_hz, band_lo_hz, band_hi_hz, resolution_hz);
    if (fm.feature_index.empty()) {
      for (const auto& label : eeg_labels) {
        for (double f : spec.freqs_hz) fm.feature_index.emplace_back(label, f);
      }
    }
    const Eigen::Index n_freqs = spec.n_freqs();
    for (Eigen::Index w = 0; w < spec.n_times(); ++w) {
      Eigen::VectorXd row(static_cast<Eigen::Index>(fm.feature_index.size()));
      for (size_t ch = 0; ch < spec.values.size(); ++ch) {
        row.segment(static_cast<Eigen::Index>(ch) * n_freqs, n_freqs) =
            spec.values[ch].col(w);
      }
      if (log_power) {
        row = row.array().max(1e-300).log10();
      }
      rows.push_back(std::move(row));
      fm.labels.push_back(e->condition == class1 ? 1 : 0);
      fm.run_ids.push_back(e->run_id);
      fm.trial_indices.push_back(e->trial_index);
      fm.window_indices.push_back(static_cast<int>(w));
    }
  }

  fm.x.resize(static_cast<Eigen::Index>(rows.size()),
              static_cast<Eigen::Index>(fm.feature_index.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    fm.x.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return fm;
}

FeatureMatrix concat_features(const std::vector<FeatureMatrix>& parts) {
  if (parts.empty()) throw InvalidArgumentError("no feature matrices to concatenate");
  FeatureMatrix out;
  out.feature_index = parts.front().feature_index;
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.feature_index != out.feature_index) {
      throw InvalidArgumentError("feature indices differ between matrices");
    }
    total += p.n_samples();
  }
  out.x.resize(total, parts.front().n_features());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.x.middleRows(at, p.n_samples()) = p.x;
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.run_ids.insert(out.run_ids.end(), p.run_ids.begin(), p.run_ids.end());
    out.trial_indices.insert(out.trial_indices.end(), p.trial_indices.begin(),
                             p.trial_indices.end());
    out.window_indices.insert(out.window_indices.end(), p.window_indices.begin(),
                              p.window_indices.end());
    at += p.n_samples();
  }
  return out;
}

}  // namespace midec
