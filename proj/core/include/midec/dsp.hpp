#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "midec/errors.hpp"

namespace midec {

enum class FilterKind { Lowpass, Highpass, Bandpass };

std::string to_string(FilterKind kind);

// One second-order section, normalized so a0 = 1.
struct BiquadSection {
  double b0{1.0}, b1{0.0}, b2{0.0};
  double a1{0.0}, a2{0.0};

  bool is_stable() const;  // both poles strictly inside the unit circle
};

struct FilterDesignMeta {
  int order{0};  // analog prototype order; a bandpass has 2*order poles
  FilterKind kind{FilterKind::Bandpass};
  std::vector<double> cutoffs_hz;  // one value for low/highpass, two for bandpass
  int sample_rate_hz{0};
};

// Cascade of second-order sections with the overall gain folded into the
// first section.
struct IirFilter {
  std::vector<BiquadSection> sections;
  FilterDesignMeta meta;

  int polynomial_order() const;
  std::complex<double> response_at(double freq_hz) const;
  double magnitude_at(double freq_hz) const;
};

// Bilinear-transform Butterworth design with prewarped cutoffs, factored into
// second-order sections. `order` is the analog prototype order (the matlab/
// scipy convention), so magnitude at every cutoff is exactly 1/sqrt(2).
// Throws InvalidArgumentError for non-positive order or cutoffs outside
// (0, Nyquist).
IirFilter design_butterworth(int order, FilterKind kind,
                             const std::vector<double>& cutoffs_hz,
                             int sample_rate_hz);

// Per-section, per-channel delay-line values for streaming application.
struct FilterState {
  Eigen::MatrixXd z;  // (2 * n_sections) x n_channels
  void reset() { z.setZero(); }
  Eigen::Index n_channels() const { return z.cols(); }
};

FilterState make_filter_state(const IirFilter& filter, int n_channels);

// Causal (direct-form II transposed) filtering of a channels x samples block.
// Output sample t depends only on inputs <= t; splitting a signal into
// arbitrary block partitions gives bit-identical results.
Eigen::MatrixXd filter_causal(const IirFilter& filter, FilterState& state,
                              const Eigen::Ref<const Eigen::MatrixXd>& block);

// Forward-backward filtering with odd-reflection edge padding of
// 3 * polynomial_order samples and steady-state initial conditions. Net phase
// is zero; magnitude is the squared single-pass response. Requires the signal
// to be longer than the padding.
Eigen::MatrixXd filter_zero_phase(const IirFilter& filter,
                                  const Eigen::Ref<const Eigen::MatrixXd>& signal);

// Subtracts the instantaneous mean across channels (rows) from every channel.
// Requires at least two channels.
Eigen::MatrixXd common_average_reference(const Eigen::Ref<const Eigen::MatrixXd>& eeg);

struct Psd {
  std::vector<double> freqs_hz;  // ascending, spacing = resolution_hz
  Eigen::MatrixXd power;         // channels x freqs, uV^2/Hz, nonnegative
};

// Welch PSD: Hann-windowed segments of `window_s` seconds with 50% overlap,
// zero-padded to the smallest multiple of (fs / resolution_hz) that holds one
// segment, averaged. One-sided scaling; frequencies span [0, fs/2].
Psd welch_psd(const Eigen::Ref<const Eigen::MatrixXd>& signal, double window_s,
              int sample_rate_hz, double resolution_hz);

}  // namespace midec
