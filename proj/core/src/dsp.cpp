#include "midec/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace midec {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

struct Zpk {
  std::vector<cplx> zeros;
  std::vector<cplx> poles;
  double gain{1.0};
};

// Analog Butterworth lowpass prototype: unit cutoff, poles on the left unit
// semicircle, no zeros.
Zpk butterworth_prototype(int order) {
  Zpk zpk;
  for (int k = 0; k < order; ++k) {
    const double theta = kPi * (2.0 * k + order + 1.0) / (2.0 * order);
    zpk.poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return zpk;
}

cplx prod_of(const std::vector<cplx>& xs, cplx shift) {
  cplx p(1.0, 0.0);
  for (const auto& x : xs) p *= (shift - x);
  return p;
}

Zpk lp_to_lp(const Zpk& lp, double warped) {
  Zpk out;
  for (auto z : lp.zeros) out.zeros.push_back(z * warped);
  for (auto p : lp.poles) out.poles.push_back(p * warped);
  const int degree = static_cast<int>(lp.poles.size() - lp.zeros.size());
  out.gain = lp.gain * std::pow(warped, degree);
  return out;
}

Zpk lp_to_hp(const Zpk& lp, double warped) {
  Zpk out;
  for (auto z : lp.zeros) out.zeros.push_back(warped / z);
  for (auto p : lp.poles) out.poles.push_back(warped / p);
  const int degree = static_cast<int>(lp.poles.size() - lp.zeros.size());
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
  out.gain = lp.gain * (prod_of(lp.zeros, 0.0) / prod_of(lp.poles, 0.0)).real();
  return out;
}

Zpk lp_to_bp(const Zpk& lp, double warped_lo, double warped_hi) {
  const double bw = warped_hi - warped_lo;
  const double wo2 = warped_lo * warped_hi;
  Zpk out;
  auto split = [&](cplx s, std::vector<cplx>& dst) {
    const cplx half = s * bw / 2.0;
    const cplx root = std::sqrt(half * half - wo2);
    dst.push_back(half + root);
    dst.push_back(half - root);
  };
  for (auto z : lp.zeros) split(z, out.zeros);
  for (auto p : lp.poles) split(p, out.poles);
  const int degree = static_cast<int>(lp.poles.size() - lp.zeros.size());
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(0.0, 0.0);
  out.gain = lp.gain * std::pow(bw, degree);
  return out;
}

// Exact Mobius map s -> z = (2fs + s) / (2fs - s); cutoffs are prewarped by
// the caller so analog and digital responses agree at the design frequencies.
Zpk bilinear(const Zpk& analog, double fs) {
  const double fs2 = 2.0 * fs;
  Zpk out;
  for (auto z : analog.zeros) out.zeros.push_back((fs2 + z) / (fs2 - z));
  for (auto p : analog.poles) out.poles.push_back((fs2 + p) / (fs2 - p));
  const int degree = static_cast<int>(analog.poles.size() - analog.zeros.size());
  for (int i = 0; i < degree; ++i) out.zeros.emplace_back(-1.0, 0.0);
  out.gain = analog.gain *
             (prod_of(analog.zeros, fs2) / prod_of(analog.poles, fs2)).real();
  return out;
}

bool is_real(cplx x) { return std::abs(x.imag()) <= 1e-10 * (1.0 + std::abs(x)); }

// Groups poles into conjugate pairs (plus trailing reals) ordered with the
// poles closest to the unit circle last.
std::vector<std::vector<cplx>> conjugate_pole_groups(std::vector<cplx> poles) {
  std::vector<cplx> upper, reals;
  for (auto p : poles) {
    if (is_real(p)) {
      reals.emplace_back(p.real(), 0.0);
    } else if (p.imag() > 0.0) {
      upper.push_back(p);
    }
  }
  std::sort(upper.begin(), upper.end(), [](cplx a, cplx b) {
    return std::abs(1.0 - std::abs(a)) > std::abs(1.0 - std::abs(b));
  });
  std::sort(reals.begin(), reals.end(),
            [](cplx a, cplx b) { return std::abs(1.0 - std::abs(a)) > std::abs(1.0 - std::abs(b)); });

  std::vector<std::vector<cplx>> groups;
  for (auto p : upper) groups.push_back({p, std::conj(p)});
  for (size_t i = 0; i + 1 < reals.size(); i += 2) {
    groups.push_back({reals[i], reals[i + 1]});
  }
  if (reals.size() % 2 == 1) groups.push_back({reals.back()});
  return groups;
}

BiquadSection section_from(const std::vector<cplx>& poles,
                           const std::vector<cplx>& zeros) {
  BiquadSection s;
  if (poles.size() == 2) {
    s.a1 = -(poles[0] + poles[1]).real();
    s.a2 = (poles[0] * poles[1]).real();
  } else {
    s.a1 = -poles[0].real();
    s.a2 = 0.0;
  }
  if (zeros.size() == 2) {
    s.b0 = 1.0;
    s.b1 = -(zeros[0] + zeros[1]).real();
    s.b2 = (zeros[0] * zeros[1]).real();
  } else if (zeros.size() == 1) {
    s.b0 = 1.0;
    s.b1 = -zeros[0].real();
    s.b2 = 0.0;
  } else {
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = 0.0;
  }
  return s;
}

std::vector<BiquadSection> zpk_to_sos(const Zpk& zpk) {
  auto pole_groups = conjugate_pole_groups(zpk.poles);

  // Butterworth zeros are real (at z = +1 / -1 after the bilinear transform).
  // Hand each section the zero set nearest its poles: a +1/-1 pair for
  // bandpass sections, matching multiplicity otherwise.
  std::vector<cplx> zeros = zpk.zeros;
  std::vector<std::vector<cplx>> zero_groups;
  for (const auto& group : pole_groups) {
    std::vector<cplx> zs;
    for (size_t take = 0; take < group.size() && !zeros.empty(); ++take) {
      const cplx anchor = group.front();
      auto nearest = std::min_element(zeros.begin(), zeros.end(), [&](cplx a, cplx b) {
        return std::abs(a - anchor) < std::abs(b - anchor);
      });
      zs.push_back(*nearest);
      // For paired zeros, alternate: second pick is the farthest of the two
      // candidates closest in magnitude; for Butterworth this hands each
      // bandpass section one zero at +1 and one at -1.
      zeros.erase(nearest);
      if (group.size() == 2 && take == 0 && !zeros.empty()) {
        auto farthest = std::max_element(zeros.begin(), zeros.end(), [&](cplx a, cplx b) {
          return std::abs(a - anchor) < std::abs(b - anchor);
        });
        zs.push_back(*farthest);
        zeros.erase(farthest);
        break;
      }
    }
    zero_groups.push_back(zs);
  }

  std::vector<BiquadSection> sections;
  for (size_t i = 0; i < pole_groups.size(); ++i) {
    sections.push_back(section_from(pole_groups[i], zero_groups[i]));
  }
  // Fold the overall gain into the first section.
  if (!sections.empty()) {
    sections.front().b0 *= zpk.gain;
    sections.front().b1 *= zpk.gain;
    sections.front().b2 *= zpk.gain;
  }
  return sections;
}

}  // namespace

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::Lowpass: return "lowpass";
    case FilterKind::Highpass: return "highpass";
    case FilterKind::Bandpass: return "bandpass";
  }
  return "?";
}

bool BiquadSection::is_stable() const {
  return std::abs(a2) < 1.0 && std::abs(a1) < 1.0 + a2;
}

int IirFilter::polynomial_order() const {
  int order = 0;
  for (const auto& s : sections) order += (s.a2 != 0.0 || s.b2 != 0.0) ? 2 : 1;
  return order;
}

std::complex<double> IirFilter::response_at(double freq_hz) const {
  const double w = 2.0 * kPi * freq_hz / meta.sample_rate_hz;
  const cplx e1 = std::polar(1.0, -w);
  const cplx e2 = std::polar(1.0, -2.0 * w);
  cplx h(1.0, 0.0);
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
  }
  return h;
}

double IirFilter::magnitude_at(double freq_hz) const {
  return std::abs(response_at(freq_hz));
}

IirFilter design_butterworth(int order, FilterKind kind,
                             const std::vector<double>& cutoffs_hz,
                             int sample_rate_hz) {
  if (order <= 0) throw InvalidArgumentError("filter order must be positive");
  if (sample_rate_hz <= 0) throw InvalidArgumentError("sample rate must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  const size_t expected = kind == FilterKind::Bandpass ? 2 : 1;
  if (cutoffs_hz.size() != expected) {
    throw InvalidArgumentError("expected " + std::to_string(expected) +
                               " cutoff(s) for " + to_string(kind) + " design");
  }
  for (double c : cutoffs_hz) {
    if (!(c > 0.0) || c >= nyquist) {
      throw InvalidArgumentError("cutoff " + std::to_string(c) +
                                 " Hz outside (0, Nyquist=" + std::to_string(nyquist) +
                                 ")");
    }
  }

  const double fs = static_cast<double>(sample_rate_hz);
  auto prewarp = [&](double f) { return 2.0 * fs * std::tan(kPi * f / fs); };

  const Zpk lp = butterworth_prototype(order);
  Zpk analog;
  switch (kind) {
    case FilterKind::Lowpass:
      analog = lp_to_lp(lp, prewarp(cutoffs_hz[0]));
      break;
    case FilterKind::Highpass:
      analog = lp_to_hp(lp, prewarp(cutoffs_hz[0]));
      break;
    case FilterKind::Bandpass: {
      if (!(cutoffs_hz[0] < cutoffs_hz[1])) {
        throw InvalidArgumentError("bandpass cutoffs must be ascending");
      }
      analog = lp_to_bp(lp, prewarp(cutoffs_hz[0]), prewarp(cutoffs_hz[1]));
      break;
    }
  }

  IirFilter filter;
  filter.sections = zpk_to_sos(bilinear(analog, fs));
  filter.meta = {order, kind, cutoffs_hz, sample_rate_hz};
  for (const auto& s : filter.sections) {
    if (!s.is_stable()) {
      throw NumericalError("designed filter has an unstable section (order " +
                           std::to_string(order) + " " + to_string(kind) + ")");
    }
  }
  return filter;
}

FilterState make_filter_state(const IirFilter& filter, int n_channels) {
  if (n_channels <= 0) throw InvalidArgumentError("n_channels must be positive");
  FilterState state;
  state.z = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(filter.sections.size()),
                                  n_channels);
  return state;
}

Eigen::MatrixXd filter_causal(const IirFilter& filter, FilterState& state,
                              const Eigen::Ref<const Eigen::MatrixXd>& block) {
  const auto n_sections = static_cast<Eigen::Index>(filter.sections.size());
  if (state.z.rows() != 2 * n_sections || state.z.cols() != block.rows()) {
    throw InvalidArgumentError("filter state shaped for " +
                               std::to_string(state.z.cols()) + " channels, block has " +
                               std::to_string(block.rows()));
  }
  Eigen::MatrixXd y = block;
  for (Eigen::Index s = 0; s < n_sections; ++s) {
    const BiquadSection& q = filter.sections[static_cast<size_t>(s)];
    auto z1 = state.z.row(2 * s);
    auto z2 = state.z.row(2 * s + 1);
    for (Eigen::Index ch = 0; ch < y.rows(); ++ch) {
      double w1 = z1(ch);
      double w2 = z2(ch);
      for (Eigen::Index t = 0; t < y.cols(); ++t) {
        const double x = y(ch, t);
        const double out = q.b0 * x + w1;
        w1 = q.b1 * x - q.a1 * out + w2;
        w2 = q.b2 * x - q.a2 * out;
        y(ch, t) = out;
      }
      z1(ch) = w1;
      z2(ch) = w2;
    }
  }
  return y;
}

namespace {

// Steady-state (unit step) delay-line values per section, direct-form II
// transposed. Scaling by the actual first sample gives transient-free
// startup for signals that begin near a constant level.
struct SectionZi {
  double z1, z2, dc_gain;
};

std::vector<SectionZi> steady_state_zi(const IirFilter& filter) {
  std::vector<SectionZi> zis;
  double upstream_gain = 1.0;
  for (const auto& s : filter.sections) {
    const double denom = 1.0 + s.a1 + s.a2;
    const double num = s.b0 + s.b1 + s.b2;
    const double dc = std::abs(denom) > 1e-300 ? num / denom : 0.0;
    const double u = upstream_gain;
    const double v = dc * u;
    zis.push_back({(s.b1 + s.b2) * u - (s.a1 + s.a2) * v, s.b2 * u - s.a2 * v, dc});
    upstream_gain = v;
  }
  return zis;
}

Eigen::MatrixXd filter_with_zi(const IirFilter& filter,
                               const std::vector<SectionZi>& zis,
                               const Eigen::Ref<const Eigen::MatrixXd>& block) {
  FilterState state = make_filter_state(filter, static_cast<int>(block.rows()));
  for (Eigen::Index s = 0; s < static_cast<Eigen::Index>(zis.size()); ++s) {
    for (Eigen::Index ch = 0; ch < block.rows(); ++ch) {
      state.z(2 * s, ch) = zis[static_cast<size_t>(s)].z1 * block(ch, 0);
      state.z(2 * s + 1, ch) = zis[static_cast<size_t>(s)].z2 * block(ch, 0);
    }
  }
  return filter_causal(filter, state, block);
}

Eigen::MatrixXd reverse_columns(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.rowwise().reverse();
}

}  // namespace

Eigen::MatrixXd filter_zero_phase(const IirFilter& filter,
                                  const Eigen::Ref<const Eigen::MatrixXd>& signal) {
  const Eigen::Index n = signal.cols();
  const Eigen::Index pad = 3 * filter.polynomial_order();
  if (n <= pad) {
    throw InvalidArgumentError("signal of length " + std::to_string(n) +
                               " too short for zero-phase filtering (needs > " +
                               std::to_string(pad) + " samples)");
  }

  // Odd reflection about the first/last sample.
  Eigen::MatrixXd ext(signal.rows(), n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    ext.col(i) = 2.0 * signal.col(0) - signal.col(pad - i);
    ext.col(pad + n + i) = 2.0 * signal.col(n - 1) - signal.col(n - 2 - i);
  }
  ext.middleCols(pad, n) = signal;

  const auto zis = steady_state_zi(filter);
  Eigen::MatrixXd fwd = filter_with_zi(filter, zis, ext);
  Eigen::MatrixXd bwd = reverse_columns(filter_with_zi(filter, zis, reverse_columns(fwd)));
  return bwd.middleCols(pad, n);
}

Eigen::MatrixXd common_average_reference(
    const Eigen::Ref<const Eigen::MatrixXd>& eeg) {
  if (eeg.rows() < 2) {
    throw InvalidArgumentError("common average reference needs >= 2 channels");
  }
  const Eigen::RowVectorXd mean = eeg.colwise().mean();
  return eeg.rowwise() - mean;
}

Psd welch_psd(const Eigen::Ref<const Eigen::MatrixXd>& signal, double window_s,
              int sample_rate_hz, double resolution_hz) {
  if (sample_rate_hz <= 0) throw InvalidArgumentError("sample rate must be positive");
  if (!(resolution_hz > 0.0)) {
    throw InvalidArgumentError("resolution_hz must be positive");
  }
  const auto seg_len = static_cast<Eigen::Index>(std::llround(window_s * sample_rate_hz));
  if (seg_len < 4) throw InvalidArgumentError("window too short");
  if (signal.cols() < seg_len) {
    throw InvalidArgumentError("signal of " + std::to_string(signal.cols()) +
                               " samples shorter than one " +
                               std::to_string(seg_len) + "-sample segment");
  }

  const auto grid_n =
      static_cast<Eigen::Index>(std::llround(sample_rate_hz / resolution_hz));
  if (grid_n < 2) throw InvalidArgumentError("resolution coarser than Nyquist");
  const Eigen::Index mult = (seg_len + grid_n - 1) / grid_n;
  const Eigen::Index nfft = mult * grid_n;
  const Eigen::Index n_out = grid_n / 2 + 1;

  Eigen::VectorXd window(seg_len);
  for (Eigen::Index i = 0; i < seg_len; ++i) {
    window(i) = 0.5 * (1.0 - std::cos(2.0 * kPi * i / seg_len));
  }
  const double scale = 1.0 / (sample_rate_hz * window.squaredNorm());

  const Eigen::Index step = std::max<Eigen::Index>(1, seg_len / 2);
  const Eigen::Index n_segments = 1 + (signal.cols() - seg_len) / step;

  Psd psd;
  psd.freqs_hz.resize(static_cast<size_t>(n_out));
  for (Eigen::Index k = 0; k < n_out; ++k) {
    psd.freqs_hz[static_cast<size_t>(k)] = k * resolution_hz;
  }
  psd.power = Eigen::MatrixXd::Zero(signal.rows(), n_out);

  thread_local Eigen::FFT<double> fft;
  std::vector<double> buf(static_cast<size_t>(nfft));
  std::vector<std::complex<double>> spectrum;

  for (Eigen::Index ch = 0; ch < signal.rows(); ++ch) {
    for (Eigen::Index seg = 0; seg < n_segments; ++seg) {
      const Eigen::Index start = seg * step;
      for (Eigen::Index i = 0; i < seg_len; ++i) {
        buf[static_cast<size_t>(i)] = window(i) * signal(ch, start + i);
      }
      std::fill(buf.begin() + seg_len, buf.end(), 0.0);
      fft.fwd(spectrum, buf);
      for (Eigen::Index k = 0; k < n_out; ++k) {
        const Eigen::Index bin = k * mult;
        double p = scale * std::norm(spectrum[static_cast<size_t>(bin)]);
        if (bin != 0 && 2 * bin != nfft) p *= 2.0;  // one-sided
        psd.power(ch, k) += p;
      }
    }
  }
  psd.power /= static_cast<double>(n_segments);
  return psd;
}

}  // namespace midec
