#include "midec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <tuple>

#include <json.hpp>

#include "midec/dsp.hpp"

namespace midec {

namespace {

// Amplitudes in microvolts.
constexpr double kPinkSigma = 4.0;
constexpr double kMuSigma = 7.0;
constexpr double kBetaSigma = 3.5;
constexpr double kRobotSigmaUnit = 4.0;  // per unit of robot_noise_gain
constexpr double kEogSensorSigma = 1.5;

constexpr double kMuBandLo = 8.5, kMuBandHi = 13.5;
constexpr double kBetaBandLo = 17.0, kBetaBandHi = 23.0;
constexpr double kRobotBandLo = 5.0, kRobotBandHi = 45.0;

constexpr double kErdOnsetRamp = 0.1;
constexpr double kErdRecoveryRamp = 0.5;
constexpr double kPassiveOnsetDelay = 0.2;
constexpr double kVelocityRampUp = 0.4;
constexpr double kVelocityRampDown = 0.35;  // deceleration late in the eMI second

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 run_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 1)));
}

Eigen::VectorXd white_noise(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = normal(rng);
  return out;
}

// Paul Kellet's three-pole 1/f approximation, rescaled to unit variance.
Eigen::VectorXd pink_noise(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = normal(rng);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    out(i) = b0 + b1 + b2 + w * 0.1848;
  }
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  return sd > 0.0 ? Eigen::VectorXd(out / sd) : out;
}

// Band-limited unit-variance noise via a causal Butterworth band-pass.
Eigen::VectorXd narrowband_noise(std::mt19937_64& rng, Eigen::Index n, double lo,
                                 double hi, int fs) {
  static thread_local std::map<std::tuple<double, double, int>, IirFilter> cache;
  auto key = std::make_tuple(lo, hi, fs);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, design_butterworth(4, FilterKind::Bandpass, {lo, hi}, fs))
             .first;
  }
  FilterState state = make_filter_state(it->second, 1);
  Eigen::MatrixXd filtered = filter_causal(it->second, state, white_noise(rng, n).transpose());
  Eigen::VectorXd out = filtered.row(0).transpose();
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  return sd > 0.0 ? Eigen::VectorXd(out / sd) : out;
}

// Adds a trapezoid (linear ramp up, plateau, linear ramp down) to `env`,
// keeping the pointwise maximum. Times are seconds relative to the recording.
void add_trapezoid(Eigen::VectorXd& env, int fs, double up_start_s, double up_len_s,
                   double down_start_s, double down_len_s) {
  const auto n = env.size();
  const auto first = std::max<Eigen::Index>(
      0, static_cast<Eigen::Index>(std::floor(up_start_s * fs)));
  const auto last = std::min<Eigen::Index>(
      n, static_cast<Eigen::Index>(std::ceil((down_start_s + down_len_s) * fs)) + 1);
  for (Eigen::Index i = first; i < last; ++i) {
    const double t = static_cast<double>(i) / fs;
    double v;
    if (t < up_start_s) {
      v = 0.0;
    } else if (t < up_start_s + up_len_s) {
      v = (t - up_start_s) / up_len_s;
    } else if (t < down_start_s) {
      v = 1.0;
    } else if (t < down_start_s + down_len_s) {
      v = 1.0 - (t - down_start_s) / down_len_s;
    } else {
      v = 0.0;
    }
    env(i) = std::max(env(i), v);
  }
}

struct TrialClock {
  std::int64_t start_sample;
  double start_s;
  const TrialTimeline* timeline;

  double at(EventKind kind) const { return start_s + timeline->offset_s(kind); }
};

struct EogSignals {
  Eigen::MatrixXd channels;  // 3 x n
};

// Three linearly independent electrode signals built from horizontal
// saccades, slow vertical drift, and blinks.
EogSignals make_eog(std::mt19937_64& rng, Eigen::Index n, int fs, double amplitude,
                    double event_rate_hz) {
  std::exponential_distribution<double> gap(event_rate_hz);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  Eigen::VectorXd saccade = Eigen::VectorXd::Zero(n);
  {
    double level = 0.0;
    Eigen::Index i = 0;
    while (i < n) {
      const auto hold = static_cast<Eigen::Index>((gap(rng) + 0.2) * fs);
      const double target = amplitude * unit(rng);
      const auto ramp = static_cast<Eigen::Index>(0.15 * fs);
      for (Eigen::Index k = 0; k < hold && i < n; ++k, ++i) {
        const double frac = ramp > 0 ? std::min(1.0, static_cast<double>(k) / ramp) : 1.0;
        saccade(i) = level + (target - level) * frac;
      }
      level = target;
    }
  }

  Eigen::VectorXd blink = Eigen::VectorXd::Zero(n);
  {
    Eigen::Index i = static_cast<Eigen::Index>(gap(rng) * fs);
    const auto width = static_cast<Eigen::Index>(0.25 * fs);
    while (i < n) {
      const double peak = amplitude * (1.2 + 0.3 * unit(rng));
      for (Eigen::Index k = 0; k < width && i + k < n; ++k) {
        const double phase = static_cast<double>(k) / width;
        blink(i + k) += peak * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * phase));
      }
      i += width + static_cast<Eigen::Index>((gap(rng) + 0.3) * fs);
    }
  }

  const Eigen::VectorXd drift = narrowband_noise(rng, n, 0.2, 1.5, fs) * (0.3 * amplitude);

  EogSignals out;
  out.channels.resize(3, n);
  const Eigen::VectorXd ch0 =
      saccade + 0.40 * blink + kEogSensorSigma * white_noise(rng, n);
  const Eigen::VectorXd ch1 =
      -0.9 * saccade + 0.45 * blink + kEogSensorSigma * white_noise(rng, n);
  const Eigen::VectorXd ch2 =
      0.2 * saccade + blink + drift + kEogSensorSigma * white_noise(rng, n);
  out.channels.row(0) = ch0.transpose();
  out.channels.row(1) = ch1.transpose();
  out.channels.row(2) = ch2.transpose();
  return out;
}

Eigen::MatrixXd default_eog_mixing(const std::vector<ChannelInfo>& channels) {
  const auto eeg_count = std::count_if(channels.begin(), channels.end(), [](auto& c) {
    return c.kind == ChannelKind::Eeg;
  });
  Eigen::MatrixXd b(3, eeg_count);
  Eigen::Index col = 0;
  for (const auto& ch : channels) {
    if (ch.kind != ChannelKind::Eeg) continue;
    double w = 0.02;  // parietal/occipital default
    if (ch.label.starts_with("F") && !ch.label.starts_with("FC")) {
      w = 0.15;
    } else if (ch.label.starts_with("FC")) {
      w = 0.08;
    } else if (ch.label.starts_with("C")) {
      w = 0.05;
    }
    b(0, col) = 0.8 * w;
    b(1, col) = 0.7 * w;
    b(2, col) = 1.0 * w;
    ++col;
  }
  return b;
}

std::vector<double> default_spatial_profile(const std::vector<ChannelInfo>& channels) {
  std::vector<double> profile;
  for (const auto& ch : channels) {
    if (ch.kind != ChannelKind::Eeg) continue;
    double g = 0.12;
    if (ch.label == "C3") {
      g = 1.0;
    } else if (ch.label == "FC5" || ch.label == "FC1" || ch.label == "CP5" ||
               ch.label == "CP1") {
      g = 0.6;
    } else if (ch.label == "Cz") {
      g = 0.45;
    } else if (ch.label == "C4" || ch.label == "FC2" || ch.label == "CP2") {
      g = 0.25;
    }
    profile.push_back(g);
  }
  return profile;
}

struct RunPlan {
  std::vector<bool> control;  // per trial
};

Recording make_run(const SynthConfig& cfg, int run_id, const RunPlan& plan,
                   const std::vector<ChannelInfo>& channels,
                   const Eigen::MatrixXd& mixing, const std::vector<double>& profile) {
  const int fs = cfg.sample_rate_hz;
  const auto stride =
      static_cast<std::int64_t>(std::llround(cfg.timeline.trial_seconds() * fs));
  const Eigen::Index n = cfg.n_trials * stride + fs;  // 1 s tail

  auto rng = run_rng(cfg.seed, static_cast<std::uint64_t>(run_id));

  // Trial clocks and envelopes.
  std::vector<TrialClock> trials;
  for (int t = 0; t < cfg.n_trials; ++t) {
    trials.push_back({t * stride, static_cast<double>(t * stride) / fs, &cfg.timeline});
  }

  Eigen::VectorXd erd_env = Eigen::VectorXd::Zero(n);       // MI + passive
  Eigen::VectorXd velocity_env = Eigen::VectorXd::Zero(n);  // robot noise
  for (int t = 0; t < cfg.n_trials; ++t) {
    const TrialClock& clk = trials[static_cast<size_t>(t)];
    const bool control = plan.control[static_cast<size_t>(t)];
    if (!control) {
      add_trapezoid(erd_env, fs, clk.at(EventKind::GoCue) + cfg.response_latency_s,
                    kErdOnsetRamp, clk.at(EventKind::StopCue) + cfg.response_latency_s,
                    kErdRecoveryRamp);
    }
    // Movement-evoked desynchronization appears in every trial once the robot
    // is moving, and again during the return.
    add_trapezoid(erd_env, fs,
                  clk.at(EventKind::RobotMoveStart) + kPassiveOnsetDelay,
                  kPassiveOnsetDelay, clk.at(EventKind::RobotStop), kErdRecoveryRamp);
    add_trapezoid(erd_env, fs, clk.at(EventKind::ReturnCue) + kPassiveOnsetDelay,
                  kPassiveOnsetDelay, clk.at(EventKind::TrialEnd), kErdRecoveryRamp);

    add_trapezoid(velocity_env, fs, clk.at(EventKind::RobotMoveStart), kVelocityRampUp,
                  clk.at(EventKind::StopCue) + cfg.timeline.emi_latency_s -
                      kVelocityRampDown,
                  kVelocityRampDown);
    add_trapezoid(velocity_env, fs, clk.at(EventKind::ReturnCue), kVelocityRampUp,
                  clk.at(EventKind::TrialEnd) - 0.5, 0.5);
  }

  const Eigen::VectorXd mu_amp =
      (1.0 - cfg.erd_depth_mu * erd_env.array()).sqrt().matrix();
  const Eigen::VectorXd beta_amp =
      (1.0 - cfg.erd_depth_beta * erd_env.array()).sqrt().matrix();

  Recording rec;
  rec.sample_rate_hz = fs;
  rec.channels = channels;
  rec.run_id = run_id;
  rec.data.resize(static_cast<Eigen::Index>(channels.size()), n);

  const EogSignals eog = make_eog(rng, n, fs, 80.0, 0.25);

  Eigen::Index eeg_row = 0;
  for (size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].kind != ChannelKind::Eeg) continue;
    const double g = profile[static_cast<size_t>(eeg_row)];
    Eigen::VectorXd x = kPinkSigma * pink_noise(rng, n);
    x += (kMuSigma * g) *
         narrowband_noise(rng, n, kMuBandLo, kMuBandHi, fs).cwiseProduct(mu_amp);
    x += (kBetaSigma * g) *
         narrowband_noise(rng, n, kBetaBandLo, kBetaBandHi, fs).cwiseProduct(beta_amp);
    if (cfg.robot_noise_gain > 0.0) {
      x += (kRobotSigmaUnit * cfg.robot_noise_gain) *
           narrowband_noise(rng, n, kRobotBandLo, kRobotBandHi, fs)
               .cwiseProduct(velocity_env);
    }
    x += (mixing.col(eeg_row).transpose() * eog.channels).transpose();
    rec.data.row(static_cast<Eigen::Index>(c)) = x.transpose();
    ++eeg_row;
  }
  Eigen::Index eog_row = 0;
  for (size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].kind != ChannelKind::Eog) continue;
    rec.data.row(static_cast<Eigen::Index>(c)) = eog.channels.row(eog_row++);
  }

  // Ideal markers on the rounded timeline.
  for (int t = 0; t < cfg.n_trials; ++t) {
    const std::int64_t s0 = trials[static_cast<size_t>(t)].start_sample;
    for (int k = 0; k < kNumEventKinds; ++k) {
      const auto kind = static_cast<EventKind>(k);
      std::int64_t at =
          s0 + static_cast<std::int64_t>(std::llround(cfg.timeline.offset_s(kind) * fs));
      rec.events.push_back({std::min<std::int64_t>(at, n - 1), kind, t});
    }
  }
  return rec;
}

Recording make_calibration(const SynthConfig& cfg,
                           const std::vector<ChannelInfo>& channels,
                           const Eigen::MatrixXd& mixing) {
  const int fs = cfg.sample_rate_hz;
  const Eigen::Index n = 90 * fs;
  auto rng = run_rng(cfg.seed, 0xca11b);

  Recording rec;
  rec.sample_rate_hz = fs;
  rec.channels = channels;
  rec.run_id = 0;
  rec.data.resize(static_cast<Eigen::Index>(channels.size()), n);

  // Dense, high-amplitude eye movements.
  const EogSignals eog = make_eog(rng, n, fs, 220.0, 0.8);

  Eigen::Index eeg_row = 0;
  for (size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].kind != ChannelKind::Eeg) continue;
    Eigen::VectorXd x = kPinkSigma * pink_noise(rng, n);
    x += (mixing.col(eeg_row).transpose() * eog.channels).transpose();
    rec.data.row(static_cast<Eigen::Index>(c)) = x.transpose();
    ++eeg_row;
  }
  Eigen::Index eog_row = 0;
  for (size_t c = 0; c < channels.size(); ++c) {
    if (channels[c].kind != ChannelKind::Eog) continue;
    rec.data.row(static_cast<Eigen::Index>(c)) = eog.channels.row(eog_row++);
  }
  return rec;
}

SynthSession generate(const SynthConfig& cfg, bool with_controls) {
  cfg.timeline.validate();
  if (cfg.n_runs < 1 || cfg.n_trials < 1) {
    throw InvalidArgumentError("need at least one run and one trial");
  }
  if (cfg.erd_depth_mu < 0.0 || cfg.erd_depth_mu > 1.0 || cfg.erd_depth_beta < 0.0 ||
      cfg.erd_depth_beta > 1.0) {
    throw InvalidArgumentError("ERD depths must be in [0, 1]");
  }
  if (with_controls && cfg.n_trials % 2 != 0) {
    throw InvalidArgumentError("control sessions need an even trial count");
  }

  const auto channels = standard_channel_set();
  const auto n_eeg = std::count_if(channels.begin(), channels.end(), [](auto& c) {
    return c.kind == ChannelKind::Eeg;
  });

  Eigen::MatrixXd mixing =
      cfg.eog_mixing.size() > 0 ? cfg.eog_mixing : default_eog_mixing(channels);
  if (mixing.rows() != 3 || mixing.cols() != n_eeg) {
    throw InvalidArgumentError("eog_mixing must be 3 x " + std::to_string(n_eeg));
  }
  std::vector<double> profile =
      cfg.spatial_profile.empty() ? default_spatial_profile(channels) : cfg.spatial_profile;
  if (static_cast<Eigen::Index>(profile.size()) != n_eeg) {
    throw InvalidArgumentError("spatial_profile must have " + std::to_string(n_eeg) +
                               " entries");
  }

  SynthSession session;
  session.bundle.timeline = cfg.timeline;
  session.truth.seed = cfg.seed;
  session.truth.erd_depth_mu = cfg.erd_depth_mu;
  session.truth.erd_depth_beta = cfg.erd_depth_beta;
  session.truth.robot_noise_gain = cfg.robot_noise_gain;
  session.truth.response_latency_s = cfg.response_latency_s;

  for (int run = 1; run <= cfg.n_runs; ++run) {
    RunPlan plan;
    plan.control.assign(static_cast<size_t>(cfg.n_trials), false);
    if (with_controls) {
      for (int t = 0; t < cfg.n_trials / 2; ++t) plan.control[static_cast<size_t>(t)] = true;
      auto rng = run_rng(cfg.seed, 0x5000 + static_cast<std::uint64_t>(run));
      std::shuffle(plan.control.begin(), plan.control.end(), rng);
    }
    session.bundle.runs.push_back(make_run(cfg, run, plan, channels, mixing, profile));
    for (int t = 0; t < cfg.n_trials; ++t) {
      session.truth.trials.push_back({run, t, plan.control[static_cast<size_t>(t)]});
    }
  }
  session.bundle.calibration = make_calibration(cfg, channels, mixing);
  return session;
}

}  // namespace

std::string GroundTruth::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["erd_depth_mu"] = erd_depth_mu;
  j["erd_depth_beta"] = erd_depth_beta;
  j["robot_noise_gain"] = robot_noise_gain;
  j["response_latency_s"] = response_latency_s;
  nlohmann::json trials_json = nlohmann::json::array();
  for (const auto& t : trials) {
    trials_json.push_back({{"run_id", t.run_id},
                           {"trial_index", t.trial_index},
                           {"control", t.control}});
  }
  j["trials"] = trials_json;
  return j.dump(2);
}

GroundTruth GroundTruth::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GroundTruth g;
  g.seed = j.at("seed").get<std::uint64_t>();
  g.erd_depth_mu = j.at("erd_depth_mu").get<double>();
  g.erd_depth_beta = j.at("erd_depth_beta").get<double>();
  g.robot_noise_gain = j.at("robot_noise_gain").get<double>();
  g.response_latency_s = j.at("response_latency_s").get<double>();
  for (const auto& t : j.at("trials")) {
    g.trials.push_back({t.at("run_id").get<int>(), t.at("trial_index").get<int>(),
                        t.at("control").get<bool>()});
  }
  return g;
}

SynthSession generate_session(const SynthConfig& cfg) { return generate(cfg, false); }

SynthSession generate_control_session(const SynthConfig& cfg) {
  return generate(cfg, true);
}

}  // namespace midec
