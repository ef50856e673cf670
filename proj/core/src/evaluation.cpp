#include "midec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/distributions/binomial.hpp>
#include <json.hpp>

#include "midec/dlda.hpp"
#include "midec/log.hpp"
#include "midec/version.hpp"

namespace midec {

double chance_level(std::int64_t n_samples, double alpha) {
  if (n_samples < 1) throw InvalidArgumentError("chance_level: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgumentError("chance_level: alpha must be in (0, 1)");
  }
  const boost::math::binomial_distribution<double> dist(
      static_cast<double>(n_samples), 0.5);
  // Smallest k with P(X >= k) <= alpha, via binary search on the monotone tail.
  std::int64_t lo = 0, hi = n_samples;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    const double tail =
        mid == 0 ? 1.0
                 : boost::math::cdf(boost::math::complement(dist,
                                                            static_cast<double>(mid - 1)));
    if (tail <= alpha) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  // The chance level is the largest still-insignificant accuracy.
  return static_cast<double>(lo - 1) / static_cast<double>(n_samples);
}

namespace {

struct Aggregate {
  double mean, stddev, min, max;
};

Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a{0.0, 0.0, 0.0, 0.0};
  if (xs.empty()) return a;
  a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  a.min = *std::min_element(xs.begin(), xs.end());
  a.max = *std::max_element(xs.begin(), xs.end());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

}  // namespace

void EvalReport::finalize(double chance_alpha) {
  std::vector<double> train, test;
  std::int64_t n_test_total = 0;
  for (const auto& f : folds) {
    train.push_back(f.train_accuracy);
    test.push_back(f.test_accuracy);
    n_test_total += f.n_test;
  }
  const Aggregate at = aggregate(train);
  const Aggregate ae = aggregate(test);
  mean_train = at.mean;
  std_train = at.stddev;
  min_train = at.min;
  max_train = at.max;
  mean_test = ae.mean;
  std_test = ae.stddev;
  min_test = ae.min;
  max_test = ae.max;
  if (!folds.empty() && n_test_total > 0) {
    chance = chance_level(n_test_total / static_cast<std::int64_t>(folds.size()),
                          chance_alpha);
  }
}

std::vector<WindowPoint> time_resolved_accuracy(
    const std::vector<WindowTally>& per_fold, double step_s, double first_offset_s) {
  if (per_fold.empty()) throw InvalidArgumentError("no folds to aggregate");
  std::map<int, std::vector<double>> acc_by_window;
  for (const auto& fold : per_fold) {
    for (const auto& [w, counts] : fold) {
      if (counts.second > 0) {
        acc_by_window[w].push_back(static_cast<double>(counts.first) /
                                   static_cast<double>(counts.second));
      }
    }
  }
  if (acc_by_window.empty()) throw InvalidArgumentError("no window tallies present");
  std::vector<WindowPoint> curve;
  for (const auto& [w, accs] : acc_by_window) {
    const Aggregate a = aggregate(accs);
    curve.push_back({w, first_offset_s + w * step_s, a.mean, a.stddev});
  }
  return curve;
}

namespace {

std::vector<int> permuted_labels(const std::vector<int>& labels, std::uint64_t seed) {
  std::vector<int> out = labels;
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

EvalReport loro_cv(const SessionBundle& session, Task task,
                   const PipelineConfig& cfg) {
  const SessionBundle& processed =
      session.preprocessed ? session : preprocess_offline(session, cfg).bundle;
  if (processed.runs.size() < 2) {
    throw InvalidArgumentError("leave-one-run-out needs >= 2 runs");
  }

  FeatureMatrix features = build_session_features(processed, task, cfg);
  if (cfg.label_permutation_seed) {
    features.labels = permuted_labels(features.labels, *cfg.label_permutation_seed);
  }

  EvalReport report;
  report.task = task;
  report.pipeline = "dlda_offline";
  std::vector<WindowTally> tallies;

  for (const Recording& held_out : processed.runs) {
    const int run = held_out.run_id;
    std::vector<Eigen::Index> train_rows, test_rows;
    for (Eigen::Index i = 0; i < features.n_samples(); ++i) {
      (features.run_ids[static_cast<size_t>(i)] == run ? test_rows : train_rows)
          .push_back(i);
    }
    if (test_rows.empty()) {
      log::warn("fold for run " + std::to_string(run) + " skipped: no valid trials");
      continue;
    }

    FeatureMatrix train;
    train.feature_index = features.feature_index;
    train.x.resize(static_cast<Eigen::Index>(train_rows.size()), features.n_features());
    for (size_t i = 0; i < train_rows.size(); ++i) {
      const Eigen::Index r = train_rows[i];
      train.x.row(static_cast<Eigen::Index>(i)) = features.x.row(r);
      train.labels.push_back(features.labels[static_cast<size_t>(r)]);
      train.run_ids.push_back(features.run_ids[static_cast<size_t>(r)]);
      train.trial_indices.push_back(features.trial_indices[static_cast<size_t>(r)]);
      train.window_indices.push_back(features.window_indices[static_cast<size_t>(r)]);
    }

    const FisherRanking ranking = fisher_scores(train, cfg.top_k_features);
    const DldaModel model = dlda_fit(train, ranking.selected);
    if (model.variance_floor_warning) {
      log::warn("fold " + std::to_string(run) +
                ": variance floor hit on most selected features");
    }

    FoldResult fold;
    fold.held_out_run = run;
    fold.selected_features = ranking.selected;
    fold.n_train = static_cast<std::int64_t>(train_rows.size());
    fold.n_test = static_cast<std::int64_t>(test_rows.size());

    std::int64_t correct_train = 0;
    for (size_t i = 0; i < train_rows.size(); ++i) {
      const int pred = dlda_predict(model, train.x.row(static_cast<Eigen::Index>(i)).transpose());
      if (pred == train.labels[i]) ++correct_train;
    }
    fold.train_accuracy =
        static_cast<double>(correct_train) / static_cast<double>(fold.n_train);

    WindowTally tally;
    std::int64_t correct_test = 0;
    for (Eigen::Index r : test_rows) {
      const int pred = dlda_predict(model, features.x.row(r).transpose());
      const int truth = features.labels[static_cast<size_t>(r)];
      auto& [good, total] = tally[features.window_indices[static_cast<size_t>(r)]];
      if (pred == truth) {
        ++correct_test;
        ++good;
      }
      ++total;
    }
    fold.test_accuracy =
        static_cast<double>(correct_test) / static_cast<double>(fold.n_test);
    tallies.push_back(std::move(tally));
    report.folds.push_back(std::move(fold));
  }

  if (report.folds.empty()) {
    throw InvalidArgumentError("no usable folds (all runs lack valid trials)");
  }
  report.window_curve = time_resolved_accuracy(tallies, cfg.step_s);
  report.finalize(cfg.chance_alpha);
  return report;
}

std::vector<std::pair<std::int64_t, Eigen::MatrixXd>> sliding_covariances(
    const Eigen::Ref<const Eigen::MatrixXd>& signal, Eigen::Index win_samples,
    Eigen::Index step_samples, double shrinkage) {
  const Eigen::Index n_ch = signal.rows();
  const Eigen::Index n = signal.cols();
  if (win_samples < 2 || step_samples < 1) {
    throw InvalidArgumentError("sliding covariance: bad window/step");
  }
  std::vector<std::pair<std::int64_t, Eigen::MatrixXd>> out;
  if (n < win_samples) return out;

  // Causal prefix sums of x and x x^T; each window covariance comes from the
  // difference of two prefixes.
  Eigen::MatrixXd sum_x = Eigen::MatrixXd::Zero(n_ch, n + 1);
  std::vector<Eigen::MatrixXd> sum_xxt(static_cast<size_t>(n + 1),
                                       Eigen::MatrixXd::Zero(n_ch, n_ch));
  // Only prefixes at window boundaries are needed; still O(n) outer products.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_ch, n_ch);
  for (Eigen::Index t = 0; t < n; ++t) {
    acc.selfadjointView<Eigen::Lower>().rankUpdate(signal.col(t));
    sum_x.col(t + 1) = sum_x.col(t) + signal.col(t);
    sum_xxt[static_cast<size_t>(t + 1)] = acc;
  }

  const double denom = static_cast<double>(win_samples - 1);
  for (Eigen::Index end = win_samples; end <= n; end += step_samples) {
    const Eigen::Index start = end - win_samples;
    Eigen::MatrixXd second =
        (sum_xxt[static_cast<size_t>(end)] - sum_xxt[static_cast<size_t>(start)])
            .selfadjointView<Eigen::Lower>();
    const Eigen::VectorXd mean =
        (sum_x.col(end) - sum_x.col(start)) / static_cast<double>(win_samples);
    Eigen::MatrixXd cov =
        (second - static_cast<double>(win_samples) * mean * mean.transpose()) / denom;
    cov = 0.5 * (cov + cov.transpose());
    const double trace_mean = cov.trace() / static_cast<double>(n_ch);
    Eigen::MatrixXd c = (1.0 - shrinkage) * cov +
                        shrinkage * trace_mean * Eigen::MatrixXd::Identity(n_ch, n_ch);
    out.emplace_back(end, 0.5 * (c + c.transpose()));
  }
  return out;
}

namespace {

struct EpochWindowRef {
  const Epoch* epoch;
  std::int64_t aligned_end;  // epoch end (dMI already offset), on sample grid
};

// Alignment cue per task for the prediction trace.
EventKind trace_cue(Task task) {
  return task == Task::Onset ? EventKind::GoCue : EventKind::StopCue;
}

}  // namespace

std::pair<EvalReport, PredictionTrace> pseudo_online_replay(
    const SessionBundle& session, Task task, const PipelineConfig& cfg) {
  if (session.preprocessed) {
    throw InvalidArgumentError(
        "pseudo-online replay re-runs preprocessing causally; pass the raw session");
  }
  const PreprocessResult processed = preprocess_causal(session, cfg);
  const auto& bundle = processed.bundle;
  if (bundle.runs.size() < 2) {
    throw InvalidArgumentError("leave-one-run-out needs >= 2 runs");
  }

  const int fs = bundle.runs.front().sample_rate_hz;
  const auto win = static_cast<Eigen::Index>(std::llround(kEpochSeconds * fs));
  const auto step = static_cast<Eigen::Index>(std::llround(cfg.step_s * fs));
  const Condition class0 = task == Task::Onset ? Condition::Rs : Condition::Dmi;
  const Condition class1 = task == Task::Onset ? Condition::Bmi : Condition::Emi;

  // Per-run causal EEG blocks and epoch lists, computed once.
  std::vector<Eigen::MatrixXd> eeg_blocks;
  std::vector<std::vector<Epoch>> run_epochs;
  for (const Recording& run : bundle.runs) {
    eeg_blocks.push_back(run.channel_rows(run.eeg_indices()));
    run_epochs.push_back(extract_epochs(run, bundle.timeline).epochs);
  }

  EvalReport report;
  report.task = task;
  report.pipeline = "mdm_pseudo_online";
  std::vector<WindowTally> window_tallies;

  // Trace bins on the 1/16 s grid relative to the cue, pooled across folds.
  const double bin_s = cfg.step_s;
  const int bin_lo = static_cast<int>(std::lround(-2.5 / bin_s));
  const int bin_hi = static_cast<int>(std::lround(2.0 / bin_s));
  std::map<int, std::vector<double>> trace_bins;

  for (size_t fold_idx = 0; fold_idx < bundle.runs.size(); ++fold_idx) {
    const Recording& test_run = bundle.runs[fold_idx];

    // Train on the 1 s epochs of every other run.
    std::vector<SpdSample> train_samples;
    for (size_t r = 0; r < bundle.runs.size(); ++r) {
      if (r == fold_idx) continue;
      for (const Epoch& e : run_epochs[r]) {
        if (e.condition != class0 && e.condition != class1) continue;
        SpdSample s = epoch_covariance(
            eeg_blocks[r].middleCols(e.start_sample, e.length_samples),
            cfg.shrinkage_alpha);
        s.label = e.condition == class1 ? 1 : 0;
        s.trial_index = e.trial_index;
        s.run_id = e.run_id;
        train_samples.push_back(std::move(s));
      }
    }
    if (train_samples.empty()) {
      log::warn("replay fold " + std::to_string(test_run.run_id) +
                " skipped: no training epochs");
      continue;
    }

    // Distribution matching: whiten training covariances by their pooled
    // Frechet mean, then fit class means.
    const Eigen::MatrixXd train_mean =
        frechet_mean_of(train_samples, cfg.frechet_tol, cfg.frechet_max_iter);
    const Eigen::MatrixXd whiten = spd_inv_sqrt(train_mean);
    for (auto& s : train_samples) {
      Eigen::MatrixXd w = whiten * s.c * whiten;
      s.c = 0.5 * (w + w.transpose());
    }
    const MdmModel model =
        mdm_fit(train_samples, cfg.frechet_tol, cfg.frechet_max_iter);

    RecenterState recenter =
        cfg.recenter_warm_start
            ? RecenterState::from(train_mean, 1)
            : RecenterState::identity(static_cast<int>(train_mean.rows()));

    // Strictly causal sweep over the held-out run, predictions in arrival
    // order keyed by window end sample.
    const auto covs = sliding_covariances(eeg_blocks[fold_idx], win, step,
                                          cfg.shrinkage_alpha);
    std::vector<std::pair<std::int64_t, int>> predictions;
    predictions.reserve(covs.size());
    for (const auto& [end, c] : covs) {
      const Eigen::MatrixXd transformed = recenter_update(recenter, c);
      predictions.emplace_back(end, mdm_predict(model, transformed));
    }
    auto prediction_at = [&](std::int64_t target_end) -> int {
      // Nearest decision window on the step grid (within half a step).
      if (predictions.empty()) return -1;
      const std::int64_t first = predictions.front().first;
      std::int64_t idx = (target_end - first + step / 2) / step;
      idx = std::clamp<std::int64_t>(idx, 0,
                                     static_cast<std::int64_t>(predictions.size()) - 1);
      return predictions[static_cast<size_t>(idx)].second;
    };

    // Headline accuracy: the decision window aligned with each trained epoch.
    FoldResult fold;
    fold.held_out_run = test_run.run_id;
    fold.n_train = static_cast<std::int64_t>(train_samples.size());
    std::int64_t correct = 0, total = 0;
    WindowTally tally;
    for (const Epoch& e : run_epochs[fold_idx]) {
      if (e.condition != class0 && e.condition != class1) continue;
      const int truth = e.condition == class1 ? 1 : 0;
      const int aligned = prediction_at(e.end_sample());
      if (aligned >= 0) {
        if (aligned == truth) ++correct;
        ++total;
      }
      // Transition curve: decision times stepping through (start, end].
      for (Eigen::Index k = 1; k * step <= win; ++k) {
        const int pred = prediction_at(e.start_sample + k * step);
        if (pred < 0) continue;
        auto& [good, cnt] = tally[static_cast<int>(k - 1)];
        if (pred == truth) ++good;
        ++cnt;
      }
    }
    fold.n_test = total;
    fold.test_accuracy = total > 0 ? static_cast<double>(correct) /
                                         static_cast<double>(total)
                                   : 0.0;

    // Training accuracy of the fitted MDM on its own (whitened) epochs.
    std::int64_t correct_train = 0;
    for (const auto& s : train_samples) {
      if (mdm_predict(model, s.c) == s.label) ++correct_train;
    }
    fold.train_accuracy =
        static_cast<double>(correct_train) / static_cast<double>(fold.n_train);

    window_tallies.push_back(std::move(tally));
    report.folds.push_back(std::move(fold));

    // Prediction trace around the cue, pooled over trials.
    const EventKind cue = trace_cue(task);
    for (int t = 0; t < test_run.n_trials(); ++t) {
      const auto cue_sample = test_run.marker_sample(t, cue);
      if (!cue_sample) continue;
      for (const auto& [end, pred] : predictions) {
        const double rel_s = static_cast<double>(end - *cue_sample) / fs;
        const int bin = static_cast<int>(std::lround(rel_s / bin_s));
        if (bin < bin_lo || bin > bin_hi) continue;
        trace_bins[bin].push_back(static_cast<double>(pred));
      }
    }
  }

  if (report.folds.empty()) {
    throw InvalidArgumentError("no usable replay folds");
  }
  report.window_curve = time_resolved_accuracy(window_tallies, cfg.step_s, cfg.step_s);
  report.finalize(cfg.chance_alpha);

  PredictionTrace trace;
  trace.task = task;
  for (const auto& [bin, values] : trace_bins) {
    const Aggregate a = aggregate(values);
    trace.time_s.push_back(bin * bin_s);
    trace.mean_label.push_back(a.mean);
    trace.std_label.push_back(a.stddev);
    trace.n.push_back(static_cast<int>(values.size()));
  }
  return {std::move(report), std::move(trace)};
}

namespace {

// Exact null distribution of the Mann-Whitney U statistic (no ties): the
// count of rank arrangements with U = u is the coefficient of x^u in the
// Gaussian binomial prod_{i=1..m} (1 - x^{n+i}) / (1 - x^i). Counts stay
// below 2^53 for m, n <= 20, so doubles hold them exactly.
std::vector<double> u_distribution(int m, int n) {
  const int max_u = m * n;
  std::vector<double> ways(static_cast<size_t>(max_u + 1), 0.0);
  ways[0] = 1.0;
  for (int i = 1; i <= m; ++i) {
    std::vector<double> next(ways.size(), 0.0);
    // divide by (1 - x^i): prefix sums with lag i; multiply by (1 - x^{n+i}).
    std::vector<double> num(ways.size(), 0.0);
    for (size_t u = 0; u < ways.size(); ++u) {
      num[u] = ways[u];
      if (u >= static_cast<size_t>(n + i)) num[u] -= ways[u - static_cast<size_t>(n + i)];
    }
    for (size_t u = 0; u < ways.size(); ++u) {
      next[u] = num[u];
      if (u >= static_cast<size_t>(i)) next[u] += next[u - static_cast<size_t>(i)];
    }
    ways = std::move(next);
  }
  return ways;
}

}  // namespace

double mann_whitney_p(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) {
    throw InvalidArgumentError("Mann-Whitney needs both groups non-empty");
  }
  const int n1 = static_cast<int>(a.size());
  const int n2 = static_cast<int>(b.size());
  const int n = n1 + n2;

  std::vector<std::pair<double, int>> pooled;  // (value, group)
  pooled.reserve(static_cast<size_t>(n));
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  if (pooled.front().first == pooled.back().first) return 1.0;  // all identical

  // Midranks and tie bookkeeping.
  std::vector<double> ranks(static_cast<size_t>(n));
  double tie_term = 0.0;
  bool has_ties = false;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && pooled[static_cast<size_t>(j + 1)].first ==
                            pooled[static_cast<size_t>(i)].first) {
      ++j;
    }
    const double mid = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) ranks[static_cast<size_t>(k)] = mid;
    const double t = j - i + 1;
    if (t > 1) {
      has_ties = true;
      tie_term += t * t * t - t;
    }
    i = j + 1;
  }

  double rank_sum_a = 0.0;
  for (int i = 0; i < n; ++i) {
    if (pooled[static_cast<size_t>(i)].second == 0) {
      rank_sum_a += ranks[static_cast<size_t>(i)];
    }
  }
  const double u1 = rank_sum_a - 0.5 * n1 * (n1 + 1);
  const double u2 = static_cast<double>(n1) * n2 - u1;

  if (!has_ties && std::min(n1, n2) <= 20) {
    const auto dist = u_distribution(n1, n2);
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    const auto u_min = static_cast<int>(std::llround(std::min(u1, u2)));
    double cum = 0.0;
    for (int u = 0; u <= u_min; ++u) cum += dist[static_cast<size_t>(u)];
    return std::min(1.0, 2.0 * cum / total);
  }

  const double mean_u = 0.5 * static_cast<double>(n1) * n2;
  const double var_u = (static_cast<double>(n1) * n2 / 12.0) *
                       (n + 1 - tie_term / (static_cast<double>(n) * (n - 1)));
  if (var_u <= 0.0) return 1.0;
  // Continuity correction toward the mean.
  const double z = (std::abs(u1 - mean_u) - 0.5) / std::sqrt(var_u);
  return std::min(1.0, std::erfc(std::max(0.0, z) / std::sqrt(2.0)));
}

ContrastResult condition_contrast(
    const Eigen::Ref<const Eigen::MatrixXd>& test_values,
    const Eigen::Ref<const Eigen::MatrixXd>& control_values,
    const std::vector<double>& freqs_hz) {
  if (test_values.rows() == 0 || control_values.rows() == 0) {
    throw InvalidArgumentError("contrast needs trials in both groups");
  }
  if (test_values.cols() != control_values.cols() ||
      test_values.cols() != static_cast<Eigen::Index>(freqs_hz.size())) {
    throw InvalidArgumentError("contrast: frequency axes do not match");
  }
  const auto n_freqs = static_cast<double>(freqs_hz.size());

  ContrastResult out;
  out.freqs_hz = freqs_hz;
  for (Eigen::Index f = 0; f < test_values.cols(); ++f) {
    std::vector<double> t(test_values.col(f).begin(), test_values.col(f).end());
    std::vector<double> c(control_values.col(f).begin(), control_values.col(f).end());
    const double p = mann_whitney_p(t, c);
    out.p_adjusted.push_back(std::min(1.0, p * n_freqs));
    const double mt = test_values.col(f).mean();
    const double mc = control_values.col(f).mean();
    out.direction.push_back(mt >= mc ? 1 : -1);
  }
  return out;
}

std::string report_to_json(const EvalReport& report, const PipelineConfig& cfg) {
  nlohmann::json j;
  j["task"] = to_string(report.task);
  j["pipeline"] = report.pipeline;
  j["tool_version"] = kVersion;
  j["config_hash"] = cfg.hash();
  j["chance_level"] = report.chance;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"held_out_run", f.held_out_run},
                     {"train_accuracy", f.train_accuracy},
                     {"test_accuracy", f.test_accuracy},
                     {"n_train", f.n_train},
                     {"n_test", f.n_test},
                     {"selected_features", f.selected_features}});
  }
  j["folds"] = folds;
  j["train"] = {{"mean", report.mean_train},
                {"std", report.std_train},
                {"min", report.min_train},
                {"max", report.max_train}};
  j["test"] = {{"mean", report.mean_test},
               {"std", report.std_test},
               {"min", report.min_test},
               {"max", report.max_test}};
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& w : report.window_curve) {
    curve.push_back({{"window_index", w.window_index},
                     {"offset_s", w.offset_s},
                     {"accuracy", w.accuracy},
                     {"std", w.stddev}});
  }
  j["window_curve"] = curve;
  return j.dump(2);
}

}  // namespace midec
