// midec: motor-imagery onset/offset decoding pipeline.
//
// Subcommands cover the whole chain: synthetic session generation,
// preprocessing, feature extraction, spectrogram export, model training,
// offline LORO-CV evaluation, causal pseudo-online replay, test-vs-control
// spectral contrasts, and report aggregation. All outputs are CSV/JSON and
// embed the tool version and config hash; given identical inputs every
// subcommand reproduces byte-identical outputs (the timestamp can be dropped
// with --no-timestamp).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "midec/dlda.hpp"
#include "midec/evaluation.hpp"
#include "midec/log.hpp"
#include "midec/pipeline.hpp"
#include "midec/synth.hpp"
#include "midec/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string session_dir;
  std::string config_path;
  std::string out_dir;
  std::string task{"onset"};
  std::optional<std::uint64_t> seed;
  bool no_timestamp{false};
};

midec::PipelineConfig load_config(const CommonOpts& opts) {
  midec::PipelineConfig cfg;
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw midec::Error("cannot open config " + opts.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = midec::PipelineConfig::from_json(ss.str());
  }
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

std::string timestamp_line(const CommonOpts& opts) {
  if (opts.no_timestamp) return "";
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

// Comment header carried by every CSV output.
std::string csv_header(const midec::PipelineConfig& cfg, const CommonOpts& opts) {
  std::string line = std::string("# midec ") + midec::kVersion +
                     " config=" + cfg.hash();
  const std::string ts = timestamp_line(opts);
  if (!ts.empty()) line += " generated=" + ts;
  return line + "\n";
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw midec::Error("cannot write " + path.string());
  out << content;
  if (!out) throw midec::Error("I/O failure writing " + path.string());
}

// JSON payloads get version/hash/timestamp fields injected uniformly.
void write_json_out(const fs::path& path, json j, const midec::PipelineConfig& cfg,
                    const CommonOpts& opts) {
  j["tool_version"] = midec::kVersion;
  j["config_hash"] = cfg.hash();
  const std::string ts = timestamp_line(opts);
  if (!ts.empty()) j["generated"] = ts;
  write_text(path, j.dump(2) + "\n");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

midec::SessionBundle load_bundle(const CommonOpts& opts) {
  if (opts.session_dir.empty()) throw midec::Error("--session is required");
  return midec::load_session_bundle(opts.session_dir);
}

// Preprocess unless the directory is already marked preprocessed.
midec::SessionBundle ensure_offline(const midec::SessionBundle& bundle,
                                    const midec::PipelineConfig& cfg) {
  if (bundle.preprocessed) return bundle;
  return midec::preprocess_offline(bundle, cfg).bundle;
}

int cmd_synth(const CommonOpts& opts, const midec::SynthConfig& synth_cfg,
              bool control, const midec::PipelineConfig& cfg) {
  const midec::SynthSession session = control
                                          ? midec::generate_control_session(synth_cfg)
                                          : midec::generate_session(synth_cfg);
  midec::save_session_bundle(session.bundle, opts.out_dir);
  write_text(fs::path(opts.out_dir) / "ground_truth.json", session.truth.to_json() + "\n");
  std::cout << "wrote " << session.bundle.runs.size() << " runs to " << opts.out_dir
            << " (seed " << synth_cfg.seed << (control ? ", control trials" : "")
            << ")\n";
  (void)cfg;
  return 0;
}

int cmd_preprocess(const CommonOpts& opts, const midec::PipelineConfig& cfg) {
  const auto raw = load_bundle(opts);
  const midec::PreprocessResult result = midec::preprocess_offline(raw, cfg);
  midec::save_session_bundle(result.bundle, opts.out_dir);
  write_text(fs::path(opts.out_dir) / "eog_filter.json",
             midec::eog_filter_to_json(result.eog) + "\n");
  std::cout << "preprocessed " << result.bundle.runs.size() << " runs into "
            << opts.out_dir << "\n";
  return 0;
}

int cmd_features(const CommonOpts& opts, const midec::PipelineConfig& cfg) {
  const auto task = midec::task_from_string(opts.task);
  const auto processed = ensure_offline(load_bundle(opts), cfg);
  const midec::FeatureMatrix fm = midec::build_session_features(processed, task, cfg);

  const std::string stem = "features_" + opts.task;
  // Long-format CSV: one row per (sample, feature).
  std::string csv = csv_header(cfg, opts);
  csv += "sample,run_id,trial_index,window_index,label,channel,frequency_hz,value\n";
  std::string chunk;
  chunk.reserve(1 << 20);
  for (Eigen::Index i = 0; i < fm.n_samples(); ++i) {
    const auto s = static_cast<size_t>(i);
    for (Eigen::Index jf = 0; jf < fm.n_features(); ++jf) {
      const auto& [channel, freq] = fm.feature_index[static_cast<size_t>(jf)];
      chunk += std::to_string(i) + "," + std::to_string(fm.run_ids[s]) + "," +
               std::to_string(fm.trial_indices[s]) + "," +
               std::to_string(fm.window_indices[s]) + "," +
               std::to_string(fm.labels[s]) + "," + channel + "," + fmt(freq) + "," +
               fmt(fm.x(i, jf)) + "\n";
      if (chunk.size() > (1 << 20)) {
        csv += chunk;
        chunk.clear();
      }
    }
  }
  csv += chunk;
  write_text(fs::path(opts.out_dir) / (stem + ".csv"), csv);

  // Compact binary (sample-major frames) plus schema.
  {
    fs::create_directories(opts.out_dir);
    std::ofstream bin(fs::path(opts.out_dir) / (stem + ".f64"), std::ios::binary);
    Eigen::MatrixXd rows = fm.x.transpose();  // feature-major frames per sample
    bin.write(reinterpret_cast<const char*>(rows.data()),
              static_cast<std::streamsize>(rows.size() * sizeof(double)));
  }
  json schema;
  schema["n_samples"] = fm.n_samples();
  schema["n_features"] = fm.n_features();
  json fi = json::array();
  for (const auto& [channel, freq] : fm.feature_index) {
    fi.push_back({{"channel", channel}, {"frequency_hz", freq}});
  }
  schema["feature_index"] = fi;
  schema["labels"] = fm.labels;
  schema["run_ids"] = fm.run_ids;
  schema["trial_indices"] = fm.trial_indices;
  schema["window_indices"] = fm.window_indices;
  schema["task"] = opts.task;
  write_json_out(fs::path(opts.out_dir) / (stem + ".json"), schema, cfg, opts);

  std::cout << stem << ": " << fm.n_samples() << " samples x " << fm.n_features()
            << " features\n";
  return 0;
}

int cmd_spectrogram(const CommonOpts& opts, const midec::PipelineConfig& cfg,
                    const std::string& channel, bool erd, double band_lo,
                    double band_hi) {
  const auto processed = ensure_offline(load_bundle(opts), cfg);

  // Grand average across all trials of all runs, aligned on TrialStart.
  midec::Spectrogram grand;
  Eigen::MatrixXd sum;
  std::int64_t count = 0;
  for (const auto& run : processed.runs) {
    const int ch = run.channel_index(channel);
    if (ch < 0) throw midec::Error("channel " + channel + " not in session");
    const Eigen::MatrixXd row = run.data.row(ch);
    for (int t = 0; t < run.n_trials(); ++t) {
      const auto start = run.marker_sample(t, midec::EventKind::TrialStart);
      const auto end = run.marker_sample(t, midec::EventKind::TrialEnd);
      if (!start || !end || *end <= *start) continue;
      midec::Spectrogram spec = midec::segment_spectrogram(
          row.middleCols(*start, *end - *start), {channel}, run.sample_rate_hz,
          band_lo, band_hi, cfg.resolution_hz, cfg.window_s, cfg.step_s);
      if (erd) {
        const auto extraction = midec::extract_epochs(run, processed.timeline);
        const midec::Epoch* rs = nullptr;
        for (const auto& e : extraction.epochs) {
          if (e.trial_index == t && e.condition == midec::Condition::Rs) rs = &e;
        }
        if (!rs) continue;
        midec::Psd baseline;
        {
          midec::Spectrogram rs_spec = midec::segment_spectrogram(
              row.middleCols(rs->start_sample, rs->length_samples), {channel},
              run.sample_rate_hz, band_lo, band_hi, cfg.resolution_hz, cfg.window_s,
              cfg.step_s);
          baseline.freqs_hz = rs_spec.freqs_hz;
          baseline.power = rs_spec.values[0].rowwise().mean().transpose();
        }
        spec = midec::erd_transform(spec, baseline);
      }
      if (count == 0) {
        grand = spec;
        sum = spec.values[0];
      } else {
        if (spec.values[0].cols() == sum.cols()) {
          sum += spec.values[0];
        } else {
          continue;  // ragged trial at run edge
        }
      }
      ++count;
    }
  }
  if (count == 0) throw midec::Error("no complete trials found");
  sum /= static_cast<double>(count);

  std::string csv = csv_header(cfg, opts);
  csv += "channel,frequency_hz,time_s,value\n";
  for (Eigen::Index f = 0; f < sum.rows(); ++f) {
    for (Eigen::Index w = 0; w < sum.cols(); ++w) {
      csv += channel + "," + fmt(grand.freqs_hz[static_cast<size_t>(f)]) + "," +
             fmt(grand.times_s[static_cast<size_t>(w)]) + "," + fmt(sum(f, w)) + "\n";
    }
  }
  const std::string name =
      std::string("spectrogram_") + channel + (erd ? "_erd" : "_power") + ".csv";
  write_text(fs::path(opts.out_dir) / name, csv);
  std::cout << "averaged " << count << " trials -> " << name << "\n";
  return 0;
}

int cmd_train(const CommonOpts& opts, const midec::PipelineConfig& cfg,
              const std::string& pipeline) {
  const auto task = midec::task_from_string(opts.task);
  const auto raw = load_bundle(opts);

  if (pipeline == "dlda") {
    const auto processed = ensure_offline(raw, cfg);
    const midec::FeatureMatrix fm = midec::build_session_features(processed, task, cfg);
    const midec::FisherRanking ranking = midec::fisher_scores(fm, cfg.top_k_features);
    const midec::DldaModel model = midec::dlda_fit(fm, ranking.selected);
    json j = json::parse(midec::dlda_to_json(model));
    j["task"] = opts.task;
    write_json_out(fs::path(opts.out_dir) / ("dlda_model_" + opts.task + ".json"), j,
                   cfg, opts);
    std::cout << "dLDA model trained on " << fm.n_samples() << " samples\n";
    return 0;
  }
  if (pipeline == "mdm") {
    const auto processed = midec::preprocess_causal(raw, cfg).bundle;
    const auto class0 =
        task == midec::Task::Onset ? midec::Condition::Rs : midec::Condition::Dmi;
    const auto class1 =
        task == midec::Task::Onset ? midec::Condition::Bmi : midec::Condition::Emi;
    std::vector<midec::SpdSample> samples;
    for (const auto& run : processed.runs) {
      const Eigen::MatrixXd eeg = run.channel_rows(run.eeg_indices());
      for (const auto& e : midec::extract_epochs(run, processed.timeline).epochs) {
        if (e.condition != class0 && e.condition != class1) continue;
        midec::SpdSample s = midec::epoch_covariance(
            eeg.middleCols(e.start_sample, e.length_samples), cfg.shrinkage_alpha);
        s.label = e.condition == class1 ? 1 : 0;
        samples.push_back(std::move(s));
      }
    }
    const midec::MdmModel model =
        midec::mdm_fit(samples, cfg.frechet_tol, cfg.frechet_max_iter);
    json j = json::parse(midec::mdm_to_json(model));
    j["task"] = opts.task;
    write_json_out(fs::path(opts.out_dir) / ("mdm_model_" + opts.task + ".json"), j,
                   cfg, opts);
    std::cout << "MDM model trained on " << samples.size() << " covariances\n";
    return 0;
  }
  throw midec::Error("unknown pipeline \"" + pipeline + "\" (expected dlda or mdm)");
}

std::string report_table_csv(const midec::EvalReport& report,
                             const midec::PipelineConfig& cfg, const CommonOpts& opts) {
  std::string csv = csv_header(cfg, opts);
  csv += "fold,train,test\n";
  for (const auto& f : report.folds) {
    csv += std::to_string(f.held_out_run) + "," + fmt(f.train_accuracy) + "," +
           fmt(f.test_accuracy) + "\n";
  }
  csv += "AVG," + fmt(report.mean_train) + "," + fmt(report.mean_test) + "\n";
  csv += "STD," + fmt(report.std_train) + "," + fmt(report.std_test) + "\n";
  csv += "MIN," + fmt(report.min_train) + "," + fmt(report.min_test) + "\n";
  csv += "MAX," + fmt(report.max_train) + "," + fmt(report.max_test) + "\n";
  csv += "CHANCE," + fmt(report.chance) + "," + fmt(report.chance) + "\n";
  return csv;
}

std::string curve_csv(const midec::EvalReport& report, const midec::PipelineConfig& cfg,
                      const CommonOpts& opts) {
  std::string csv = csv_header(cfg, opts);
  csv += "window_index,offset_s,accuracy,std\n";
  for (const auto& w : report.window_curve) {
    csv += std::to_string(w.window_index) + "," + fmt(w.offset_s) + "," +
           fmt(w.accuracy) + "," + fmt(w.stddev) + "\n";
  }
  return csv;
}

int cmd_eval_offline(const CommonOpts& opts, const midec::PipelineConfig& cfg) {
  const auto task = midec::task_from_string(opts.task);
  const midec::EvalReport report = midec::loro_cv(load_bundle(opts), task, cfg);
  const std::string stem = "offline_" + opts.task;
  write_text(fs::path(opts.out_dir) / ("report_" + stem + ".json"),
             midec::report_to_json(report, cfg) + "\n");
  write_text(fs::path(opts.out_dir) / ("table_" + stem + ".csv"),
             report_table_csv(report, cfg, opts));
  write_text(fs::path(opts.out_dir) / ("curve_" + stem + ".csv"),
             curve_csv(report, cfg, opts));
  std::printf("%s: test %.1f%% +- %.1f%% (chance %.1f%%)\n", stem.c_str(),
              100.0 * report.mean_test, 100.0 * report.std_test, 100.0 * report.chance);
  return 0;
}

int cmd_eval_pseudo_online(const CommonOpts& opts, const midec::PipelineConfig& cfg) {
  const auto task = midec::task_from_string(opts.task);
  const auto [report, trace] = midec::pseudo_online_replay(load_bundle(opts), task, cfg);
  const std::string stem = "pseudo_online_" + opts.task;
  write_text(fs::path(opts.out_dir) / ("report_" + stem + ".json"),
             midec::report_to_json(report, cfg) + "\n");
  write_text(fs::path(opts.out_dir) / ("table_" + stem + ".csv"),
             report_table_csv(report, cfg, opts));
  write_text(fs::path(opts.out_dir) / ("curve_" + stem + ".csv"),
             curve_csv(report, cfg, opts));

  std::string csv = csv_header(cfg, opts);
  csv += "time_s,mean_predicted_label,std,n\n";
  for (size_t i = 0; i < trace.time_s.size(); ++i) {
    csv += fmt(trace.time_s[i]) + "," + fmt(trace.mean_label[i]) + "," +
           fmt(trace.std_label[i]) + "," + std::to_string(trace.n[i]) + "\n";
  }
  write_text(fs::path(opts.out_dir) / ("trace_" + stem + ".csv"), csv);
  std::printf("%s: test %.1f%% +- %.1f%% (chance %.1f%%)\n", stem.c_str(),
              100.0 * report.mean_test, 100.0 * report.std_test, 100.0 * report.chance);
  return 0;
}

int cmd_contrast(const CommonOpts& opts, const midec::PipelineConfig& cfg,
                 const std::string& channel, const std::string& phase, double band_lo,
                 double band_hi) {
  const auto raw = load_bundle(opts);
  const fs::path truth_path = fs::path(opts.session_dir) / "ground_truth.json";
  std::ifstream truth_in(truth_path);
  if (!truth_in) {
    throw midec::Error("contrast needs " + truth_path.string() +
                       " to identify control trials");
  }
  std::stringstream ss;
  ss << truth_in.rdbuf();
  const midec::GroundTruth truth = midec::GroundTruth::from_json(ss.str());

  const auto processed = ensure_offline(raw, cfg);
  const int fs_hz = processed.runs.front().sample_rate_hz;

  // Phase window relative to its cue.
  midec::EventKind cue = midec::EventKind::GoCue;
  double offset_lo = 0.0, offset_hi = 1.0;
  if (phase == "bmi") {
    cue = midec::EventKind::GoCue;
  } else if (phase == "return") {
    cue = midec::EventKind::ReturnCue;
    offset_lo = 1.0;
    offset_hi = 2.0;
  } else {
    throw midec::Error("unknown phase \"" + phase + "\" (expected bmi or return)");
  }

  std::vector<std::vector<double>> test_rows, control_rows;
  std::vector<double> freqs;
  for (const auto& run : processed.runs) {
    const int ch = run.channel_index(channel);
    if (ch < 0) throw midec::Error("channel " + channel + " not in session");
    const Eigen::MatrixXd row = run.data.row(ch);
    for (int t = 0; t < run.n_trials(); ++t) {
      const auto cue_sample = run.marker_sample(t, cue);
      if (!cue_sample) continue;
      const auto a = *cue_sample + static_cast<std::int64_t>(std::llround(offset_lo * fs_hz));
      const auto len = static_cast<std::int64_t>(std::llround((offset_hi - offset_lo) * fs_hz));
      if (a < 0 || a + len > run.n_samples()) continue;
      const midec::Spectrogram spec = midec::segment_spectrogram(
          row.middleCols(a, len), {channel}, fs_hz, band_lo, band_hi,
          cfg.resolution_hz, cfg.window_s, cfg.step_s);
      const Eigen::VectorXd mean_power = spec.values[0].rowwise().mean();
      if (freqs.empty()) freqs = spec.freqs_hz;

      bool is_control = false;
      for (const auto& gt : truth.trials) {
        if (gt.run_id == run.run_id && gt.trial_index == t) {
          is_control = gt.control;
          break;
        }
      }
      std::vector<double> values(mean_power.begin(), mean_power.end());
      (is_control ? control_rows : test_rows).push_back(std::move(values));
    }
  }
  if (test_rows.empty() || control_rows.empty()) {
    throw midec::Error("need both test and control trials (is this a control session?)");
  }

  auto to_matrix = [](const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      for (size_t j = 0; j < rows[i].size(); ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    return m;
  };
  const midec::ContrastResult result =
      midec::condition_contrast(to_matrix(test_rows), to_matrix(control_rows), freqs);

  std::string csv = csv_header(cfg, opts);
  csv += "frequency_hz,p_adjusted,direction,significant\n";
  for (size_t i = 0; i < result.freqs_hz.size(); ++i) {
    csv += fmt(result.freqs_hz[i]) + "," + fmt(result.p_adjusted[i]) + "," +
           std::to_string(result.direction[i]) + "," +
           (result.p_adjusted[i] < 0.05 ? "1" : "0") + "\n";
  }
  write_text(fs::path(opts.out_dir) / ("contrast_" + phase + "_" + channel + ".csv"),
             csv);
  std::cout << "contrast over " << test_rows.size() << " test vs "
            << control_rows.size() << " control trials\n";
  return 0;
}

int cmd_report(const CommonOpts& opts, const midec::PipelineConfig& cfg) {
  json summary = json::array();
  std::vector<fs::path> inputs;
  for (const auto& entry : fs::directory_iterator(opts.out_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") {
      inputs.push_back(entry.path());
    }
  }
  std::sort(inputs.begin(), inputs.end());
  if (inputs.empty()) throw midec::Error("no report_*.json files in " + opts.out_dir);

  std::string csv = csv_header(cfg, opts);
  csv += "pipeline,task,mean_test,std_test,min_test,max_test,chance\n";
  for (const auto& path : inputs) {
    std::ifstream in(path);
    json j;
    in >> j;
    summary.push_back(j);
    csv += j.value("pipeline", "?") + "," + j.value("task", "?") + "," +
           fmt(j["test"].value("mean", 0.0)) + "," + fmt(j["test"].value("std", 0.0)) +
           "," + fmt(j["test"].value("min", 0.0)) + "," +
           fmt(j["test"].value("max", 0.0)) + "," + fmt(j.value("chance_level", 0.0)) +
           "\n";
  }
  write_text(fs::path(opts.out_dir) / "summary.csv", csv);
  json wrap;
  wrap["reports"] = summary;
  write_json_out(fs::path(opts.out_dir) / "summary.json", wrap, cfg, opts);
  std::cout << "aggregated " << inputs.size() << " reports\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motor-imagery onset/offset EEG decoding pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", midec::kVersion);

  CommonOpts opts;
  midec::SynthConfig synth_cfg;
  bool control_session = false;
  std::string pipeline = "dlda";
  std::string channel = "C3";
  std::string phase = "bmi";
  bool erd = false;
  double band_lo = 8.0, band_hi = 30.0;
  double spect_lo = 4.0, spect_hi = 45.0;

  auto add_common = [&](CLI::App* cmd, bool needs_session, bool needs_out) {
    if (needs_session) {
      cmd->add_option("--session", opts.session_dir, "session directory")->required();
    }
    if (needs_out) {
      cmd->add_option("--out", opts.out_dir, "output directory")->required();
    }
    cmd->add_option("--config", opts.config_path, "pipeline config JSON");
    cmd->add_option("--seed", opts.seed, "seed override");
    cmd->add_flag("--no-timestamp", opts.no_timestamp,
                  "omit timestamps for byte-identical reruns");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic session");
  add_common(synth, false, true);
  synth->add_flag("--control", control_session, "interleave passive control trials");
  synth->add_option("--runs", synth_cfg.n_runs, "number of runs");
  synth->add_option("--trials", synth_cfg.n_trials, "trials per run");
  synth->add_option("--erd-mu", synth_cfg.erd_depth_mu, "mu ERD depth [0,1]");
  synth->add_option("--erd-beta", synth_cfg.erd_depth_beta, "beta ERD depth [0,1]");
  synth->add_option("--robot-gain", synth_cfg.robot_noise_gain, "movement noise gain");
  synth->add_option("--latency", synth_cfg.response_latency_s, "response latency (s)");

  auto* preprocess = app.add_subcommand("preprocess", "offline preprocessing chain");
  add_common(preprocess, true, true);

  auto* features = app.add_subcommand("features", "extract the labeled feature matrix");
  add_common(features, true, true);
  features->add_option("--task", opts.task, "onset|offset");

  auto* spectrogram =
      app.add_subcommand("spectrogram", "grand-average trial spectrogram for a channel");
  add_common(spectrogram, true, true);
  spectrogram->add_option("--channel", channel, "channel label");
  spectrogram->add_flag("--erd", erd, "ERD/ERS log-ratio against the RS baseline");
  spectrogram->add_option("--band-lo", spect_lo, "lowest frequency (Hz)");
  spectrogram->add_option("--band-hi", spect_hi, "highest frequency (Hz)");

  auto* train = app.add_subcommand("train", "fit a model on all runs");
  add_common(train, true, true);
  train->add_option("--task", opts.task, "onset|offset");
  train->add_option("--pipeline", pipeline, "dlda|mdm");

  auto* eval_offline =
      app.add_subcommand("eval-offline", "leave-one-run-out dLDA evaluation");
  add_common(eval_offline, true, true);
  eval_offline->add_option("--task", opts.task, "onset|offset");

  auto* eval_po = app.add_subcommand("eval-pseudo-online",
                                     "causal MDM replay of each held-out run");
  add_common(eval_po, true, true);
  eval_po->add_option("--task", opts.task, "onset|offset");

  auto* contrast =
      app.add_subcommand("contrast", "test-vs-control Mann-Whitney spectral contrast");
  add_common(contrast, true, true);
  contrast->add_option("--channel", channel, "channel label");
  contrast->add_option("--phase", phase, "bmi|return");
  contrast->add_option("--band-lo", band_lo, "lowest frequency (Hz)");
  contrast->add_option("--band-hi", band_hi, "highest frequency (Hz)");

  auto* report = app.add_subcommand("report", "aggregate report_*.json into a summary");
  add_common(report, false, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const midec::PipelineConfig cfg = load_config(opts);
    if (synth->parsed()) {
      if (opts.seed) synth_cfg.seed = *opts.seed;
      return cmd_synth(opts, synth_cfg, control_session, cfg);
    }
    if (preprocess->parsed()) return cmd_preprocess(opts, cfg);
    if (features->parsed()) return cmd_features(opts, cfg);
    if (spectrogram->parsed()) {
      return cmd_spectrogram(opts, cfg, channel, erd, spect_lo, spect_hi);
    }
    if (train->parsed()) return cmd_train(opts, cfg, pipeline);
    if (eval_offline->parsed()) return cmd_eval_offline(opts, cfg);
    if (eval_po->parsed()) return cmd_eval_pseudo_online(opts, cfg);
    if (contrast->parsed()) {
      return cmd_contrast(opts, cfg, channel, phase, band_lo, band_hi);
    }
    if (report->parsed()) return cmd_report(opts, cfg);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 1;
}
