#include "midec/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>

#include "midec/log.hpp"

namespace midec {

namespace {

const std::array<const char*, kNumEventKinds> kEventNames = {
    "TrialStart", "CountdownStart", "GoCue",     "RobotMoveStart",
    "StopCue",    "RobotStop",      "ReturnCue", "TrialEnd",
};

}  // namespace

std::string to_string(ChannelKind kind) {
  return kind == ChannelKind::Eeg ? "EEG" : "EOG";
}

ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "EEG") return ChannelKind::Eeg;
  if (s == "EOG") return ChannelKind::Eog;
  throw SessionFormatError("unknown channel kind \"" + s + "\" (expected EEG or EOG)");
}

std::string to_string(EventKind kind) {
  return kEventNames[static_cast<int>(kind)];
}

EventKind event_kind_from_string(const std::string& s, const std::string& context) {
  for (int i = 0; i < kNumEventKinds; ++i) {
    if (s == kEventNames[i]) return static_cast<EventKind>(i);
  }
  std::string where = context.empty() ? "" : " in " + context;
  throw SessionFormatError("unknown event kind \"" + s + "\"" + where);
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::Rs: return "RS";
    case Condition::Bmi: return "bMI";
    case Condition::Dmi: return "dMI";
    case Condition::Emi: return "eMI";
  }
  return "?";
}

double TrialTimeline::trial_seconds() const {
  return rest_s + countdown_s + bmi_latency_s + move_to_stopcue_s + emi_latency_s +
         hold_s + return_s;
}

double TrialTimeline::offset_s(EventKind kind) const {
  switch (kind) {
    case EventKind::TrialStart: return 0.0;
    case EventKind::CountdownStart: return rest_s;
    case EventKind::GoCue: return rest_s + countdown_s;
    case EventKind::RobotMoveStart: return rest_s + countdown_s + bmi_latency_s;
    case EventKind::StopCue:
      return rest_s + countdown_s + bmi_latency_s + move_to_stopcue_s;
    case EventKind::RobotStop:
      return rest_s + countdown_s + bmi_latency_s + move_to_stopcue_s + emi_latency_s;
    case EventKind::ReturnCue:
      return rest_s + countdown_s + bmi_latency_s + move_to_stopcue_s + emi_latency_s +
             hold_s;
    case EventKind::TrialEnd: return trial_seconds();
  }
  return 0.0;
}

void TrialTimeline::validate() const {
  const std::array<std::pair<const char*, double>, 7> phases = {{
      {"rest_s", rest_s},
      {"countdown_s", countdown_s},
      {"bmi_latency_s", bmi_latency_s},
      {"move_to_stopcue_s", move_to_stopcue_s},
      {"emi_latency_s", emi_latency_s},
      {"hold_s", hold_s},
      {"return_s", return_s},
  }};
  for (const auto& [name, value] : phases) {
    if (!(value > 0.0)) {
      throw InvalidArgumentError(std::string("timeline phase ") + name +
                                 " must be positive");
    }
  }
}

std::vector<int> Recording::eeg_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(channels.size()); ++i) {
    if (channels[i].kind == ChannelKind::Eeg) out.push_back(i);
  }
  return out;
}

std::vector<int> Recording::eog_indices() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(channels.size()); ++i) {
    if (channels[i].kind == ChannelKind::Eog) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Recording::labels(const std::vector<int>& indices) const {
  std::vector<std::string> out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(channels.at(static_cast<size_t>(i)).label);
  return out;
}

int Recording::channel_index(const std::string& label) const {
  for (int i = 0; i < static_cast<int>(channels.size()); ++i) {
    if (channels[i].label == label) return i;
  }
  return -1;
}

Eigen::MatrixXd Recording::channel_rows(const std::vector<int>& indices) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), data.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = data.row(indices[static_cast<size_t>(r)]);
  }
  return out;
}

std::optional<std::int64_t> Recording::marker_sample(int trial_index,
                                                     EventKind kind) const {
  for (const auto& ev : events) {
    if (ev.trial_index == trial_index && ev.kind == kind) return ev.sample_index;
  }
  return std::nullopt;
}

int Recording::n_trials() const {
  int max_trial = -1;
  for (const auto& ev : events) max_trial = std::max(max_trial, ev.trial_index);
  return max_trial + 1;
}

void Recording::validate() const {
  if (sample_rate_hz <= 0) {
    throw Error("recording run " + std::to_string(run_id) +
                ": sample_rate_hz must be positive");
  }
  if (static_cast<Eigen::Index>(channels.size()) != data.rows()) {
    throw Error("recording run " + std::to_string(run_id) + ": channel list size " +
                std::to_string(channels.size()) + " does not match data rows " +
                std::to_string(data.rows()));
  }
  std::set<std::string> seen;
  for (const auto& ch : channels) {
    if (!seen.insert(ch.label).second) {
      throw Error("recording run " + std::to_string(run_id) +
                  ": duplicate channel label \"" + ch.label + "\"");
    }
  }
  std::int64_t prev = -1;
  for (const auto& ev : events) {
    if (ev.sample_index < 0 || ev.sample_index >= n_samples()) {
      throw Error("recording run " + std::to_string(run_id) + ": event " +
                  to_string(ev.kind) + " at sample " + std::to_string(ev.sample_index) +
                  " outside [0, " + std::to_string(n_samples()) + ")");
    }
    if (ev.sample_index < prev) {
      throw Error("recording run " + std::to_string(run_id) +
                  ": event sample indices decrease at " + to_string(ev.kind));
    }
    prev = ev.sample_index;
  }
  // Within a trial, markers must appear in cue order.
  for (int t = 0; t < n_trials(); ++t) {
    int last_kind = -1;
    for (const auto& ev : events) {
      if (ev.trial_index != t) continue;
      if (static_cast<int>(ev.kind) <= last_kind) {
        throw Error("recording run " + std::to_string(run_id) + ": trial " +
                    std::to_string(t) + " markers out of order at " +
                    to_string(ev.kind));
      }
      last_kind = static_cast<int>(ev.kind);
    }
  }
}

namespace {

std::optional<Epoch> make_epoch(Condition cond, std::int64_t start, int length,
                                int trial, int run, std::int64_t n_samples,
                                std::string* reason) {
  if (start < 0 || start + length > n_samples) {
    *reason = to_string(cond) + " epoch [" + std::to_string(start) + ", " +
              std::to_string(start + length) + ") outside recording";
    return std::nullopt;
  }
  return Epoch{cond, start, length, trial, run};
}

}  // namespace

EpochExtraction extract_epochs(const Recording& rec, const TrialTimeline& timeline) {
  timeline.validate();
  EpochExtraction out;
  const int fs = rec.sample_rate_hz;
  const int epoch_len = fs;  // 1 s
  const auto dmi_tail = static_cast<std::int64_t>(std::llround(kDmiTailSeconds * fs));

  if (timeline.rest_s < kEpochSeconds) {
    throw InvalidArgumentError("rest phase shorter than the 1 s RS epoch");
  }

  for (int t = 0; t < rec.n_trials(); ++t) {
    const auto countdown = rec.marker_sample(t, EventKind::CountdownStart);
    const auto go = rec.marker_sample(t, EventKind::GoCue);
    const auto stop = rec.marker_sample(t, EventKind::StopCue);
    if (!countdown || !go || !stop) {
      std::string missing;
      if (!countdown) missing += " CountdownStart";
      if (!go) missing += " GoCue";
      if (!stop) missing += " StopCue";
      out.skipped.push_back({t, "missing markers:" + missing});
      log::warn("run " + std::to_string(rec.run_id) + " trial " + std::to_string(t) +
                " skipped (missing markers:" + missing + ")");
      continue;
    }

    std::string reason;
    std::vector<Epoch> trial_epochs;
    bool ok = true;
    const std::array<std::pair<Condition, std::int64_t>, 4> specs = {{
        {Condition::Rs, *countdown - epoch_len},
        {Condition::Bmi, *go},
        {Condition::Dmi, *stop - dmi_tail - epoch_len},
        {Condition::Emi, *stop},
    }};
    for (const auto& [cond, start] : specs) {
      auto ep = make_epoch(cond, start, epoch_len, t, rec.run_id, rec.n_samples(),
                           &reason);
      if (!ep) {
        ok = false;
        break;
      }
      trial_epochs.push_back(*ep);
    }
    if (!ok) {
      out.skipped.push_back({t, reason});
      log::warn("run " + std::to_string(rec.run_id) + " trial " + std::to_string(t) +
                " skipped (" + reason + ")");
      continue;
    }
    out.epochs.insert(out.epochs.end(), trial_epochs.begin(), trial_epochs.end());
  }
  return out;
}

std::vector<ChannelInfo> standard_channel_set() {
  std::vector<ChannelInfo> out;
  const char* eeg[] = {"F7",  "F3",  "Fz",  "F4",  "F8",  "FC5", "FC1", "FC2",
                       "FC6", "C3",  "Cz",  "C4",  "CP5", "CP1", "CP2", "CP6",
                       "P7",  "P3",  "Pz",  "P4",  "P8",  "POz"};
  for (const char* label : eeg) out.push_back({label, ChannelKind::Eeg});
  out.push_back({"EOGl", ChannelKind::Eog});
  out.push_back({"EOGr", ChannelKind::Eog});
  out.push_back({"EOGv", ChannelKind::Eog});
  return out;
}

}  // namespace midec
