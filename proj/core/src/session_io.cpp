#include "midec/session_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

#include <json.hpp>

#include "midec/log.hpp"

namespace midec {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "session .f64 files are little-endian; big-endian hosts unsupported");

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SessionFormatError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SessionFormatError("corrupt JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw Error("I/O failure writing " + path.string());
}

std::filesystem::path events_path_for(const std::filesystem::path& dir,
                                      const std::string& run_file) {
  std::string stem = run_file;
  if (auto pos = stem.rfind(".f64"); pos != std::string::npos) stem.resize(pos);
  return dir / (stem + ".events.json");
}

// One column per sample frame, so the matrix buffer already has the file's
// sample-major layout.
Eigen::MatrixXd read_f64_block(const std::filesystem::path& path, int n_channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SessionFormatError("missing data file " + path.string());
  in.seekg(0, std::ios::end);
  const std::int64_t bytes = in.tellg();
  in.seekg(0);
  const std::int64_t frame_bytes = static_cast<std::int64_t>(n_channels) * 8;
  if (bytes % frame_bytes != 0) {
    throw SessionFormatError("data file " + path.string() + " has " +
                             std::to_string(bytes) + " bytes, not a multiple of " +
                             std::to_string(frame_bytes) + " (truncated?)");
  }
  const std::int64_t n_samples = bytes / frame_bytes;
  Eigen::MatrixXd data(n_channels, n_samples);
  in.read(reinterpret_cast<char*>(data.data()), bytes);
  if (!in) throw SessionFormatError("short read from " + path.string());
  return data;
}

void write_f64_block(const Eigen::Ref<const Eigen::MatrixXd>& data,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw Error("I/O failure writing " + path.string());
}

std::vector<EventMarker> read_events(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  if (!j.is_array()) throw SessionFormatError(path.string() + ": expected an array");
  std::vector<EventMarker> events;
  events.reserve(j.size());
  for (const auto& e : j) {
    EventMarker m;
    m.sample_index = e.at("sample_index").get<std::int64_t>();
    m.kind = event_kind_from_string(e.at("kind").get<std::string>(), path.string());
    m.trial_index = e.at("trial_index").get<int>();
    events.push_back(m);
  }
  return events;
}

json events_to_json(const std::vector<EventMarker>& events) {
  json arr = json::array();
  for (const auto& m : events) {
    arr.push_back({{"sample_index", m.sample_index},
                   {"kind", to_string(m.kind)},
                   {"trial_index", m.trial_index}});
  }
  return arr;
}

json timeline_to_json(const TrialTimeline& t) {
  return {{"rest_s", t.rest_s},
          {"countdown_s", t.countdown_s},
          {"bmi_latency_s", t.bmi_latency_s},
          {"move_to_stopcue_s", t.move_to_stopcue_s},
          {"emi_latency_s", t.emi_latency_s},
          {"hold_s", t.hold_s},
          {"return_s", t.return_s}};
}

TrialTimeline timeline_from_json(const json& j) {
  TrialTimeline t;
  t.rest_s = j.at("rest_s").get<double>();
  t.countdown_s = j.at("countdown_s").get<double>();
  t.bmi_latency_s = j.at("bmi_latency_s").get<double>();
  t.move_to_stopcue_s = j.at("move_to_stopcue_s").get<double>();
  t.emi_latency_s = j.at("emi_latency_s").get<double>();
  t.hold_s = j.at("hold_s").get<double>();
  t.return_s = j.at("return_s").get<double>();
  return t;
}

}  // namespace

SessionBundle load_session_bundle(const std::filesystem::path& dir) {
  const auto header_path = dir / "session.json";
  if (!std::filesystem::exists(header_path)) {
    throw SessionFormatError("no runs found: missing " + header_path.string());
  }
  const json header = load_json_file(header_path);

  SessionBundle bundle;
  const int fs = header.at("sampling_rate_hz").get<int>();
  if (fs <= 0) {
    throw SessionFormatError(header_path.string() +
                             ": sampling_rate_hz must be positive");
  }

  std::vector<ChannelInfo> channels;
  for (const auto& c : header.at("channels")) {
    channels.push_back({c.at("label").get<std::string>(),
                        channel_kind_from_string(c.at("kind").get<std::string>())});
  }
  if (channels.empty()) {
    throw SessionFormatError(header_path.string() + ": empty channel list");
  }

  const auto run_files = header.at("runs").get<std::vector<std::string>>();
  if (run_files.empty()) {
    throw SessionFormatError("no runs found in " + header_path.string());
  }
  if (header.contains("timeline")) {
    bundle.timeline = timeline_from_json(header.at("timeline"));
  }
  bundle.preprocessed = header.value("preprocessed", false);

  int run_id = 1;
  for (const auto& run_file : run_files) {
    Recording rec;
    rec.sample_rate_hz = fs;
    rec.channels = channels;
    rec.run_id = run_id++;
    rec.data = read_f64_block(dir / run_file, static_cast<int>(channels.size()));
    rec.events = read_events(events_path_for(dir, run_file));
    try {
      rec.validate();
    } catch (const Error& e) {
      throw SessionFormatError(std::string("invalid run file ") + run_file + ": " +
                               e.what());
    }
    bundle.runs.push_back(std::move(rec));
  }

  if (header.contains("calibration")) {
    Recording cal;
    cal.sample_rate_hz = fs;
    cal.channels = channels;
    cal.run_id = 0;
    cal.data = read_f64_block(dir / header.at("calibration").get<std::string>(),
                              static_cast<int>(channels.size()));
    bundle.calibration = std::move(cal);
  }
  return bundle;
}

void save_session_bundle(const SessionBundle& bundle,
                         const std::filesystem::path& dir) {
  if (bundle.runs.empty()) throw InvalidArgumentError("cannot save empty session");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);

  json channels = json::array();
  for (const auto& c : bundle.runs.front().channels) {
    channels.push_back({{"label", c.label}, {"kind", to_string(c.kind)}});
  }

  json header;
  header["format"] = "midec-session";
  header["sampling_rate_hz"] = bundle.runs.front().sample_rate_hz;
  header["channels"] = channels;
  header["timeline"] = timeline_to_json(bundle.timeline);
  header["preprocessed"] = bundle.preprocessed;

  json run_files = json::array();
  for (const auto& rec : bundle.runs) {
    rec.validate();
    const std::string run_file = "run_" + std::to_string(rec.run_id) + ".f64";
    run_files.push_back(run_file);
    write_f64_block(rec.data, dir / run_file);
    write_json_file(events_to_json(rec.events), events_path_for(dir, run_file));
  }
  header["runs"] = run_files;

  if (bundle.calibration) {
    header["calibration"] = "calibration.f64";
    write_f64_block(bundle.calibration->data, dir / "calibration.f64");
  }
  write_json_file(header, dir / "session.json");
}

std::vector<Recording> load_session(const std::filesystem::path& dir) {
  return load_session_bundle(dir).runs;
}

void save_session(const std::vector<Recording>& runs,
                  const std::filesystem::path& dir) {
  SessionBundle bundle;
  bundle.runs = runs;
  save_session_bundle(bundle, dir);
}

}  // namespace midec
