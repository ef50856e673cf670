#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "midec/session.hpp"

namespace midec {

// A session directory holds `session.json` (sampling rate, channel list, run
// file names, timeline constants), one `run_<k>.f64` per run (little-endian
// 64-bit reals, sample-major frames: one value per channel in header order),
// one `run_<k>.events.json` per run, and optionally `calibration.f64`.
struct SessionBundle {
  std::vector<Recording> runs;
  std::optional<Recording> calibration;
  TrialTimeline timeline;
  bool preprocessed{false};
};

// Loads and validates a full session directory. Throws SessionFormatError
// naming the offending file/field on malformed input.
SessionBundle load_session_bundle(const std::filesystem::path& dir);

// Writes a session directory; creates it if needed. Round-trips bit-exactly.
void save_session_bundle(const SessionBundle& bundle, const std::filesystem::path& dir);

// Run-list convenience wrappers.
std::vector<Recording> load_session(const std::filesystem::path& dir);
void save_session(const std::vector<Recording>& runs, const std::filesystem::path& dir);

}  // namespace midec
