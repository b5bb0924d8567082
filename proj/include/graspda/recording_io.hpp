#pragma once

#include "graspda/signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace graspda {

// Binary recording file, little-endian:
//   "BCIR" | u16 version=1 | u8 modality | u16 channel_count | u32 sample_rate_hz
//   | u64 samples_per_channel | channel_count x (u16 len, utf-8 name) | f32 samples, channel-major
inline constexpr std::uint16_t kRecordingVersion = 1;

void write_recording(std::ostream& out, const Recording& rec);
Recording read_recording(std::istream& in);
void write_recording(const std::filesystem::path& path, const Recording& rec);
Recording read_recording(const std::filesystem::path& path);

struct RecordingHeader {
  std::uint16_t version = 0;
  Modality modality = Modality::EEG;
  int sample_rate_hz = 0;
  std::uint64_t samples_per_channel = 0;
  std::vector<std::string> channel_names;
};

RecordingHeader read_recording_header(std::istream& in);

// CSV with header `trial_id,class_label,onset_sample,paradigm`.
void write_events(std::ostream& out, std::span<const TrialEvent> events);
std::vector<TrialEvent> read_events(std::istream& in);
void write_events(const std::filesystem::path& path, std::span<const TrialEvent> events);
std::vector<TrialEvent> read_events(const std::filesystem::path& path);

}  // namespace graspda
