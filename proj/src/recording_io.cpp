#include "graspda/recording_io.hpp"

#include "graspda/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace graspda {
namespace {

static_assert(std::endian::native == std::endian::little, "recording I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated recording file");
  return v;
}

constexpr std::array<char, 4> kMagic{'B', 'C', 'I', 'R'};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

void write_recording(std::ostream& out, const Recording& rec) {
  rec.validate();
  if (rec.channels() > std::numeric_limits<std::uint16_t>::max()) throw InvalidParameter("too many channels");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint16_t>(out, kRecordingVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(rec.modality));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(rec.channels()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(rec.sample_rate_hz));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(rec.length()));
  for (const auto& name : rec.channel_names) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidParameter("channel name too long");
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  std::vector<float> row(static_cast<std::size_t>(rec.length()));
  for (Eigen::Index r = 0; r < rec.channels(); ++r) {
    for (Eigen::Index c = 0; c < rec.length(); ++c) row[c] = static_cast<float>(rec.samples(r, c));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("failed writing recording");
}

RecordingHeader read_recording_header(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ParseError("not a recording file (bad magic)");
  RecordingHeader h;
  h.version = get<std::uint16_t>(in);
  if (h.version != kRecordingVersion) throw ParseError("unsupported recording version " + std::to_string(h.version));
  const auto modality = get<std::uint8_t>(in);
  if (modality > 1) throw ParseError("invalid modality byte");
  h.modality = static_cast<Modality>(modality);
  const auto channels = get<std::uint16_t>(in);
  h.sample_rate_hz = static_cast<int>(get<std::uint32_t>(in));
  h.samples_per_channel = get<std::uint64_t>(in);
  for (std::uint16_t i = 0; i < channels; ++i) {
    const auto len = get<std::uint16_t>(in);
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (!in) throw ParseError("truncated channel name");
    h.channel_names.push_back(std::move(name));
  }
  return h;
}

Recording read_recording(std::istream& in) {
  RecordingHeader h = read_recording_header(in);
  Recording rec;
  rec.modality = h.modality;
  rec.sample_rate_hz = h.sample_rate_hz;
  rec.channel_names = std::move(h.channel_names);
  const auto n = static_cast<Eigen::Index>(h.samples_per_channel);
  rec.samples.resize(static_cast<Eigen::Index>(rec.channel_names.size()), n);
  std::vector<float> row(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < rec.samples.rows(); ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw ParseError("truncated sample data");
    for (Eigen::Index c = 0; c < n; ++c) rec.samples(r, c) = row[c];
  }
  rec.validate();
  return rec;
}

void write_recording(const std::filesystem::path& path, const Recording& rec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_recording(out, rec);
}

Recording read_recording(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_recording(in);
}

void write_events(std::ostream& out, std::span<const TrialEvent> events) {
  out << "trial_id,class_label,onset_sample,paradigm\n";
  for (const auto& e : events) {
    out << e.trial_id << ',' << e.class_label << ',' << e.onset_sample << ',' << to_string(e.paradigm) << '\n';
  }
}

std::vector<TrialEvent> read_events(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "trial_id,class_label,onset_sample,paradigm") {
    throw ParseError("events file must start with header 'trial_id,class_label,onset_sample,paradigm'");
  }
  std::vector<TrialEvent> events;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw ParseError("events line " + std::to_string(line_no) + ": expected 4 fields");
    try {
      TrialEvent e;
      e.trial_id = static_cast<std::uint32_t>(std::stoul(f[0]));
      e.class_label = std::stoi(f[1]);
      e.onset_sample = std::stoll(f[2]);
      e.paradigm = parse_paradigm(f[3]);
      if (e.class_label < 1 || e.class_label > 5) throw ParseError("class_label outside 1..5");
      events.push_back(e);
    } catch (const std::logic_error&) {
      throw ParseError("events line " + std::to_string(line_no) + ": malformed number");
    } catch (const ParseError& err) {
      throw ParseError("events line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return events;
}

void write_events(const std::filesystem::path& path, std::span<const TrialEvent> events) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_events(out, events);
}

std::vector<TrialEvent> read_events(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_events(in);
}

}  // namespace graspda
