#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace graspda::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;      // bad config, bad path, unparsable input
inline constexpr int kIsolationError = 3;   // a test trial leaked into training material

int exit_code_for(const std::exception& e);

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> methods;
  std::optional<std::string> paradigm;
};

// Each command reports errors on `err` and returns an exit code.
int cmd_synth(const std::optional<std::filesystem::path>& config_path, const Overrides& ov, std::ostream& log,
              std::ostream& err);
int cmd_run(const std::filesystem::path& config_path, const Overrides& ov, std::ostream& log, std::ostream& err);
int cmd_sweep(const std::filesystem::path& config_path, const std::string& param, const std::vector<double>& values,
              const Overrides& ov, std::ostream& log, std::ostream& err);
int cmd_inspect(const std::filesystem::path& recording, std::ostream& log, std::ostream& err);

int main(int argc, char** argv);

}  // namespace graspda::cli
