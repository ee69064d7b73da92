#pragma once

// File formats: the text panel format, JSON model files, JSON run configs,
// and helpers for tab-separated outputs. See docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "balarm/model.hpp"

namespace balarm {

inline constexpr int kPanelFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kTableFormatVersion = 1;

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

void write_panel(std::ostream& out, const EdgePanel& panel);
EdgePanel read_panel(std::istream& in);
EdgePanel load_panel(const std::filesystem::path& path);

using Metadata = std::vector<std::pair<std::string, std::string>>;

void write_model(std::ostream& out, const BalarmModel& model, const Metadata& metadata = {});
BalarmModel read_model(std::istream& in, Metadata* metadata = nullptr);
BalarmModel load_model(const std::filesystem::path& path, Metadata* metadata = nullptr);

/// Settings read from a JSON config file; absent keys stay empty.
struct RunConfig {
  std::vector<int> G;  // a single value, or a list for sweeps
  std::vector<int> H;
  std::optional<int> K;
  std::optional<int> P;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> restarts;
  std::optional<int> B;
  std::optional<double> ridge;
  std::optional<std::string> init;
  std::optional<int> max_iter;
  std::optional<int> threads;
};

/// ValidationError on unknown keys or values of the wrong type.
RunConfig read_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Writes "# key: value" lines.
void write_preamble(std::ostream& out, const std::string& kind, const Metadata& metadata);

/// Files written to "<path>.partial" and renamed into place by commit(); any
/// not committed are removed on destruction.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet();

  std::ostream& open(const std::filesystem::path& path);
  void commit();

 private:
  struct Entry {
    std::filesystem::path final_path;
    std::filesystem::path partial_path;
    std::unique_ptr<std::ofstream> stream;
  };
  std::vector<Entry> entries_;
  bool committed_ = false;
};

}  // namespace balarm
