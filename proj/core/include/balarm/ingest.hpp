#pragma once

// Contact-event logs ("t i j [Si Sj]" per line) and their aggregation into
// regular snapshot panels.

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "balarm/model.hpp"

namespace balarm {

struct ContactEvent {
  std::int64_t time = 0;
  int node_a = 0;  // dense 0-based index
  int node_b = 0;
};

/// Raw identifiers in first-appearance order, with optional status categories.
class NodeRegistry {
 public:
  /// Dense index of `id`, registering it if new.
  int intern(const std::string& id);
  /// Records a status; ValidationError if it conflicts with an earlier one.
  void set_status(int node, const std::string& status);

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& status(int node) const { return status_[static_cast<std::size_t>(node)]; }
  std::map<std::string, int> status_counts() const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::string> status_;
  std::unordered_map<std::string, int> index_;
};

struct ContactLog {
  std::vector<ContactEvent> events;  // sorted by time (stable)
  NodeRegistry nodes;
};

/// Blank lines and lines starting with '#' are skipped. ValidationError with
/// the line number on malformed input.
ContactLog parse_contacts(std::istream& in);

struct AggregateOptions {
  std::int64_t window_seconds = 300;
  /// Default: floor((first event - 1) / w) * w.
  std::optional<std::int64_t> t_start;
  /// Default: last event time.
  std::optional<std::int64_t> t_end;
  /// Log time of a phase-zero instant (e.g. a midnight). Default: t_start.
  std::optional<std::int64_t> phase_origin;
  std::string phase_origin_label = "explicit";
};

struct AggregateReport {
  std::size_t n_events_used = 0;
  std::size_t n_events_dropped = 0;  // outside [t_start, t_end]
};

/// Snapshot l = 1..n covers (t_start + (l-1) w, t_start + l w] with
/// n = ceil((t_end - t_start) / w); an event exactly at t_start counts in
/// snapshot 1. Every pair of registered nodes becomes an edge, lexicographic.
EdgePanel aggregate(const ContactLog& log, const AggregateOptions& options,
                    AggregateReport* report = nullptr);

/// One event per active cell, stamped at the end of its snapshot. Aggregating
/// these with the panel's t_start, window and t_start + n w reproduces it.
ContactLog events_from_panel(const EdgePanel& panel);

/// Seconds after midnight of "HH:MM" or "HH:MM:SS".
std::int64_t parse_clock(const std::string& text);

}  // namespace balarm
