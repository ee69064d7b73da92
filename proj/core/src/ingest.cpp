#include "balarm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "balarm/error.hpp"

namespace balarm {

int NodeRegistry::intern(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, size());
  if (inserted) {
    ids_.push_back(id);
    status_.emplace_back();
  }
  return it->second;
}

void NodeRegistry::set_status(int node, const std::string& status) {
  auto& current = status_.at(static_cast<std::size_t>(node));
  if (current.empty()) {
    current = status;
    return;
  }
  if (current != status)
    throw ValidationError("conflicting status for node '" + ids_[static_cast<std::size_t>(node)] +
                          "': " + current + " vs " + status);
}

std::map<std::string, int> NodeRegistry::status_counts() const {
  std::map<std::string, int> out;
  for (const auto& s : status_)
    if (!s.empty()) ++out[s];
  return out;
}

namespace {

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ContactLog parse_contacts(std::istream& in) {
  ContactLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (tok.size() != 3 && tok.size() != 5)
      throw ValidationError(where + "expected 'time id_a id_b [status_a status_b]', got " +
                            std::to_string(tok.size()) + " fields");
    ContactEvent e;
    if (!parse_int(tok[0], e.time)) throw ValidationError(where + "time '" + tok[0] + "' is not an integer");
    if (tok[1] == tok[2]) throw ValidationError(where + "self-contact of node '" + tok[1] + "'");
    e.node_a = log.nodes.intern(tok[1]);
    e.node_b = log.nodes.intern(tok[2]);
    if (tok.size() == 5) {
      try {
        log.nodes.set_status(e.node_a, tok[3]);
        log.nodes.set_status(e.node_b, tok[4]);
      } catch (const ValidationError& err) {
        throw ValidationError(where + err.what());
      }
    }
    log.events.push_back(e);
  }
  if (in.bad()) throw IoError("read error while parsing contacts");
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const ContactEvent& a, const ContactEvent& b) { return a.time < b.time; });
  return log;
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

}  // namespace

EdgePanel aggregate(const ContactLog& log, const AggregateOptions& options, AggregateReport* report) {
  const std::int64_t w = options.window_seconds;
  require(w > 0, "aggregate: window_seconds must be positive");
  require(log.nodes.size() >= 2, "aggregate: need at least two nodes");
  require(options.t_start.has_value() || !log.events.empty(),
          "aggregate: no events and no explicit t_start");
  const std::int64_t t_start =
      options.t_start.value_or(floor_div(log.events.front().time - 1, w) * w);
  const std::int64_t t_end = options.t_end.value_or(log.events.empty() ? t_start : log.events.back().time);
  require(t_start < t_end, "aggregate: t_start must be before t_end");
  const auto n = static_cast<std::size_t>(ceil_div(t_end - t_start, w));

  const int n_nodes = log.nodes.size();
  auto edge_map = complete_edge_map(n_nodes);
  const std::size_t j = edge_map.size();
  std::vector<std::uint8_t> values(j * n, 0);

  AggregateReport rep;
  for (const auto& e : log.events) {
    if (e.time < t_start || e.time > t_end) {
      ++rep.n_events_dropped;
      continue;
    }
    const auto l = static_cast<std::size_t>(std::max<std::int64_t>(1, ceil_div(e.time - t_start, w)));
    int a = std::min(e.node_a, e.node_b), b = std::max(e.node_a, e.node_b);
    // Lexicographic index of (a, b) among all pairs.
    const auto row = static_cast<std::size_t>(a) * static_cast<std::size_t>(2 * n_nodes - a - 1) / 2 +
                     static_cast<std::size_t>(b - a - 1);
    values[row * n + (l - 1)] = 1;
    ++rep.n_events_used;
  }
  if (report) *report = rep;

  std::vector<std::int64_t> timestamps(n);
  for (std::size_t l = 0; l < n; ++l) timestamps[l] = static_cast<std::int64_t>(l + 1);

  PanelMetadata meta;
  meta.window_seconds = w;
  meta.t_start = t_start;
  if (options.phase_origin) {
    const std::int64_t delta = t_start - *options.phase_origin;
    // Nearest whole number of windows.
    meta.phase_offset = floor_div(2 * delta + w, 2 * w);
    meta.phase_origin = options.phase_origin_label;
  } else {
    meta.phase_offset = 0;
    meta.phase_origin = "t_start";
  }
  return EdgePanel(j, n, std::move(values), std::move(timestamps), std::move(edge_map),
                   log.nodes.ids(), std::move(meta));
}

ContactLog events_from_panel(const EdgePanel& panel) {
  ContactLog log;
  const auto& labels = panel.node_labels();
  for (int k = 0; k < panel.n_nodes(); ++k)
    log.nodes.intern(k < static_cast<int>(labels.size()) ? labels[static_cast<std::size_t>(k)]
                                                         : std::to_string(k + 1));
  const auto w = std::max<std::int64_t>(1, panel.metadata().window_seconds);
  for (std::size_t l = 0; l < panel.length(); ++l)
    for (std::size_t i = 0; i < panel.n_edges(); ++i)
      if (panel.value(i, l)) {
        const auto p = panel.edge_pair(i);
        log.events.push_back({panel.metadata().t_start + static_cast<std::int64_t>(l + 1) * w,
                              p.first, p.second});
      }
  return log;
}

std::int64_t parse_clock(const std::string& text) {
  std::vector<std::string> pieces;
  std::stringstream ss(text);
  for (std::string piece; std::getline(ss, piece, ':');) pieces.push_back(piece);
  std::int64_t parts[3] = {0, 0, 0};
  bool ok = pieces.size() == 2 || pieces.size() == 3;
  for (std::size_t i = 0; ok && i < pieces.size(); ++i) ok = parse_int(pieces[i], parts[i]);
  require(ok, "clock time '" + text + "' is not HH:MM[:SS]");
  require(parts[0] >= 0 && parts[0] < 24 && parts[1] >= 0 && parts[1] < 60 && parts[2] >= 0 &&
              parts[2] < 60,
          "clock time '" + text + "' is out of range");
  return parts[0] * 3600 + parts[1] * 60 + parts[2];
}

}  // namespace balarm
