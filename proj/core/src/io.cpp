#include "balarm/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "balarm/error.hpp"

namespace balarm {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

// --- panel -------------------------------------------------------------------

void write_panel(std::ostream& out, const EdgePanel& panel) {
  const auto& meta = panel.metadata();
  out << "balarm-panel " << kPanelFormatVersion << '\n'
      << "nodes " << panel.n_nodes() << '\n'
      << "edges " << panel.n_edges() << '\n'
      << "length " << panel.length() << '\n'
      << "window_seconds " << meta.window_seconds << '\n'
      << "t_start " << meta.t_start << '\n'
      << "phase_origin " << meta.phase_origin << '\n'
      << "phase_offset " << meta.phase_offset << '\n'
      << "first_time " << (panel.length() > 0 ? panel.timestamps()[0] : 1) << '\n'
      << "labels";
  if (panel.node_labels().empty()) out << " -";
  for (const auto& s : panel.node_labels()) out << ' ' << s;
  out << "\ndata\n";
  std::string row(panel.length(), '0');
  for (std::size_t i = 0; i < panel.n_edges(); ++i) {
    const auto x = panel.series(i);
    for (std::size_t l = 0; l < x.size(); ++l) row[l] = x[l] ? '1' : '0';
    const auto p = panel.edge_pair(i);
    out << p.first + 1 << ' ' << p.second + 1 << ' ' << row << '\n';
  }
}

namespace {

template <class T>
T header_value(std::istream& in, const std::string& key, std::size_t& line_no) {
  std::string line;
  ++line_no;
  if (!std::getline(in, line))
    throw ValidationError("panel: unexpected end of file, expected '" + key + "'");
  std::istringstream ss(line);
  std::string name;
  T value{};
  if (!(ss >> name) || name != key || !(ss >> value))
    throw ValidationError("panel line " + std::to_string(line_no) + ": expected '" + key + " <value>'");
  std::string extra;
  if (ss >> extra)
    throw ValidationError("panel line " + std::to_string(line_no) + ": trailing text after '" + key + "'");
  return value;
}

}  // namespace

EdgePanel read_panel(std::istream& in) {
  std::size_t line_no = 0;
  const auto version = header_value<int>(in, "balarm-panel", line_no);
  if (version != kPanelFormatVersion)
    throw ValidationError("panel: unsupported format version " + std::to_string(version));
  const auto n_nodes = header_value<long long>(in, "nodes", line_no);
  const auto n_edges = header_value<long long>(in, "edges", line_no);
  const auto length = header_value<long long>(in, "length", line_no);
  require(n_nodes >= 0 && n_edges >= 0 && length >= 0, "panel: negative size in header");
  PanelMetadata meta;
  meta.window_seconds = header_value<std::int64_t>(in, "window_seconds", line_no);
  meta.t_start = header_value<std::int64_t>(in, "t_start", line_no);
  meta.phase_origin = header_value<std::string>(in, "phase_origin", line_no);
  meta.phase_offset = header_value<std::int64_t>(in, "phase_offset", line_no);
  const auto first_time = header_value<std::int64_t>(in, "first_time", line_no);

  std::string line;
  ++line_no;
  if (!std::getline(in, line)) throw ValidationError("panel: missing 'labels' line");
  std::istringstream ls(line);
  std::string key;
  ls >> key;
  require(key == "labels", "panel line " + std::to_string(line_no) + ": expected 'labels'");
  std::vector<std::string> labels;
  for (std::string s; ls >> s;) labels.push_back(s);
  if (labels.size() == 1 && labels[0] == "-") labels.clear();
  require(labels.empty() || labels.size() == static_cast<std::size_t>(n_nodes),
          "panel: expected one label per node");

  ++line_no;
  if (!std::getline(in, line) || line != "data")
    throw ValidationError("panel line " + std::to_string(line_no) + ": expected 'data'");

  const auto j = static_cast<std::size_t>(n_edges);
  const auto n = static_cast<std::size_t>(length);
  std::vector<std::uint8_t> values(j * n);
  std::vector<NodePair> edge_map(j);
  for (std::size_t i = 0; i < j; ++i) {
    ++line_no;
    const auto where = "panel line " + std::to_string(line_no) + ": ";
    if (!std::getline(in, line)) throw ValidationError(where + "missing edge row");
    std::istringstream rs(line);
    long long k = 0, m = 0;
    std::string bits;
    if (!(rs >> k >> m >> bits)) throw ValidationError(where + "expected 'k j bits'");
    require(k >= 1 && m > k && m <= n_nodes, where + "node pair out of range");
    require(bits.size() == n, where + "row has " + std::to_string(bits.size()) + " values, expected " +
                                  std::to_string(n));
    for (std::size_t l = 0; l < n; ++l) {
      require(bits[l] == '0' || bits[l] == '1', where + "values must be 0 or 1");
      values[i * n + l] = bits[l] == '1' ? 1 : 0;
    }
    edge_map[i] = {static_cast<int>(k - 1), static_cast<int>(m - 1)};
  }
  std::vector<std::int64_t> timestamps(n);
  for (std::size_t l = 0; l < n; ++l) timestamps[l] = first_time + static_cast<std::int64_t>(l);
  EdgePanel panel(j, n, std::move(values), std::move(timestamps), std::move(edge_map),
                  std::move(labels), std::move(meta));
  require(panel.n_nodes() <= n_nodes, "panel: edge map refers to more nodes than declared");
  return panel;
}

EdgePanel load_panel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open panel file '" + path.string() + "'");
  return read_panel(in);
}

// --- model -------------------------------------------------------------------

void write_model(std::ostream& out, const BalarmModel& model, const Metadata& metadata) {
  model.validate();
  json j;
  j["format"] = "balarm-model";
  j["version"] = kModelFormatVersion;
  j["spec"] = {{"G", model.spec.n_clusters},
               {"K", model.spec.ar_order},
               {"H", model.spec.harmonic_order},
               {"P", model.spec.period}};
  j["mixing"] = model.mixing;
  j["clusters"] = json::array();
  for (const auto& c : model.clusters)
    j["clusters"].push_back({{"harmonic", c.harmonic}, {"ar", c.ar}, {"intercept", c.intercept}});
  json meta = json::object();
  for (const auto& [k, v] : metadata) meta[k] = v;
  j["metadata"] = meta;
  out << j.dump(2) << '\n';
}

BalarmModel read_model(std::istream& in, Metadata* metadata) {
  json j;
  try {
    in >> j;
    if (j.value("format", "") != "balarm-model")
      throw ValidationError("model: missing \"format\": \"balarm-model\"");
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ValidationError("model: unsupported format version");
    BalarmModel model;
    const auto& s = j.at("spec");
    model.spec = {s.at("G").get<int>(), s.at("K").get<int>(), s.at("H").get<int>(),
                  s.at("P").get<int>()};
    model.spec.validate();
    model.mixing = j.at("mixing").get<std::vector<double>>();
    for (const auto& c : j.at("clusters")) {
      ClusterParams p;
      p.harmonic = c.at("harmonic").get<std::vector<double>>();
      p.ar = c.at("ar").get<std::vector<double>>();
      p.intercept = c.at("intercept").get<double>();
      model.clusters.push_back(std::move(p));
    }
    model.validate();
    if (metadata) {
      metadata->clear();
      if (j.contains("metadata"))
        for (const auto& [k, v] : j["metadata"].items())
          metadata->emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
    }
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
}

BalarmModel load_model(const std::filesystem::path& path, Metadata* metadata) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  return read_model(in, metadata);
}

// --- config ------------------------------------------------------------------

namespace {

std::vector<int> int_or_list(const json& v, const std::string& key) {
  if (v.is_number_integer()) return {v.get<int>()};
  if (v.is_array()) {
    std::vector<int> out;
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ValidationError("config: '" + key + "' must hold integers");
      out.push_back(x.get<int>());
    }
    return out;
  }
  throw ValidationError("config: '" + key + "' must be an integer or a list of integers");
}

template <class T>
T typed(const json& v, const std::string& key) {
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ValidationError("");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ValidationError("");
    } else {
      if (!v.is_string()) throw ValidationError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ValidationError("config: '" + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig read_config(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  RunConfig c;
  for (const auto& [key, v] : j.items()) {
    if (key == "G") c.G = int_or_list(v, key);
    else if (key == "H") c.H = int_or_list(v, key);
    else if (key == "K") c.K = typed<int>(v, key);
    else if (key == "P") c.P = typed<int>(v, key);
    else if (key == "seed") c.seed = typed<std::uint64_t>(v, key);
    else if (key == "tol") c.tol = typed<double>(v, key);
    else if (key == "restarts") c.restarts = typed<int>(v, key);
    else if (key == "B") c.B = typed<int>(v, key);
    else if (key == "ridge") c.ridge = typed<double>(v, key);
    else if (key == "init") c.init = typed<std::string>(v, key);
    else if (key == "max_iter") c.max_iter = typed<int>(v, key);
    else if (key == "threads") c.threads = typed<int>(v, key);
    else throw ValidationError("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return read_config(in);
}

// --- outputs -----------------------------------------------------------------

void write_preamble(std::ostream& out, const std::string& kind, const Metadata& metadata) {
  out << "# balarm-" << kind << ' ' << kTableFormatVersion << '\n';
  for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << '\n';
}

OutputSet::~OutputSet() {
  if (committed_) return;
  for (auto& e : entries_) {
    e.stream.reset();
    std::error_code ec;
    std::filesystem::remove(e.partial_path, ec);
  }
}

std::ostream& OutputSet::open(const std::filesystem::path& path) {
  Entry e;
  e.final_path = path;
  e.partial_path = path;
  e.partial_path += ".partial";
  e.stream = std::make_unique<std::ofstream>(e.partial_path, std::ios::binary | std::ios::trunc);
  if (!*e.stream) throw IoError("cannot write '" + path.string() + "'");
  entries_.push_back(std::move(e));
  return *entries_.back().stream;
}

void OutputSet::commit() {
  for (auto& e : entries_) {
    e.stream->flush();
    if (!*e.stream) throw IoError("error writing '" + e.final_path.string() + "'");
    e.stream->close();
  }
  for (auto& e : entries_) {
    std::error_code ec;
    std::filesystem::rename(e.partial_path, e.final_path, ec);
    if (ec) throw IoError("cannot move output into place at '" + e.final_path.string() + "': " + ec.message());
  }
  committed_ = true;
}

}  // namespace balarm
