// balarm: command-line front end.
//
//   balarm ingest     contact log -> panel
//   balarm simulate   model or preset -> panel (+ true labels)
//   balarm fit        panel -> model, responsibilities, trace
//   balarm sweep      panel -> BIC table over (G, H)
//   balarm bootstrap  model -> curve bands
//   balarm diagnose   panel -> run-length tests, QQ data, cross-correlations
//   balarm curves     model -> time-of-day curves
//   balarm stationary (b, c) grid -> ALARM(1) marginal and lag-1 correlation
//
// Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "balarm/balarm.hpp"

namespace {

using namespace balarm;

constexpr const char* kVersion = "0.1.0";

std::string fmt(double x) { return format_double(x); }

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// Shared fitting settings: command line beats config file beats default.
struct FitSettings {
  std::string config;
  std::vector<int> G{2};
  std::vector<int> H{0};
  int K = 1;
  int P = 288;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int restarts = 0;
  double ridge = 1e-6;
  std::string init = "summary-kmeans";
  int max_iter = 500;
  int threads = 0;
  int B = 100;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool grid) {
    opts["config"] = app->add_option("--config", config, "JSON config file (keys G, K, H, P, seed, tol, restarts, B, ridge, init, max_iter, threads)");
    if (grid) {
      opts["G"] = app->add_option("-G,--clusters", G, "cluster counts, e.g. 2,3,4")->delimiter(',');
      opts["H"] = app->add_option("-H,--harmonics", H, "harmonic orders, e.g. 2,3,4")->delimiter(',');
    } else {
      opts["G"] = app->add_option("-G,--clusters", G, "number of clusters")->expected(1);
      opts["H"] = app->add_option("-H,--harmonics", H, "harmonic order")->expected(1);
    }
    opts["K"] = app->add_option("-K,--ar-order", K, "autoregressive order");
    opts["P"] = app->add_option("-P,--period", P, "time steps per cycle");
    opts["seed"] = app->add_option("--seed", seed, "master seed");
    opts["tol"] = app->add_option("--tol", tol, "EM tolerance on the penalized log-likelihood");
    opts["restarts"] = app->add_option("--restarts", restarts, "EM restarts (0 = strategy default)");
    opts["ridge"] = app->add_option("--ridge", ridge, "ridge on non-intercept coefficients");
    opts["init"] = app->add_option("--init", init, "random-responsibility | summary-kmeans | provided-model");
    opts["max_iter"] = app->add_option("--max-iter", max_iter, "EM iteration cap");
    opts["threads"] = app->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  void add_replicates(CLI::App* app) {
    opts["B"] = app->add_option("-B,--replicates", B, "bootstrap replicates");
  }

  bool given(const std::string& key) const {
    auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  void resolve() {
    if (config.empty()) return;
    const RunConfig c = load_config(config);
    if (!given("G") && !c.G.empty()) G = c.G;
    if (!given("H") && !c.H.empty()) H = c.H;
    if (!given("K") && c.K) K = *c.K;
    if (!given("P") && c.P) P = *c.P;
    if (!given("seed") && c.seed) seed = *c.seed;
    if (!given("tol") && c.tol) tol = *c.tol;
    if (!given("restarts") && c.restarts) restarts = *c.restarts;
    if (!given("ridge") && c.ridge) ridge = *c.ridge;
    if (!given("init") && c.init) init = *c.init;
    if (!given("max_iter") && c.max_iter) max_iter = *c.max_iter;
    if (!given("threads") && c.threads) threads = *c.threads;
    if (!given("B") && c.B) B = *c.B;
  }

  EmOptions em() const {
    EmOptions o;
    o.init = parse_init_strategy(init);
    o.n_restarts = restarts;
    o.seed = seed;
    o.tol = tol;
    o.max_iter = max_iter;
    o.glm.ridge = ridge;
    o.threads = threads;
    return o;
  }

  Metadata metadata(bool grid) const {
    Metadata m{{"version", kVersion}, {"seed", std::to_string(seed)}};
    if (grid) {
      m.emplace_back("G", join_ints(G));
      m.emplace_back("H", join_ints(H));
    }
    m.emplace_back("K", std::to_string(K));
    m.emplace_back("P", std::to_string(P));
    m.emplace_back("init", init);
    m.emplace_back("restarts", std::to_string(restarts > 0 ? restarts : default_restarts(parse_init_strategy(init))));
    m.emplace_back("tol", fmt(tol));
    m.emplace_back("max_iter", std::to_string(max_iter));
    m.emplace_back("ridge", fmt(ridge));
    return m;
  }
};

// --- shared readers/writers ---------------------------------------------------

std::vector<int> read_label_column(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  std::vector<int> out;
  std::size_t col = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    if (header.empty()) {
      header = fields;
      auto it = std::find(header.begin(), header.end(), column);
      if (it == header.end()) throw ValidationError("'" + path + "' has no '" + column + "' column");
      col = static_cast<std::size_t>(it - header.begin());
      continue;
    }
    if (fields.size() != header.size()) throw ValidationError("'" + path + "': ragged row");
    try {
      out.push_back(std::stoi(fields[col]) - 1);
    } catch (const std::exception&) {
      throw ValidationError("'" + path + "': non-integer " + column);
    }
  }
  return out;
}

void write_labels(std::ostream& out, const EdgePanel& panel, const std::vector<int>& labels,
                  const Metadata& meta) {
  write_preamble(out, "labels", meta);
  out << "edge\tk\tj\tcluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto p = panel.edge_pair(i);
    out << i + 1 << '\t' << p.first + 1 << '\t' << p.second + 1 << '\t' << labels[i] + 1 << '\n';
  }
}

void write_curves(std::ostream& out, const BalarmModel& model, const Metadata& meta) {
  write_preamble(out, "curves", meta);
  out << "cluster\ttime_of_day\tp\trho\n";
  for (std::size_t g = 0; g < model.clusters.size(); ++g) {
    const auto c = cyclo_curves(model.clusters[g], model.spec);
    for (std::size_t l = 0; l < c.p_curve.size(); ++l)
      out << g + 1 << '\t' << l << '\t' << fmt(c.p_curve[l]) << '\t' << fmt(c.rho_curve[l]) << '\n';
  }
}

BalarmModel preset_model(const std::string& name) {
  // ALARM(1) clusters with (b, c): A (2.89, -1), B (4.48, -4), C (5.43, -5), D (6.42, -6).
  static const std::map<char, std::pair<double, double>> table{
      {'A', {2.89, -1.0}}, {'B', {4.48, -4.0}}, {'C', {5.43, -5.0}}, {'D', {6.42, -6.0}}};
  std::vector<char> names;
  std::stringstream ss(name);
  for (std::string part; std::getline(ss, part, '+');) {
    if (part.size() != 1 || !table.count(part[0]))
      throw ValidationError("unknown preset '" + name + "' (use clusters A-D joined by '+', e.g. A+B)");
    names.push_back(part[0]);
  }
  const int g = static_cast<int>(names.size());
  BalarmModel m{{g, 1, 0, 288}, std::vector<double>(names.size(), 1.0 / g), {}};
  for (char c : names) m.clusters.push_back({{}, {table.at(c).first}, table.at(c).second});
  return m;
}

// --- commands -----------------------------------------------------------------

struct IngestArgs {
  std::string input, out;
  std::int64_t window = 300;
  std::optional<std::int64_t> t_start, t_end, phase_origin;
  std::string clock_start;
};

int run_ingest(const IngestArgs& a) {
  std::ifstream in(a.input);
  if (!in) throw IoError("cannot open contact log '" + a.input + "'");
  const ContactLog log = parse_contacts(in);
  AggregateOptions opt;
  opt.window_seconds = a.window;
  opt.t_start = a.t_start;
  opt.t_end = a.t_end;
  if (a.phase_origin && !a.clock_start.empty())
    throw ValidationError("give at most one of --phase-origin and --clock-start");
  if (a.phase_origin) {
    opt.phase_origin = a.phase_origin;
    opt.phase_origin_label = "explicit";
  } else if (!a.clock_start.empty()) {
    // Log time 0 is the given wall-clock time; phase zero is the preceding midnight.
    opt.phase_origin = -parse_clock(a.clock_start);
    opt.phase_origin_label = "midnight";
  }
  AggregateReport report;
  const EdgePanel panel = aggregate(log, opt, &report);

  OutputSet outputs;
  write_panel(outputs.open(a.out), panel);
  outputs.commit();

  std::size_t ones = 0;
  for (auto v : panel.values()) ones += v;
  const double cells = static_cast<double>(panel.n_edges() * panel.length());
  std::cout << "nodes\t" << panel.n_nodes() << "\nedges\t" << panel.n_edges() << "\nsnapshots\t"
            << panel.length() << "\ndensity\t" << fmt(cells > 0 ? ones / cells : 0.0)
            << "\nevents_used\t" << report.n_events_used << "\nevents_dropped\t"
            << report.n_events_dropped << "\nt_start\t" << panel.metadata().t_start
            << "\nphase_offset\t" << panel.metadata().phase_offset << '\n';
  for (const auto& [status, count] : log.nodes.status_counts())
    std::cout << "status_" << status << '\t' << count << '\n';
  return 0;
}

struct SimulateArgs {
  std::string model, preset, out, labels;
  std::size_t edges = 0, per_cluster = 0, length = 1200;
  std::uint64_t seed = 1;
  std::optional<std::size_t> burn_in;
  std::int64_t phase_offset = 0;
  int threads = 0;
};

int run_simulate(const SimulateArgs& a) {
  if (a.model.empty() == a.preset.empty()) throw ValidationError("give exactly one of --model and --preset");
  if ((a.edges > 0) == (a.per_cluster > 0)) throw ValidationError("give exactly one of --edges and --per-cluster");
  const BalarmModel model = a.model.empty() ? preset_model(a.preset) : load_model(a.model);
  SimulationOptions sim;
  sim.burn_in = a.burn_in;
  sim.phase_offset = a.phase_offset;
  sim.threads = a.threads;
  EdgePanel panel;
  std::vector<int> labels;
  if (a.per_cluster > 0) {
    for (int g = 0; g < model.spec.n_clusters; ++g) labels.insert(labels.end(), a.per_cluster, g);
    panel = simulate_balarm_labeled(model, labels, a.length, a.seed, sim);
  } else {
    auto s = simulate_balarm(model, a.edges, a.length, a.seed, sim);
    panel = std::move(s.panel);
    labels = std::move(s.labels);
  }
  OutputSet outputs;
  write_panel(outputs.open(a.out), panel);
  if (!a.labels.empty()) {
    Metadata meta{{"version", kVersion}, {"seed", std::to_string(a.seed)},
                  {"source", a.model.empty() ? "preset " + a.preset : a.model}};
    write_labels(outputs.open(a.labels), panel, labels, meta);
  }
  outputs.commit();
  std::cout << "edges\t" << panel.n_edges() << "\nsnapshots\t" << panel.length() << '\n';
  return 0;
}

struct FitArgs {
  std::string panel, prefix, init_model, truth;
  FitSettings s;
};

int run_fit(FitArgs& a) {
  a.s.resolve();
  if (a.s.G.size() != 1 || a.s.H.size() != 1) throw ValidationError("fit takes a single G and H");
  const EdgePanel panel = load_panel(a.panel);
  const ModelSpec spec{a.s.G[0], a.s.K, a.s.H[0], a.s.P};
  EmOptions em = a.s.em();
  if (!a.init_model.empty()) {
    em.provided_model = load_model(a.init_model);
    if (!a.s.given("init") ) em.init = InitStrategy::ProvidedModel;
  }
  const FitResult fit = fit_em(panel, spec, em);
  const double b = bic(fit, panel);

  Metadata meta = a.s.metadata(false);
  meta.insert(meta.begin() + 2, {"G", std::to_string(spec.n_clusters)});
  meta.insert(meta.begin() + 3, {"H", std::to_string(spec.harmonic_order)});
  meta.emplace_back("panel", a.panel);
  Metadata model_meta = meta;
  model_meta.emplace_back("loglik", fmt(fit.loglik));
  model_meta.emplace_back("bic", fmt(b));
  model_meta.emplace_back("q", std::to_string(free_parameters(spec)));
  model_meta.emplace_back("n_obs", std::to_string(bic_observations(panel, spec)));
  model_meta.emplace_back("converged", fit.converged ? "true" : "false");
  model_meta.emplace_back("iterations", std::to_string(fit.n_iters));
  model_meta.emplace_back("best_restart", std::to_string(fit.info.best_restart + 1));
  model_meta.emplace_back("failed_restarts", std::to_string(fit.info.n_failed_restarts));

  OutputSet outputs;
  write_model(outputs.open(a.prefix + ".model.json"), fit.model, model_meta);
  {
    auto& out = outputs.open(a.prefix + ".responsibilities.tsv");
    write_preamble(out, "responsibilities", meta);
    out << "edge\tk\tj\tlabel";
    for (int g = 0; g < spec.n_clusters; ++g) out << "\ttau_" << g + 1;
    out << '\n';
    for (std::size_t i = 0; i < panel.n_edges(); ++i) {
      const auto p = panel.edge_pair(i);
      out << i + 1 << '\t' << p.first + 1 << '\t' << p.second + 1 << '\t' << fit.hard_labels[i] + 1;
      for (int g = 0; g < spec.n_clusters; ++g)
        out << '\t' << fmt(fit.responsibilities(static_cast<Eigen::Index>(i), g));
      out << '\n';
    }
  }
  {
    auto& out = outputs.open(a.prefix + ".trace.tsv");
    write_preamble(out, "trace", meta);
    out << "iteration\tpenalized_loglik\n";
    for (std::size_t t = 0; t < fit.loglik_trace.size(); ++t)
      out << t << '\t' << fmt(fit.loglik_trace[t]) << '\n';
  }
  outputs.commit();

  std::cout << "loglik\t" << fmt(fit.loglik) << "\nbic\t" << fmt(b) << "\nconverged\t"
            << (fit.converged ? "true" : "false") << "\niterations\t" << fit.n_iters << '\n';
  for (int g = 0; g < spec.n_clusters; ++g)
    std::cout << "mixing_" << g + 1 << '\t' << fmt(fit.model.mixing[static_cast<std::size_t>(g)]) << '\n';
  if (!a.truth.empty()) {
    const auto truth = read_label_column(a.truth, "cluster");
    if (truth.size() != panel.n_edges()) throw ValidationError("reference labels do not match the panel");
    std::cout << "ari\t" << fmt(adjusted_rand_index(truth, fit.hard_labels)) << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string panel, out;
  FitSettings s;
};

int run_sweep(SweepArgs& a) {
  a.s.resolve();
  const EdgePanel panel = load_panel(a.panel);
  SweepOptions opt;
  opt.cluster_counts = a.s.G;
  opt.harmonic_orders = a.s.H;
  opt.ar_order = a.s.K;
  opt.period = a.s.P;
  opt.em = a.s.em();
  const auto rows = sweep(panel, opt);

  Metadata meta = a.s.metadata(true);
  meta.emplace_back("panel", a.panel);
  meta.emplace_back("n_obs_definition", "J*(n-K)");
  OutputSet outputs;
  auto& out = outputs.open(a.out);
  write_preamble(out, "sweep", meta);
  out << "G\tH\tloglik\tq\tn_obs\tbic\tconverged\tn_restarts_used\tbest\terror\n";
  for (const auto& r : rows) {
    out << r.n_clusters << '\t' << r.harmonic_order << '\t' << (r.failed ? "" : fmt(r.loglik)) << '\t'
        << r.q << '\t' << r.n_obs << '\t' << (r.failed ? "" : fmt(r.bic)) << '\t'
        << (r.converged ? "true" : "false") << '\t' << r.n_restarts_used << '\t'
        << (r.best ? "*" : "") << '\t';
    std::string err = r.error;
    std::replace(err.begin(), err.end(), '\n', ' ');
    std::replace(err.begin(), err.end(), '\t', ' ');
    out << err << '\n';
  }
  outputs.commit();
  for (const auto& r : rows)
    if (r.best) std::cout << "best\tG=" << r.n_clusters << "\tH=" << r.harmonic_order << "\tbic=" << fmt(r.bic) << '\n';
  return 0;
}

struct BootstrapArgs {
  std::string model, panel, out, params_out;
  std::size_t edges = 0, length = 0;
  double rho_threshold = 0.04;
  FitSettings s;
};

int run_bootstrap(BootstrapArgs& a) {
  a.s.resolve();
  const BalarmModel model = load_model(a.model);
  BootstrapOptions opt;
  opt.n_edges = a.edges;
  opt.length = a.length;
  if (!a.panel.empty()) {
    const EdgePanel panel = load_panel(a.panel);
    if (opt.n_edges == 0) opt.n_edges = panel.n_edges();
    if (opt.length == 0) opt.length = panel.length();
    opt.simulation.first_time = panel.timestamps()[0];
    opt.simulation.phase_offset = panel.metadata().phase_offset;
  }
  if (opt.n_edges == 0 || opt.length == 0)
    throw ValidationError("bootstrap needs --panel or both --edges and --length");
  opt.replicates = a.s.B;
  opt.seed = a.s.seed;
  opt.em = a.s.em();
  opt.rho_threshold = a.rho_threshold;
  opt.threads = a.s.threads;
  const auto bands = parametric_bootstrap(model, opt);

  Metadata meta{{"version", kVersion},
                {"seed", std::to_string(a.s.seed)},
                {"B", std::to_string(a.s.B)},
                {"edges", std::to_string(opt.n_edges)},
                {"length", std::to_string(opt.length)},
                {"phase_offset", std::to_string(opt.simulation.phase_offset)},
                {"tol", fmt(a.s.tol)},
                {"max_iter", std::to_string(a.s.max_iter)},
                {"ridge", fmt(a.s.ridge)},
                {"rho_threshold", fmt(a.rho_threshold)},
                {"model", a.model},
                {"failed_replicates", std::to_string(bands.n_failed)}};
  for (std::size_t g = 0; g < bands.clusters.size(); ++g)
    meta.emplace_back("rho_bias_" + std::to_string(g + 1), fmt(bands.clusters[g].rho_bias));

  OutputSet outputs;
  auto& out = outputs.open(a.out);
  write_preamble(out, "bands", meta);
  out << "cluster\ttime_of_day\tp_lo\tp_med\tp_hi\tp_fit\trho_lo\trho_med\trho_hi\trho_fit\n";
  for (std::size_t g = 0; g < bands.clusters.size(); ++g) {
    const auto& c = bands.clusters[g];
    for (std::size_t l = 0; l < c.p_fit.size(); ++l) {
      out << g + 1 << '\t' << l << '\t' << fmt(c.p_lo[l]) << '\t' << fmt(c.p_med[l]) << '\t'
          << fmt(c.p_hi[l]) << '\t' << fmt(c.p_fit[l]);
      if (c.rho_reported)
        out << '\t' << fmt(c.rho_lo[l]) << '\t' << fmt(c.rho_med[l]) << '\t' << fmt(c.rho_hi[l])
            << '\t' << fmt(c.rho_fit[l]) << '\n';
      else
        out << "\t\t\t\t\n";
    }
  }
  if (!a.params_out.empty()) {
    auto& po = outputs.open(a.params_out);
    write_preamble(po, "replicate-parameters", meta);
    po << "replicate";
    for (int g = 1; g < model.spec.n_clusters; ++g) po << "\tpi_" << g;
    for (int g = 1; g <= model.spec.n_clusters; ++g) {
      for (int d = 1; d <= model.spec.harmonic_dim(); ++d) po << "\ta_" << g << '_' << d;
      for (int k = 1; k <= model.spec.ar_order; ++k) po << "\tb_" << g << '_' << k;
      po << "\tc_" << g;
    }
    po << '\n';
    const auto& m = bands.replicate_parameters;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      po << r + 1;
      for (Eigen::Index d = 0; d < m.cols(); ++d) po << '\t' << fmt(m(r, d));
      po << '\n';
    }
  }
  outputs.commit();
  std::cout << "replicates\t" << bands.n_requested - bands.n_failed << "\nfailed\t" << bands.n_failed << '\n';
  return 0;
}

struct DiagnoseArgs {
  std::string panel, prefix, model, responsibilities;
  int n_mc = 199;
  std::size_t min_runs = 5;
  std::uint64_t seed = 1;
  std::size_t m = 200, lag = 0, max_pairs = 200000;
  int bins = 40;
  int threads = 0;
};

int run_diagnose(const DiagnoseArgs& a) {
  const EdgePanel panel = load_panel(a.panel);
  Metadata meta{{"version", kVersion},
                {"seed", std::to_string(a.seed)},
                {"panel", a.panel},
                {"n_mc", std::to_string(a.n_mc)},
                {"min_runs", std::to_string(a.min_runs)},
                {"censored_runs", "excluded"},
                {"run_convention", "trials until first success, support 1,2,..."}};
  OutputSet outputs;

  struct EdgeTest {
    std::string state;
    std::size_t n_runs = 0;
    double p = 0.0;
    KsResult ks;
    std::vector<std::pair<double, double>> qq;
  };
  std::vector<std::vector<EdgeTest>> tests(panel.n_edges());
  std::vector<std::optional<IndependenceProbe>> probes(panel.n_edges());
  parallel_for(panel.n_edges(), a.threads, [&](std::size_t i) {
    const auto x = panel.series(i);
    const auto runs = run_lengths(x);
    double mean = 0.0;
    for (auto v : x) mean += v;
    mean /= static_cast<double>(x.size());
    try {
      probes[i] = independence_probe(x);
    } catch (const ValidationError&) {
    }
    for (std::uint8_t state : {std::uint8_t{0}, std::uint8_t{1}}) {
      const auto r = runs.interior(state);
      // Off-runs end with an on-state (success probability p), on-runs with an off-state.
      const double p = state == 0 ? mean : 1.0 - mean;
      if (r.size() < a.min_runs || p <= 0.0 || p >= 1.0) continue;
      EdgeTest t;
      t.state = state == 0 ? "off" : "on";
      t.n_runs = r.size();
      t.p = p;
      t.ks = ks_geometric(r, p, a.n_mc, derive_seed(a.seed, {4, i, state}),
                          {KsCalibration::Kind::SeriesMean, x.size()});
      t.qq = geometric_qq(r, p);
      tests[i].push_back(std::move(t));
    }
  });

  {
    auto& out = outputs.open(a.prefix + ".runs.tsv");
    write_preamble(out, "runs", meta);
    out << "edge\tk\tj\tp_hat_mean\tp_hat_runs\tdiscrepancy\tstate\tn_runs\tp\tks_statistic\tks_p_value\n";
    for (std::size_t i = 0; i < panel.n_edges(); ++i) {
      const auto pr = panel.edge_pair(i);
      std::string probe = "\t\t";
      if (probes[i])
        probe = fmt(probes[i]->p_hat_mean) + '\t' + fmt(probes[i]->p_hat_runs) + '\t' + fmt(probes[i]->discrepancy);
      for (const auto& t : tests[i])
        out << i + 1 << '\t' << pr.first + 1 << '\t' << pr.second + 1 << '\t' << probe << '\t' << t.state
            << '\t' << t.n_runs << '\t' << fmt(t.p) << '\t' << fmt(t.ks.statistic) << '\t'
            << fmt(t.ks.p_value) << '\n';
    }
  }
  {
    auto& out = outputs.open(a.prefix + ".qq.tsv");
    write_preamble(out, "qq", meta);
    out << "edge\tstate\ttheoretical\tsample\n";
    for (std::size_t i = 0; i < panel.n_edges(); ++i)
      for (const auto& t : tests[i])
        for (const auto& [th, sa] : t.qq) out << i + 1 << '\t' << t.state << '\t' << fmt(th) << '\t' << fmt(sa) << '\n';
  }

  if (!a.model.empty() || !a.responsibilities.empty()) {
    if (a.model.empty() || a.responsibilities.empty())
      throw ValidationError("cross-correlations need both --model and --responsibilities");
    const BalarmModel model = load_model(a.model);
    const auto labels = read_label_column(a.responsibilities, "label");
    if (labels.size() != panel.n_edges()) throw ValidationError("responsibilities do not match the panel");
    CrossCorrOptions co;
    co.lag = a.lag;
    co.bins = a.bins;
    co.max_pairs = a.max_pairs;
    co.seed = a.seed;
    co.threads = a.threads;
    SimulationOptions sim;
    sim.first_time = panel.timestamps()[0];
    sim.phase_offset = panel.metadata().phase_offset;
    const auto null = crosscorr_null(model, a.m, panel.length(), co, sim);
    const auto obs = crosscorr_observed(panel, labels, model.spec.n_clusters, co);
    Metadata cmeta{{"version", kVersion},          {"seed", std::to_string(a.seed)},
                   {"panel", a.panel},             {"model", a.model},
                   {"series_per_cluster", std::to_string(a.m)}, {"lag", std::to_string(a.lag)},
                   {"bins", std::to_string(a.bins)},            {"max_pairs", std::to_string(a.max_pairs)}};
    for (std::size_t k = 0; k < obs.groups.size(); ++k) {
      const auto& o = obs.groups[k];
      const auto& nl = null.groups[k];
      const std::string name = std::to_string(o.group_a + 1) + "-" + std::to_string(o.group_b + 1);
      cmeta.emplace_back("group " + name,
                         "observed_pairs=" + std::to_string(o.n_pairs - o.n_pairs_excluded) +
                             " observed_constant_series=" + std::to_string(o.n_series_excluded) +
                             " observed_skipped=" + (o.skipped ? "true" : "false") +
                             " null_pairs=" + std::to_string(nl.n_pairs - nl.n_pairs_excluded) +
                             " null_constant_series=" + std::to_string(nl.n_series_excluded));
    }
    auto& out = outputs.open(a.prefix + ".crosscorr.tsv");
    write_preamble(out, "crosscorr", cmeta);
    out << "pair_group\tbin_lo\tbin_hi\tnull_count\tobserved_count\n";
    for (std::size_t k = 0; k < obs.groups.size(); ++k) {
      const auto& o = obs.groups[k];
      const auto& nl = null.groups[k];
      const std::string name = std::to_string(o.group_a + 1) + "-" + std::to_string(o.group_b + 1);
      for (int b = 0; b < a.bins; ++b) {
        const auto bs = static_cast<std::size_t>(b);
        out << name << '\t' << fmt(obs.bin_edges[bs]) << '\t' << fmt(obs.bin_edges[bs + 1]) << '\t'
            << nl.counts[bs] << '\t' << o.counts[bs] << '\n';
      }
    }
  }
  outputs.commit();
  std::size_t n_tests = 0, n_reject = 0;
  for (const auto& t : tests)
    for (const auto& e : t) {
      ++n_tests;
      n_reject += e.ks.p_value <= 0.05;
    }
  std::cout << "ks_tests\t" << n_tests << "\nks_rejected_0.05\t" << n_reject << '\n';
  return 0;
}

struct CurvesArgs {
  std::string model, out;
};

int run_curves(const CurvesArgs& a) {
  const BalarmModel model = load_model(a.model);
  OutputSet outputs;
  write_curves(outputs.open(a.out), model, {{"version", kVersion}, {"model", a.model}});
  outputs.commit();
  return 0;
}

struct StationaryArgs {
  std::vector<double> b, c;
  std::string out;
};

int run_stationary(const StationaryArgs& a) {
  OutputSet outputs;
  auto& out = outputs.open(a.out);
  write_preamble(out, "stationary", {{"version", kVersion}});
  out << "b\tc\tp\trho\n";
  for (double b : a.b)
    for (double c : a.c) {
      const auto s = alarm1_stationary(b, c);
      out << fmt(b) << '\t' << fmt(c) << '\t' << fmt(s.marginal_p) << '\t' << fmt(s.lag1_rho) << '\n';
    }
  outputs.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixtures of logistic autoregressive binary series for dynamic contact networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ci = app.add_subcommand("ingest", "aggregate a contact log into a snapshot panel");
  ci->add_option("--input", ingest.input, "contact log: 'time id_a id_b [status_a status_b]' per line")->required();
  ci->add_option("--window", ingest.window, "snapshot width in seconds")->required();
  ci->add_option("--out", ingest.out, "output panel file")->required();
  ci->add_option("--t-start", ingest.t_start, "start of snapshot 1 (log seconds)");
  ci->add_option("--t-end", ingest.t_end, "end of the last snapshot (log seconds)");
  ci->add_option("--phase-origin", ingest.phase_origin, "log time of harmonic phase zero");
  ci->add_option("--clock-start", ingest.clock_start, "wall-clock HH:MM of log time 0; phase zero at midnight");

  SimulateArgs simulate;
  auto* cs = app.add_subcommand("simulate", "simulate a panel from a model");
  cs->add_option("--model", simulate.model, "model JSON file");
  cs->add_option("--preset", simulate.preset, "ALARM(1) preset clusters, e.g. A+B, A+D");
  cs->add_option("--edges", simulate.edges, "edges, memberships drawn from the mixing weights");
  cs->add_option("--per-cluster", simulate.per_cluster, "edges per cluster, memberships fixed");
  cs->add_option("--length", simulate.length, "snapshots per series");
  cs->add_option("--seed", simulate.seed, "seed");
  cs->add_option("--burn-in", simulate.burn_in, "discarded warm-up steps (default: one period)");
  cs->add_option("--phase-offset", simulate.phase_offset, "harmonic phase of snapshot 0");
  cs->add_option("--out", simulate.out, "output panel file")->required();
  cs->add_option("--labels", simulate.labels, "output file for the true memberships");
  cs->add_option("--threads", simulate.threads, "worker threads (0 = all cores)");

  FitArgs fit;
  auto* cf = app.add_subcommand("fit", "fit a model by EM");
  cf->add_option("--panel", fit.panel, "panel file")->required();
  cf->add_option("--out-prefix", fit.prefix, "writes PREFIX.model.json, PREFIX.responsibilities.tsv, PREFIX.trace.tsv")->required();
  cf->add_option("--init-model", fit.init_model, "model JSON used by provided-model initialization");
  cf->add_option("--truth", fit.truth, "labels file (cluster column) to report the adjusted Rand index against");
  fit.s.add(cf, false);

  SweepArgs sw;
  auto* csw = app.add_subcommand("sweep", "BIC over a (G, H) grid");
  csw->add_option("--panel", sw.panel, "panel file")->required();
  csw->add_option("--out", sw.out, "output table")->required();
  sw.s.add(csw, true);

  BootstrapArgs bs;
  auto* cb = app.add_subcommand("bootstrap", "parametric bootstrap bands for the curves");
  cb->add_option("--model", bs.model, "fitted model JSON")->required();
  cb->add_option("--panel", bs.panel, "panel the model was fitted on (sets J, n and phase)");
  cb->add_option("--edges", bs.edges, "edges per replicate");
  cb->add_option("--length", bs.length, "snapshots per replicate");
  cb->add_option("--rho-threshold", bs.rho_threshold, "report rho bands for clusters with max p above this");
  cb->add_option("--out", bs.out, "output bands table")->required();
  cb->add_option("--params-out", bs.params_out, "output table of replicate parameters");
  bs.s.add(cb, false);
  bs.s.add_replicates(cb);

  DiagnoseArgs dg;
  auto* cd = app.add_subcommand("diagnose", "run-length tests and cross-correlation histograms");
  cd->add_option("--panel", dg.panel, "panel file")->required();
  cd->add_option("--out-prefix", dg.prefix, "writes PREFIX.runs.tsv, PREFIX.qq.tsv [, PREFIX.crosscorr.tsv]")->required();
  cd->add_option("--n-mc", dg.n_mc, "Monte Carlo replicates per KS test");
  cd->add_option("--min-runs", dg.min_runs, "minimum interior runs to test a state of an edge");
  cd->add_option("--model", dg.model, "fitted model, enables cross-correlations");
  cd->add_option("--responsibilities", dg.responsibilities, "responsibilities file from fit (label column)");
  cd->add_option("--series-per-cluster", dg.m, "simulated series per cluster for the null");
  cd->add_option("--lag", dg.lag, "correlation lag");
  cd->add_option("--bins", dg.bins, "histogram bins on [-1, 1]");
  cd->add_option("--max-pairs", dg.max_pairs, "pairs per group above which pairs are subsampled");
  cd->add_option("--seed", dg.seed, "seed");
  cd->add_option("--threads", dg.threads, "worker threads (0 = all cores)");

  CurvesArgs cv;
  auto* cc = app.add_subcommand("curves", "time-of-day marginal probability and lag-1 correlation");
  cc->add_option("--model", cv.model, "model JSON")->required();
  cc->add_option("--out", cv.out, "output table")->required();

  StationaryArgs st;
  auto* cst = app.add_subcommand("stationary", "ALARM(1) stationary law over a (b, c) grid");
  cst->add_option("--b", st.b, "lag coefficients")->delimiter(',')->required();
  cst->add_option("--c", st.c, "intercepts")->delimiter(',')->required();
  cst->add_option("--out", st.out, "output table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ci) return run_ingest(ingest);
    if (*cs) return run_simulate(simulate);
    if (*cf) return run_fit(fit);
    if (*csw) return run_sweep(sw);
    if (*cb) return run_bootstrap(bs);
    if (*cd) return run_diagnose(dg);
    if (*cc) return run_curves(cv);
    if (*cst) return run_stationary(st);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
