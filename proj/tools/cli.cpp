#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

#include <CLI11.hpp>

namespace gigsim::cli {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const char* kCommands[] = {"sample", "path", "bounds", "verify", "rho"};

const char* command_description(const std::string& name) {
  if (name == "sample") return "W(T) samples with acceptance statistics";
  if (name == "path") return "sample paths on a time grid";
  if (name == "bounds") return "Levy density bounds and quadrature reference on an x grid";
  if (name == "verify") return "two-sample KS of engine W(1) against the exact law";
  return "acceptance-rate bounds on an x grid";
}

}  // namespace

std::vector<double> GridSpec::values() const {
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    v[i] = log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
  }
  if (points > 1) {
    v.front() = min;
    v.back() = max;
  }
  return v;
}

std::string GridSpec::to_string() const {
  return fmt(min) + ":" + fmt(max) + ":" + std::to_string(points) + (log ? ":log" : "");
}

GridSpec GridSpec::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) throw ValidationError("--grid expects min:max:points[:log], got " + text);
  GridSpec g;
  try {
    std::size_t used = 0;
    g.min = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    g.max = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    const long long pts = std::stoll(parts[2], &used);
    if (used != parts[2].size() || pts < 1) throw std::invalid_argument(parts[2]);
    g.points = static_cast<std::size_t>(pts);
  } catch (const std::exception&) {
    throw ValidationError("--grid: cannot parse " + text);
  }
  if (parts.size() == 4) {
    if (parts[3] != "log" && parts[3] != "lin") throw ValidationError("--grid: fourth field must be log or lin");
    g.log = parts[3] == "log";
  }
  if (!std::isfinite(g.min) || !std::isfinite(g.max) || g.max < g.min) {
    throw ValidationError("--grid: need finite min <= max");
  }
  if (g.log && !(g.min > 0.0)) throw ValidationError("--grid: log grids need min > 0");
  return g;
}

GigOptions RunConfig::gig_options() const {
  GigOptions o;
  o.epochs = epochs;
  o.n2_epochs = n2_epochs;
  if (n1_method == "ts") o.n1_method = N1Method::TsEnvelope;
  if (n1_method == "two-gamma") o.n1_method = N1Method::TwoGammaEnvelope;
  o.n2_method = n2_method == "alpha1" ? N2Method::StableAlpha1 : N2Method::HalfStable;
  if (z0 != "auto") o.z0 = std::stod(z0);
  return o;
}

std::size_t RunConfig::count() const {
  if (n) return *n;
  if (command == "path") return 30;
  if (command == "verify") return 100000;
  return 10000;
}

GridSpec RunConfig::grid_spec() const {
  if (grid) return GridSpec::parse(*grid);
  if (command == "path") return {0.0, horizon, 101, false};
  if (command == "rho") return {1e-4, 1e4, 30, true};
  return {1e-4, 1e4, 30, true};
}

void RunConfig::validate() const {
  bool known = false;
  for (const char* c : kCommands) known = known || command == c;
  if (!known) throw ValidationError("unknown command '" + command + "'");
  if (process != "gig" && process != "gh") throw ValidationError("--process must be gig or gh");
  if (format != "csv" && format != "json") throw ValidationError("--format must be csv or json");
  if (n1_method != "auto" && n1_method != "ts" && n1_method != "two-gamma") {
    throw ValidationError("--n1-method must be auto, ts or two-gamma");
  }
  if (n2_method != "half-stable" && n2_method != "alpha1") throw ValidationError("--n2-method must be half-stable or alpha1");
  if (z0 != "auto") {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(z0, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != z0.size() || !(v > 0.0) || !std::isfinite(v)) throw ValidationError("--z0 must be auto or a positive number");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("--horizon must be positive");
  if (epochs == 0) throw ValidationError("--epochs must be positive");
  if (n && *n == 0) throw ValidationError("--n must be positive");
  if (!(max_d > 0.0 && max_d <= 1.0)) throw ValidationError("--max-d must lie in (0, 1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("--alpha must lie in (0, 1)");
  if (bins == 0) throw ValidationError("--bins must be positive");
  if (command == "verify" && setting == "custom") gigsim::validate(gig_params());
  if (command != "verify") {
    if (process == "gh") {
      gigsim::validate(gh_params());
    } else {
      gigsim::validate(gig_params());
    }
  }
  if (grid) {
    const GridSpec g = GridSpec::parse(*grid);
    if (command == "path" && (g.min < 0.0 || g.max > horizon)) throw ValidationError("--grid must lie inside [0, horizon]");
    if ((command == "bounds" || command == "rho") && !(g.min > 0.0)) throw ValidationError("--grid needs x > 0");
  }
  if (command == "verify" && setting != "all" && setting != "custom") {
    bool found = false;
    for (const auto& s : reference_settings()) found = found || setting == s.name;
    if (!found) throw ValidationError("--setting: unknown setting '" + setting + "'");
  }
}

json to_json(const RunConfig& c) {
  json j = {
      {"command", c.command},   {"process", c.process},     {"lambda", c.lambda},       {"gamma", c.gamma},
      {"delta", c.delta},       {"mu_w", c.mu_w},           {"sigma_w", c.sigma_w},     {"horizon", c.horizon},
      {"epochs", c.epochs},     {"n2_epochs", c.n2_epochs}, {"seed", c.seed},           {"z0", c.z0},
      {"n1_method", c.n1_method}, {"n2_method", c.n2_method}, {"format", c.format},     {"out", c.out},
      {"setting", c.setting},   {"max_d", c.max_d},         {"alpha", c.alpha},
      {"oracle_lambda_offset", c.oracle_lambda_offset},     {"qq_prefix", c.qq_prefix}, {"bins", c.bins},
  };
  j["n"] = c.n ? json(*c.n) : json(nullptr);
  j["grid"] = c.grid ? json(*c.grid) : json(nullptr);
  return j;
}

RunConfig config_from_json(const json& j) {
  const json& c = j.contains("config") ? j.at("config") : j;
  if (!c.is_object()) throw ValidationError("config JSON must be an object");
  RunConfig r;
  auto get = [&](const char* key, auto& field) {
    if (c.contains(key) && !c.at(key).is_null()) c.at(key).get_to(field);
  };
  get("command", r.command);
  get("process", r.process);
  get("lambda", r.lambda);
  get("gamma", r.gamma);
  get("delta", r.delta);
  get("mu_w", r.mu_w);
  get("sigma_w", r.sigma_w);
  get("horizon", r.horizon);
  get("epochs", r.epochs);
  get("n2_epochs", r.n2_epochs);
  get("seed", r.seed);
  get("z0", r.z0);
  get("n1_method", r.n1_method);
  get("n2_method", r.n2_method);
  get("format", r.format);
  get("out", r.out);
  get("setting", r.setting);
  get("max_d", r.max_d);
  get("alpha", r.alpha);
  get("oracle_lambda_offset", r.oracle_lambda_offset);
  get("qq_prefix", r.qq_prefix);
  get("bins", r.bins);
  if (c.contains("n") && !c.at("n").is_null()) r.n = c.at("n").get<std::size_t>();
  if (c.contains("grid") && !c.at("grid").is_null()) r.grid = c.at("grid").get<std::string>();
  return r;
}

namespace {

json stats_json(const RunStats& stats) {
  json j = json::object();
  for (std::size_t i = 0; i < kSourceCount; ++i) {
    const SourceStats& s = stats.sources[i];
    if (s.proposed == 0 && s.dropped == 0) continue;
    j[source_name(static_cast<Source>(i))] = {
        {"proposed", s.proposed},
        {"thinned", s.thinned},
        {"accepted", s.accepted},
        {"dropped_below_floor", s.dropped},
        {"thin_rate", s.proposed ? static_cast<double>(s.thinned) / s.proposed : 0.0},
        {"accept_rate", s.thinned ? static_cast<double>(s.accepted) / s.thinned : 0.0},
        {"overall_rate", s.accept_rate()},
        {"max_probability", s.max_probability},
        {"truncation_level", s.truncation_level},
        {"residual_mean_bound", s.residual_mean},
    };
  }
  return j;
}

json process_json(const RunConfig& c) {
  const GigParams p = c.gig_params();
  json j = {{"regime", regime_name(regime_of(p))}};
  if (regime_of(p) == Regime::Low) {
    const GigOptions o = c.gig_options();
    const CornerPoint corner = resolve_corner(p, o);
    j["z0"] = corner.z0;
    j["h0"] = corner.h0;
    j["n1_method"] = resolve_n1_method(p, o.n1_method) == N1Method::TsEnvelope ? "ts" : "two-gamma";
    j["n2_method"] = c.n2_method;
  }
  return j;
}

// Destination for data: the --out file, or the provided stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
    os_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& os() { return *os_; }
  void close() {
    if (file_.is_open()) {
      file_.close();
      if (!file_) throw std::runtime_error("write to " + path_ + " failed");
    }
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* os_;
};

void write_meta(const RunConfig& c, const json& meta) {
  if (c.out.empty()) return;
  std::ofstream f(c.out + ".meta.json", std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + c.out + ".meta.json");
  f << meta.dump(2) << '\n';
}

int cmd_sample(const RunConfig& c, unsigned threads, std::ostream& out) {
  const std::size_t n = c.count();
  const GigOptions opt = c.gig_options();
  std::vector<double> values(n);
  std::vector<RunStats> per_worker(std::max(1u, threads));
  parallel_for(n, threads, [&](unsigned w, std::size_t i) {
    const std::uint64_t key = derive_stream_key(c.seed, i);
    if (c.process == "gh") {
      values[i] = sample_gh(c.gh_params(), c.horizon, opt, key, &per_worker[w]).total();
    } else {
      values[i] = sample_gig(c.gig_params(), c.horizon, opt, key, &per_worker[w]).total();
    }
  });
  RunStats stats;
  for (const auto& s : per_worker) stats.merge(s);

  json meta = {{"config", to_json(c)}, {"seed", c.seed}, {"process", process_json(c)}, {"acceptance", stats_json(stats)}};
  Sink sink(c.out, out);
  if (c.format == "json") {
    json doc = meta;
    doc["samples"] = values;
    sink.os() << doc.dump() << '\n';
  } else {
    sink.os() << "sample_id,W\n";
    for (std::size_t i = 0; i < n; ++i) sink.os() << i << ',' << fmt(values[i]) << '\n';
    write_meta(c, meta);
  }
  sink.close();
  return kOk;
}

int cmd_path(const RunConfig& c, unsigned threads, std::ostream& out) {
  const std::size_t n = c.count();
  const std::vector<double> grid = c.grid_spec().values();
  const GigOptions opt = c.gig_options();
  std::vector<ProcessPath> paths(n);
  std::vector<RunStats> per_worker(std::max(1u, threads));
  parallel_for(n, threads, [&](unsigned w, std::size_t i) {
    const std::uint64_t key = derive_stream_key(c.seed, i);
    const JumpSeries s = c.process == "gh" ? sample_gh(c.gh_params(), c.horizon, opt, key, &per_worker[w])
                                           : sample_gig(c.gig_params(), c.horizon, opt, key, &per_worker[w]);
    paths[i] = evaluate_path(s, grid);
  });
  RunStats stats;
  for (const auto& s : per_worker) stats.merge(s);
  json meta = {{"config", to_json(c)}, {"seed", c.seed}, {"process", process_json(c)}, {"acceptance", stats_json(stats)}};
  Sink sink(c.out, out);
  if (c.format == "json") {
    json doc = meta;
    doc["t"] = grid;
    doc["paths"] = json::array();
    for (const auto& p : paths) doc["paths"].push_back(p.values);
    sink.os() << doc.dump() << '\n';
  } else {
    sink.os() << "path_id,t,W\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        sink.os() << i << ',' << fmt(grid[k]) << ',' << fmt(paths[i].values[k]) << '\n';
      }
    }
    write_meta(c, meta);
  }
  sink.close();
  return kOk;
}

int cmd_bounds(const RunConfig& c, unsigned threads, std::ostream& out, std::ostream& err) {
  const GigParams p = c.gig_params();
  if (!(p.delta > 0.0)) throw ValidationError("bounds: requires delta > 0");
  const std::vector<double> xs = c.grid_spec().values();
  std::vector<BoundTable> rows(xs.size());
  parallel_for(xs.size(), threads, [&](unsigned, std::size_t i) { rows[i] = build_bound_table(p, {xs[i]}); });
  int boundary = 0;
  int multimodal = 0;
  for (const auto& r : rows) {
    boundary += r.boundary_hits;
    multimodal += r.multimodal_scans;
  }
  if (boundary > 0) err << "bounds: z0 optimum at the search boundary for " << boundary << " grid points\n";
  if (multimodal > 0) err << "bounds: coarse z0 scan found several local optima at " << multimodal << " grid points\n";
  Sink sink(c.out, out);
  if (c.format == "json") {
    json doc = {{"config", to_json(c)}, {"boundary_hits", boundary}, {"multimodal_scans", multimodal}};
    for (const char* k : {"x", "qa", "qb_star", "simple", "q_ref", "z0_star"}) doc[k] = json::array();
    for (const auto& r : rows) {
      doc["x"].push_back(r.xs[0]);
      doc["qa"].push_back(r.qa[0]);
      doc["qb_star"].push_back(r.qb_star[0]);
      doc["simple"].push_back(r.simple[0]);
      doc["q_ref"].push_back(r.q_ref[0]);
      doc["z0_star"].push_back(std::isnan(r.z0_star[0]) ? json(nullptr) : json(r.z0_star[0]));
    }
    sink.os() << doc.dump() << '\n';
  } else {
    sink.os() << "x,qa,qb_star,simple,q_ref,z0_star\n";
    for (const auto& r : rows) {
      sink.os() << fmt(r.xs[0]) << ',' << fmt(r.qa[0]) << ',' << fmt(r.qb_star[0]) << ',' << fmt(r.simple[0]) << ','
                << fmt(r.q_ref[0]) << ',' << fmt(r.z0_star[0]) << '\n';
    }
  }
  sink.close();
  return kOk;
}

int cmd_rho(const RunConfig& c, std::ostream& out) {
  const GigParams p = c.gig_params();
  if (!(p.delta > 0.0)) throw ValidationError("rho: requires delta > 0");
  const std::vector<double> xs = c.grid_spec().values();
  Sink sink(c.out, out);
  const double nu = p.nu();
  if (nu < 0.5) {
    const CornerPoint corner = resolve_corner(p, c.gig_options());
    const RhoLowBounds b = rho_bounds_low(p, corner);
    if (c.format == "json") {
      sink.os() << json({{"config", to_json(c)}, {"z0", corner.z0}, {"rho1_lower", b.rho1}, {"rho2_lower", b.rho2}}).dump()
                << '\n';
    } else {
      sink.os() << "x,rho1_lower,rho2_lower\n";
      for (double x : xs) sink.os() << fmt(x) << ',' << fmt(b.rho1) << ',' << fmt(b.rho2) << '\n';
    }
  } else {
    std::vector<RhoBounds> rows;
    for (double x : xs) rows.push_back(nu == 0.5 ? RhoBounds{1.0, 1.0, 0.0} : rho_bounds_high(p, x));
    if (c.format == "json") {
      json doc = {{"config", to_json(c)}, {"x", xs}, {"lower", json::array()}, {"upper", json::array()},
                  {"z0_star", json::array()}};
      for (const auto& r : rows) {
        doc["lower"].push_back(r.lower);
        doc["upper"].push_back(r.upper);
        doc["z0_star"].push_back(r.z0_star);
      }
      sink.os() << doc.dump() << '\n';
    } else {
      sink.os() << "x,lower,upper,z0_star\n";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sink.os() << fmt(xs[i]) << ',' << fmt(rows[i].lower) << ',' << fmt(rows[i].upper) << ',' << fmt(rows[i].z0_star)
                  << '\n';
      }
    }
  }
  sink.close();
  return kOk;
}

int cmd_verify(const RunConfig& c, unsigned threads, std::ostream& out) {
  std::vector<ReferenceSetting> chosen;
  if (c.setting == "all") {
    chosen = reference_settings();
  } else if (c.setting == "custom") {
    chosen.push_back({"custom", c.gig_params()});
  } else {
    for (const auto& s : reference_settings()) {
      if (c.setting == s.name) chosen.push_back(s);
    }
  }
  const std::size_t n = c.count();
  const GigOptions opt = c.gig_options();
  bool all_pass = true;
  json report = {{"config", to_json(c)}, {"results", json::array()}};
  std::ostringstream csv;
  csv << "setting,lambda,gamma,delta,n,D,threshold,alpha_threshold,pass\n";
  for (const auto& s : chosen) {
    GigParams oracle = s.params;
    oracle.lambda += c.oracle_lambda_offset;
    gigsim::validate(oracle);
    const VerifyOutcome v = verify_setting(s.params, n, c.seed, opt, threads, c.max_d, &oracle, c.alpha);
    all_pass = all_pass && v.ks.pass;
    report["results"].push_back({{"setting", s.name},
                                 {"lambda", s.params.lambda},
                                 {"gamma", s.params.gamma},
                                 {"delta", s.params.delta},
                                 {"n", v.ks.n},
                                 {"D", v.ks.d_stat},
                                 {"threshold", v.ks.threshold},
                                 {"alpha_threshold", v.alpha_threshold},
                                 {"pass", v.ks.pass},
                                 {"acceptance", stats_json(v.stats)}});
    csv << s.name << ',' << fmt(s.params.lambda) << ',' << fmt(s.params.gamma) << ',' << fmt(s.params.delta) << ','
        << v.ks.n << ',' << fmt(v.ks.d_stat) << ',' << fmt(v.ks.threshold) << ',' << fmt(v.alpha_threshold) << ','
        << (v.ks.pass ? "true" : "false") << '\n';
    if (!c.qq_prefix.empty()) {
      const std::vector<double> engine = engine_terminal_values(s.params, n, c.seed, opt, threads);
      const std::vector<double> ora = oracle_values(oracle, n, c.seed);
      emit_qq_histogram(engine, ora, c.bins, c.qq_prefix + "_" + s.name);
    }
  }
  report["pass"] = all_pass;
  Sink sink(c.out, out);
  if (c.format == "json") {
    sink.os() << report.dump(2) << '\n';
  } else {
    sink.os() << csv.str();
  }
  sink.close();
  return all_pass ? kOk : kStatistical;
}

std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  unsigned threads = 1;
  try {
    if (const auto path = find_config_path(args)) {
      std::ifstream f(*path);
      if (!f) throw ValidationError("cannot read config " + *path);
      cfg = config_from_json(json::parse(f));
    }
  } catch (const json::exception& e) {
    err << "error: invalid config JSON: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }

  CLI::App app{"Simulation of GIG and GH Levy processes by shot-noise thinning"};
  app.require_subcommand(1);
  std::string config_path;
  std::string grid_text;
  std::size_t n_value = 0;
  for (const char* name : kCommands) {
    CLI::App* sub = app.add_subcommand(name, command_description(name));
    sub->add_option("--config", config_path, "JSON config (a previous run's metadata is accepted)");
    sub->add_option("--lambda", cfg.lambda, "GIG lambda");
    sub->add_option("--gamma", cfg.gamma, "GIG gamma");
    sub->add_option("--delta", cfg.delta, "GIG delta");
    sub->add_option("--mu-w", cfg.mu_w, "GH mixing drift");
    sub->add_option("--sigma-w", cfg.sigma_w, "GH mixing scale");
    sub->add_option("--process", cfg.process, "gig or gh");
    sub->add_option("--horizon", cfg.horizon, "time horizon T");
    sub->add_option("--epochs", cfg.epochs, "epochs per point process");
    sub->add_option("--n2-epochs", cfg.n2_epochs, "epochs for N2 (0: same as --epochs)");
    sub->add_option("--n", n_value, "number of samples or paths");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--z0", cfg.z0, "corner point: auto or a value");
    sub->add_option("--n1-method", cfg.n1_method, "auto, ts or two-gamma");
    sub->add_option("--n2-method", cfg.n2_method, "half-stable or alpha1");
    sub->add_option("--grid", grid_text, "min:max:points[:log]");
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--format", cfg.format, "csv or json");
    sub->add_option("--threads", threads, "worker threads (0: hardware concurrency)");
    sub->add_option("--setting", cfg.setting, "verify: all, custom or a setting name");
    sub->add_option("--max-d", cfg.max_d, "verify: pass if KS D is below this");
    sub->add_option("--alpha", cfg.alpha, "verify: KS significance for the reported critical value");
    sub->add_option("--oracle-lambda-offset", cfg.oracle_lambda_offset, "verify: shift the oracle lambda");
    sub->add_option("--qq-prefix", cfg.qq_prefix, "verify: write <prefix>_<setting>_{qq,hist}.csv");
    sub->add_option("--bins", cfg.bins, "verify: histogram bins");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return e.get_exit_code() == 0 ? kOk : kValidation;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    cfg.command = sub->get_name();
    if (sub->count("--n")) cfg.n = n_value;
    if (sub->count("--grid")) cfg.grid = grid_text;
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  try {
    cfg.validate();
    if (cfg.command == "sample") return cmd_sample(cfg, threads, out);
    if (cfg.command == "path") return cmd_path(cfg, threads, out);
    if (cfg.command == "bounds") return cmd_bounds(cfg, threads, out, err);
    if (cfg.command == "rho") return cmd_rho(cfg, out);
    return cmd_verify(cfg, threads, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace gigsim::cli
