#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "movenet/baseline.hpp"
#include "movenet/diagnostics.hpp"
#include "movenet/imputation.hpp"
#include "movenet/io.hpp"
#include "movenet/mcmc.hpp"
#include "movenet/movement.hpp"
#include "movenet/summaries.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace movenet;

namespace {

constexpr const char* kVersion = "movenet 0.1.0";

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

/// Flat json config with typed accessors. Every key that is read gets
/// marked; finish() rejects keys that were never consulted, so typos in a
/// config file fail loudly instead of silently falling back to defaults.
class Config {
 public:
  Config(json j, std::string path) : j_(std::move(j)), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_ + ": config must be a json object");
  }

  bool has(const std::string& k) {
    used_.insert(k);
    return j_.contains(k);
  }

  double num(const std::string& k, double dflt) {
    return has(k) ? checked_number(k) : dflt;
  }

  int integer(const std::string& k, int dflt) {
    if (!has(k)) return dflt;
    const double v = checked_number(k);
    if (v != static_cast<double>(static_cast<long long>(v)))
      fail(path_ + ": key '" + k + "' must be an integer");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& k, bool dflt) {
    if (!has(k)) return dflt;
    if (!j_.at(k).is_boolean()) fail(path_ + ": key '" + k + "' must be true or false");
    return j_.at(k).get<bool>();
  }

  std::string str(const std::string& k, const std::string& dflt) {
    if (!has(k)) return dflt;
    return checked_string(k);
  }

  std::string str_req(const std::string& k) {
    if (!has(k)) fail(path_ + ": missing required key '" + k + "'");
    return checked_string(k);
  }

  std::uint64_t seed() {
    if (!has("seed")) fail(path_ + ": missing required key 'seed' (or pass --seed)");
    return seed_opt(0);
  }

  std::uint64_t seed_opt(std::uint64_t dflt) {
    if (!has("seed")) return dflt;
    const json& v = j_.at("seed");
    if (!v.is_number_integer() && !v.is_number_unsigned())
      fail(path_ + ": 'seed' must be a nonnegative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
      fail(path_ + ": 'seed' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  /// All keys present in the file must have been consulted by the command.
  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key()))
        fail(path_ + ": unknown config key '" + item.key() + "'");
  }

  const json& raw() const { return j_; }

 private:
  double checked_number(const std::string& k) {
    if (!j_.at(k).is_number()) fail(path_ + ": key '" + k + "' must be a number");
    return j_.at(k).get<double>();
  }
  std::string checked_string(const std::string& k) {
    if (!j_.at(k).is_string()) fail(path_ + ": key '" + k + "' must be a string");
    return j_.at(k).get<std::string>();
  }

  json j_;
  std::string path_;
  std::set<std::string> used_;
};

fs::path ensure_out(Config& cfg) {
  const std::string od = cfg.str("out_dir", "out");
  fs::create_directories(od);
  return fs::path(od);
}

// "A=1.5,B=4" -> {A: 1.5, B: 4}
std::map<std::string, double> parse_class_map(const std::string& spec) {
  std::map<std::string, double> out;
  if (spec.empty()) return out;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string item = spec.substr(pos, comma == std::string::npos ? std::string::npos
                                                                         : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      fail("bad error_class_map entry '" + item + "' (want NAME=VALUE)");
    double v;
    if (!detail::parse_full_double(item.substr(eq + 1), v) || !(v > 0.0))
      fail("error class '" + item.substr(0, eq) + "' needs a positive value");
    out[item.substr(0, eq)] = v;
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// "5,10,15" or "0.25:0.25:25" -> strictly ascending positive radii
std::vector<double> parse_radii(const std::string& spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    double lo, step, hi;
    char colon1, colon2;
    std::istringstream in(spec);
    if (!(in >> lo >> colon1 >> step >> colon2 >> hi) || colon1 != ':' || colon2 != ':')
      fail("bad radius range '" + spec + "' (want LO:STEP:HI)");
    if (!(lo > 0.0) || !(step > 0.0) || !(hi >= lo))
      fail("bad radius range '" + spec + "'");
    for (int k = 0;; ++k) {
      const double r = lo + k * step;
      if (r > hi + 1e-9 * step) break;
      out.push_back(r);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      const std::string item =
          spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      double v;
      if (!detail::parse_full_double(detail::trim(item), v))
        fail("bad radius '" + item + "'");
      out.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (out.empty()) fail("empty radius list");
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!(out[k] > 0.0)) fail("radii must be positive");
    if (k > 0 && !(out[k] > out[k - 1])) fail("radii must be strictly ascending");
  }
  return out;
}

// "x,y;x,y;..." -> n x 2 matrix
Eigen::MatrixX2d parse_positions(const std::string& spec, int n) {
  std::vector<std::pair<double, double>> pts;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto semi = spec.find(';', pos);
    const std::string item =
        spec.substr(pos, semi == std::string::npos ? std::string::npos : semi - pos);
    const auto comma = item.find(',');
    double x, y;
    if (comma == std::string::npos ||
        !detail::parse_full_double(detail::trim(item.substr(0, comma)), x) ||
        !detail::parse_full_double(detail::trim(item.substr(comma + 1)), y))
      fail("bad init position '" + item + "' (want X,Y)");
    pts.emplace_back(x, y);
    if (semi == std::string::npos) break;
    pos = semi + 1;
  }
  if (static_cast<int>(pts.size()) != n)
    fail("init_positions holds " + std::to_string(pts.size()) + " points, expected " +
         std::to_string(n));
  Eigen::MatrixX2d m(n, 2);
  for (int i = 0; i < n; ++i) {
    m(i, 0) = pts[i].first;
    m(i, 1) = pts[i].second;
  }
  return m;
}

std::string hash_hex(const json& effective) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(effective.dump())));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, std::uint64_t seed,
                    const json& effective_cfg, const json& extras) {
  json m;
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["units"] = {{"space", "km"}, {"time", "hours"}};
  m["config"] = effective_cfg;
  m["config_hash"] = hash_hex(effective_cfg);
  for (const auto& item : extras.items()) m[item.key()] = item.value();
  std::ofstream out(dir / "manifest.json");
  if (!out) fail("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << "\n";
}

json ess_report(const PosteriorSamples& post) {
  json ess;
  for (const auto& name : PosteriorSamples::scalar_names()) {
    const auto& chain = post.chain(name);
    if (chain.size() >= 10)
      ess[name] = effective_sample_size(chain);
    else
      ess[name] = nullptr;
  }
  return ess;
}

// ---- simulate -------------------------------------------------------------

void cmd_simulate(Config& cfg) {
  const std::uint64_t seed = cfg.seed();
  const fs::path out = ensure_out(cfg);
  const int n = cfg.integer("n", 6);
  const int T = cfg.integer("T", 100);
  if (n < 2) fail("simulate needs n >= 2");
  if (T < 2) fail("simulate needs T >= 2");
  const double time_step = cfg.num("time_step", 1.0);
  if (!(time_step > 0.0)) fail("time_step must be > 0");
  ModelParams p;
  p.alpha = cfg.num("alpha", 0.9);
  p.beta = cfg.num("beta", 0.5);
  p.p1 = cfg.num("p1", 0.2);
  p.phi = cfg.num("phi", 0.95);
  p.c = cfg.num("c", 0.33);
  p.sigma2 = cfg.num("sigma2", 1.0);
  p.validate();
  const auto conv = cfg.boolean("ego_mean_uses_current", false)
                        ? EgoMeanConvention::current_slice
                        : EgoMeanConvention::previous_slice;
  const double obs_rate = cfg.num("obs_rate", 1.0);
  const double obs_sd = cfg.num("obs_error_sd", 0.25);
  if (!(obs_rate > 0.0)) fail("obs_rate must be > 0");
  if (!(obs_sd > 0.0)) fail("obs_error_sd must be > 0");
  const double init_spread = cfg.num("init_spread", 5.0);
  const bool have_init = cfg.has("init_positions");
  const std::string init_spec = have_init ? cfg.str_req("init_positions") : "";
  const bool have_net = cfg.has("network_input");
  const std::string net_path = have_net ? cfg.str_req("network_input") : "";
  cfg.finish();

  Rng root(seed);
  Rng path_rng = root.spawn(0);
  Rng obs_rng = root.spawn(1);

  std::vector<std::string> ids;
  std::optional<DynamicNetwork> W_given;
  if (have_net) {
    const NetworkTable tab = read_network_table(net_path);
    if (tab.n() != n || tab.T() != T)
      fail("network_input is " + std::to_string(tab.n()) + " x " + std::to_string(tab.T()) +
           ", expected " + std::to_string(n) + " x " + std::to_string(T));
    DynamicNetwork W(n, T);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double w = tab.mean[t](i, j);
          if (w != 0.0 && w != 1.0) fail("network_input must hold 0/1 edges");
          W.set_edge(i, j, t, w == 1.0);
        }
    W_given = std::move(W);
    ids = tab.ids;
  } else {
    for (int i = 0; i < n; ++i) ids.push_back("a" + std::to_string(i + 1));
  }

  Eigen::MatrixX2d init(n, 2);
  if (have_init) {
    init = parse_positions(init_spec, n);
  } else {
    for (int i = 0; i < n; ++i) {
      init(i, 0) = init_spread * path_rng.uniform();
      init(i, 1) = init_spread * path_rng.uniform();
    }
  }

  auto [grid, W] = simulate_paths(p, n, T, init, path_rng, W_given, conv, time_step, 0.0);
  grid.ids = ids;

  write_paths_csv((out / "paths.csv").string(), grid);
  std::vector<double> times;
  for (int t = 0; t < T; ++t) times.push_back(grid.time_at(t));
  write_truth_network_csv((out / "network_truth.csv").string(), W, ids, times);

  // Poisson observation times over the span; the endpoints are always kept so
  // every track covers the full grid.
  ObservationSet obs;
  const double span_hi = grid.time_at(T - 1);
  json n_obs;
  for (int i = 0; i < n; ++i) {
    Track tr;
    tr.id = ids[i];
    std::vector<double> ts = {0.0};
    double t = 0.0;
    while (true) {
      t += -std::log(obs_rng.uniform_pos()) / obs_rate;
      if (t >= span_hi) break;
      ts.push_back(t);
    }
    ts.push_back(span_hi);
    for (double tt : ts) {
      const double u = tt / time_step;
      const int k = std::min(static_cast<int>(u), T - 2);
      const double frac = u - k;
      const double px = (1.0 - frac) * grid.pos[k](i, 0) + frac * grid.pos[k + 1](i, 0);
      const double py = (1.0 - frac) * grid.pos[k](i, 1) + frac * grid.pos[k + 1](i, 1);
      tr.time.push_back(tt);
      tr.x.push_back(px + obs_sd * obs_rng.normal());
      tr.y.push_back(py + obs_sd * obs_rng.normal());
      tr.error_sd.push_back(obs_sd);
    }
    n_obs[tr.id] = tr.size();
    obs.tracks.push_back(std::move(tr));
  }
  write_telemetry_csv((out / "observations.csv").string(), obs);

  json extras;
  extras["n"] = n;
  extras["T"] = T;
  extras["truth"] = {{"alpha", p.alpha}, {"beta", p.beta}, {"p1", p.p1},
                     {"phi", p.phi},     {"c", p.c},       {"sigma2", p.sigma2}};
  extras["n_observations"] = n_obs;
  write_manifest(out, "simulate", seed, cfg.raw(), extras);
}

// ---- impute ---------------------------------------------------------------

json ctcrw_report(const ObservationSet& obs, const std::vector<CtcrwModel>& models) {
  json rep;
  for (std::size_t k = 0; k < models.size(); ++k)
    rep[obs.tracks[k].id] = {{"theta", models[k].params.theta},
                             {"sigma_v2", models[k].params.sigma_v2},
                             {"loglik", models[k].loglik},
                             {"low_information", models[k].low_information}};
  return rep;
}

GridSpec grid_spec_from(Config& cfg) {
  GridSpec spec;
  if (cfg.has("grid_start")) spec.start = cfg.num("grid_start", 0.0);
  if (cfg.has("grid_spacing")) spec.spacing = cfg.num("grid_spacing", 1.0);
  spec.target_T = cfg.integer("grid_T", 100);
  return spec;
}

json grid_report(const std::vector<double>& grid) {
  return {{"start", grid.front()},
          {"spacing", grid[1] - grid[0]},
          {"T", grid.size()}};
}

void cmd_impute(Config& cfg) {
  const std::uint64_t seed = cfg.seed();
  const fs::path out = ensure_out(cfg);
  const std::string telem = cfg.str_req("telemetry");
  TelemetryOptions topt;
  topt.error_class_map = parse_class_map(cfg.str("error_class_map", ""));
  const int K = cfg.integer("K", 50);
  const GridSpec spec = grid_spec_from(cfg);
  cfg.finish();

  const ObservationSet obs = read_telemetry_csv(telem, topt);
  const std::vector<double> grid = common_grid(obs, spec);
  const std::vector<CtcrwModel> models = fit_all_tracks(obs);
  const Rng root(seed);
  const ImputationBank bank = build_bank(obs, models, grid, K, root);
  write_bank_csv((out / "bank.csv").string(), bank);

  json extras;
  extras["K"] = K;
  extras["grid"] = grid_report(grid);
  extras["ctcrw"] = ctcrw_report(obs, models);
  write_manifest(out, "impute", seed, cfg.raw(), extras);
}

// ---- fit --------------------------------------------------------------------

void cmd_fit(Config& cfg) {
  const std::uint64_t seed = cfg.seed();
  const fs::path out = ensure_out(cfg);

  const bool has_telem = cfg.has("telemetry");
  const bool has_paths = cfg.has("paths");
  if (has_telem == has_paths)
    fail("fit: provide exactly one of 'telemetry' (noisy) or 'paths' (exact positions)");

  SamplerConfig scfg;
  scfg.n_iter = cfg.integer("n_iter", 20000);
  scfg.burn_in = cfg.integer("burn_in", 5000);
  scfg.thin = cfg.integer("thin", 5);
  scfg.seed = seed;
  scfg.scales.alpha = cfg.num("scale_alpha", 0.5);
  scfg.scales.beta = cfg.num("scale_beta", 0.1);
  scfg.scales.c = cfg.num("scale_c", 0.5);
  scfg.scales.network = cfg.num("scale_network", 0.3);
  scfg.adapt_window = cfg.integer("adapt_window", 50);
  scfg.target_accept = cfg.num("target_accept", 0.44);
  scfg.priors.beta_var = cfg.num("prior_beta_var", 1000.0);
  scfg.priors.phi_a = cfg.num("prior_phi_a", 17.2);
  scfg.priors.phi_b = cfg.num("prior_phi_b", 1.5);
  scfg.priors.c_shape = cfg.num("prior_c_shape", 1.5);
  scfg.priors.c_rate = cfg.num("prior_c_rate", 3.5);
  scfg.priors.sigma2_shape = cfg.num("prior_sigma2_shape", 0.1);
  scfg.priors.sigma2_rate = cfg.num("prior_sigma2_rate", 0.001);
  scfg.convention = cfg.boolean("ego_mean_uses_current", false)
                        ? EgoMeanConvention::current_slice
                        : EgoMeanConvention::previous_slice;
  scfg.exact_beta_update = cfg.boolean("exact_beta", false);
  scfg.random_scan_edges = cfg.boolean("random_scan", false);

  ImputationBank bank;
  json input_info;
  if (has_paths) {
    const std::string paths = cfg.str_req("paths");
    cfg.finish();
    bank.draws.push_back(read_paths_csv(paths));
    input_info = {{"mode", "paths"}, {"K", 1}};
  } else {
    const std::string telem = cfg.str_req("telemetry");
    TelemetryOptions topt;
    topt.error_class_map = parse_class_map(cfg.str("error_class_map", ""));
    const int K = cfg.integer("K", 50);
    const GridSpec spec = grid_spec_from(cfg);
    cfg.finish();
    const ObservationSet obs = read_telemetry_csv(telem, topt);
    const std::vector<double> grid = common_grid(obs, spec);
    const std::vector<CtcrwModel> models = fit_all_tracks(obs);
    bank = build_bank(obs, models, grid, K, Rng(seed).spawn(0x1a2b));
    input_info = {{"mode", "telemetry"},
                  {"K", K},
                  {"grid", grid_report(grid)},
                  {"ctcrw", ctcrw_report(obs, models)}};
  }

  const PosteriorSamples post = run_mcmc(bank, scfg);

  write_chains_csv((out / "chains.csv").string(), post);
  const auto& g0 = bank.draws.front();
  std::vector<double> times;
  for (int t = 0; t < g0.T(); ++t) times.push_back(g0.time_at(t));
  std::vector<std::string> ids = g0.ids;
  if (ids.empty())
    for (int i = 0; i < g0.n(); ++i) ids.push_back("a" + std::to_string(i + 1));
  write_edge_summary_csv((out / "network_posterior.csv").string(), post.w_mean, post.w_sd,
                         ids, times);

  json extras;
  extras["input"] = input_info;
  extras["acceptance"] = post.acceptance;
  extras["adapted_scale"] = post.adapted_scale;
  extras["ess"] = ess_report(post);
  extras["samples_recorded"] = post.alpha.size();
  write_manifest(out, "fit", seed, cfg.raw(), extras);
}

// ---- baseline ---------------------------------------------------------------

std::string radius_tag(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", r);
  std::string s(buf);
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '+') c = '_';
  }
  return s;
}

void cmd_baseline(Config& cfg) {
  const std::uint64_t seed = cfg.seed_opt(0);
  const fs::path out = ensure_out(cfg);
  const bool has_paths = cfg.has("paths");
  const bool has_bank = cfg.has("bank");
  if (has_paths == has_bank)
    fail("baseline: provide exactly one of 'paths' and 'bank'");
  const std::string in_path = has_paths ? cfg.str_req("paths") : cfg.str_req("bank");

  const bool match = cfg.boolean("match_density", false);
  std::vector<double> radii;
  if (cfg.has("radii")) radii = parse_radii(cfg.str_req("radii"));
  std::vector<double> radius_grid;
  double target = 0.0;
  if (match) {
    radius_grid = parse_radii(cfg.str_req("radius_grid"));
    target = cfg.num("density_target", 0.2);
  }
  if (radii.empty() && !match)
    fail("baseline: give 'radii' or set match_density with a 'radius_grid'");
  cfg.finish();

  ImputationBank bank;
  if (has_paths)
    bank.draws.push_back(read_paths_csv(in_path));
  else
    bank = read_bank_csv(in_path);
  const auto& g0 = bank.draws.front();
  std::vector<double> times;
  for (int t = 0; t < g0.T(); ++t) times.push_back(g0.time_at(t));

  json extras;
  extras["input_mode"] = has_paths ? "paths" : "bank";
  extras["K"] = bank.K();

  json density_list = json::array();
  for (double r : radii) {
    const EdgeSummary s = proximity_summary(bank, r);
    write_edge_summary_csv((out / ("network_R" + radius_tag(r) + ".csv")).string(),
                           s.mean, s.sd, g0.ids, times);
    density_list.push_back({{"radius", r}, {"density", proximity_density(bank, r)}});
  }
  extras["radii"] = radii;
  extras["densities"] = density_list;

  if (match) {
    const double rstar = density_matched_radius(bank, radius_grid, target);
    const EdgeSummary s = proximity_summary(bank, rstar);
    write_edge_summary_csv((out / "network_matched.csv").string(), s.mean, s.sd, g0.ids,
                           times);
    extras["density_target"] = target;
    extras["matched_radius"] = rstar;
    extras["matched_density"] = proximity_density(bank, rstar);
  }
  write_manifest(out, "baseline", seed, cfg.raw(), extras);
}

// ---- summarize ----------------------------------------------------------------

void cmd_summarize(Config& cfg) {
  const std::uint64_t seed = cfg.seed_opt(0);
  const fs::path out = ensure_out(cfg);
  const std::string chains_path = cfg.str_req("chains");
  const bool has_net = cfg.has("network");
  const std::string net_path = has_net ? cfg.str_req("network") : "";
  const double level = cfg.num("level", 0.95);
  const double threshold = cfg.num("threshold", 0.5);
  cfg.finish();

  const auto chains = read_chains_csv(chains_path);
  if (chains.empty()) fail(chains_path + ": no samples found");
  json params;
  {
    std::ofstream pout(out / "params_summary.csv");
    if (!pout) fail("cannot write params_summary.csv");
    pout << "param,mean,median,lower,upper,ess\n";
    for (const auto& [name, chain] : chains) {
      if (name == "imputation_index") continue;
      const IntervalSummary s = credible_interval(chain, level);
      const double ess =
          chain.size() >= 10 ? effective_sample_size(chain) : std::nan("");
      pout << name << ',' << fmt_double(s.mean) << ',' << fmt_double(s.median) << ','
           << fmt_double(s.lower) << ',' << fmt_double(s.upper) << ','
           << fmt_double(ess) << '\n';
      params[name] = {{"mean", s.mean},
                      {"median", s.median},
                      {"lower", s.lower},
                      {"upper", s.upper},
                      {"ess", std::isnan(ess) ? json(nullptr) : json(ess)}};
    }
  }

  json summary;
  summary["level"] = level;
  summary["params"] = params;

  if (has_net) {
    const NetworkTable tab = read_network_table(net_path);
    const int n = tab.n(), T = tab.T();
    std::ofstream sout(out / "network_stats.csv");
    if (!sout) fail("cannot write network_stats.csv");
    sout << "t,density,transitivity\n";
    std::ofstream dout(out / "degrees.csv");
    if (!dout) fail("cannot write degrees.csv");
    dout << "id,t,degree\n";
    double density_sum = 0.0;
    for (int t = 0; t < T; ++t) {
      const NetworkStats st = network_statistics(tab.mean[t], threshold);
      density_sum += st.density;
      sout << fmt_double(tab.times[t]) << ',' << fmt_double(st.density) << ','
           << fmt_double(st.transitivity) << '\n';
      for (int i = 0; i < n; ++i)
        dout << tab.ids[i] << ',' << fmt_double(tab.times[t]) << ','
             << fmt_double(st.degree[i]) << '\n';
    }
    summary["network"] = {{"n", n},
                          {"T", T},
                          {"threshold", threshold},
                          {"mean_density", density_sum / T}};
  }

  {
    std::ofstream jout(out / "summary.json");
    if (!jout) fail("cannot write summary.json");
    jout << summary.dump(2) << "\n";
  }
  write_manifest(out, "summarize", seed, cfg.raw(), json::object());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latent dynamic social network movement model"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"simulate", "forward-simulate network, paths, and noisy telemetry"},
      {"impute", "fit per-track movement models and draw a trajectory bank"},
      {"fit", "posterior sampling of the network and parameters"},
      {"baseline", "proximity-threshold network estimates"},
      {"summarize", "credible intervals and network statistics from outputs"}};

  struct SubArgs {
    CLI::App* sub = nullptr;
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
  };
  std::map<std::string, SubArgs> args;
  for (const auto& [name, desc] : cmds) {
    SubArgs& a = args[name];
    a.sub = app.add_subcommand(name, desc);
    a.sub->add_option("--config", a.config, "json config file")->required();
    a.sub->add_option("--seed", a.seed, "override the config seed");
    a.sub->add_option("--out", a.out, "override the config out_dir");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [name, a] : args) {
      if (!a.sub->parsed()) continue;
      std::ifstream in(a.config);
      if (!in) fail("cannot open config " + a.config);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        fail(a.config + ": " + e.what());
      }
      if (!j.is_object()) fail(a.config + ": config must be a json object");
      if (a.sub->count("--seed")) j["seed"] = a.seed;
      if (a.sub->count("--out")) j["out_dir"] = a.out;
      Config cfg(j, a.config);

      if (name == "simulate")
        cmd_simulate(cfg);
      else if (name == "impute")
        cmd_impute(cfg);
      else if (name == "fit")
        cmd_fit(cfg);
      else if (name == "baseline")
        cmd_baseline(cfg);
      else
        cmd_summarize(cfg);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "movenet: %s\n", e.what());
    return 1;
  }
  return 1;
}
