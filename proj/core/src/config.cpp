#include "diffnet/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "diffnet/report.hpp"
#include "json_support.hpp"

namespace diffnet {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const std::string& key, const std::string& path, T dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key, "has the wrong type");
  }
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "atc") return Algorithm::kAtc;
  if (s == "single_task") return Algorithm::kSingleTask;
  if (s == "multitask") return Algorithm::kMultitask;
  if (s == "lms") return Algorithm::kLms;
  if (s == "unmix") return Algorithm::kUnmix;
  throw ConfigError("algorithm",
                    "unknown value \"" + s +
                        "\" (want atc|single_task|multitask|lms|unmix|compare)");
}

NodeEnvironment env_from_json(const json& e, const ClusteredNetwork& net,
                              const std::string& path) {
  const int n = net.n_nodes();
  auto it = e.find("w_star_by_cluster");
  if (it == e.end()) throw ConfigError(path + ".w_star_by_cluster", "missing key");
  if (!it->is_array() || static_cast<int>(it->size()) != net.n_clusters())
    throw ConfigError(path + ".w_star_by_cluster",
                      "expected one vector per cluster");
  std::vector<Eigen::VectorXd> per_cluster;
  for (const auto& v : *it) {
    Eigen::VectorXd w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = v[i].get<double>();
    per_cluster.push_back(std::move(w));
  }
  const int dim = static_cast<int>(per_cluster.front().size());
  for (const auto& w : per_cluster)
    if (w.size() != dim)
      throw ConfigError(path + ".w_star_by_cluster",
                        "all vectors must share one length");

  std::vector<Eigen::VectorXd> w_star(n);
  for (int k = 0; k < n; ++k) w_star[k] = per_cluster[net.cluster_of(k)];

  std::vector<Eigen::MatrixXd> r_x(n);
  const json& rx = [&]() -> const json& {
    auto i = e.find("r_x");
    if (i == e.end()) throw ConfigError(path + ".r_x", "missing key");
    return *i;
  }();
  const std::string mode = get_or<std::string>(rx, "mode", path + ".r_x", "");
  if (mode == "iso") {
    auto vars = rx.find("variances");
    if (vars == rx.end() || static_cast<int>(vars->size()) != n)
      throw ConfigError(path + ".r_x.variances", "expected one value per node");
    for (int k = 0; k < n; ++k)
      r_x[k] = (*vars)[k].get<double>() *
               Eigen::MatrixXd::Identity(dim, dim);
  } else if (mode == "explicit") {
    auto mats = rx.find("matrices");
    if (mats == rx.end() || static_cast<int>(mats->size()) != n)
      throw ConfigError(path + ".r_x.matrices", "expected one matrix per node");
    for (int k = 0; k < n; ++k) {
      const auto& vals = (*mats)[k];
      if (static_cast<int>(vals.size()) != dim * dim)
        throw ConfigError(path + ".r_x.matrices",
                          "matrix " + std::to_string(k + 1) + " must have " +
                              std::to_string(dim * dim) + " entries");
      Eigen::MatrixXd m(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j2 = 0; j2 < dim; ++j2) m(i, j2) = vals[i * dim + j2].get<double>();
      r_x[k] = m;
    }
  } else {
    throw ConfigError(path + ".r_x.mode", "want \"iso\" or \"explicit\"");
  }

  auto sz = e.find("sigma2_z");
  if (sz == e.end() || static_cast<int>(sz->size()) != n)
    throw ConfigError(path + ".sigma2_z", "expected one value per node");
  std::vector<double> sigma2_z(n);
  for (int k = 0; k < n; ++k) sigma2_z[k] = (*sz)[k].get<double>();

  try {
    NodeEnvironment env(std::move(w_star), std::move(r_x), std::move(sigma2_z));
    check_cluster_consistency(net, env);
    return env;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(path, ex.what());
  }
}

std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

RunConfig RunConfig::from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("document", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("document", "must be a JSON object");

  RunConfig cfg;
  cfg.config_hash = fnv1a64(j.dump());

  auto sc = j.find("scenario");
  if (sc == j.end()) throw ConfigError("scenario", "missing key");
  const std::string type = get_or<std::string>(*sc, "type", "scenario", "");
  if (type == "illustrative") {
    cfg.scenario = ScenarioKind::kIllustrative;
  } else if (type == "spectrum") {
    cfg.scenario = ScenarioKind::kSpectrum;
    SpectrumParams& p = cfg.spectrum;
    p.n_primary = get_or(*sc, "n_primary", "scenario", p.n_primary);
    p.n_devices = get_or(*sc, "n_devices", "scenario", p.n_devices);
    p.n_antennas = get_or(*sc, "n_antennas", "scenario", p.n_antennas);
    p.n_freq = get_or(*sc, "n_freq", "scenario", p.n_freq);
    p.n_basis = get_or(*sc, "n_basis", "scenario", p.n_basis);
    p.basis_var = get_or(*sc, "basis_var", "scenario", p.basis_var);
    p.noise_std = get_or(*sc, "noise_std", "scenario", p.noise_std);
    p.p0 = get_or(*sc, "p0", "scenario", p.p0);
    p.ref_distance = get_or(*sc, "ref_distance", "scenario", p.ref_distance);
    p.link_radius = get_or(*sc, "link_radius", "scenario", p.link_radius);
    p.ring_radius = get_or(*sc, "ring_radius", "scenario", p.ring_radius);
  } else if (type == "localization") {
    cfg.scenario = ScenarioKind::kLocalization;
    LocalizationParams& p = cfg.localization;
    p.n_clusters = get_or(*sc, "n_clusters", "scenario", p.n_clusters);
    p.nodes_per_cluster =
        get_or(*sc, "nodes_per_cluster", "scenario", p.nodes_per_cluster);
    p.radius = get_or(*sc, "radius", "scenario", p.radius);
    p.arc_span = get_or(*sc, "arc_span", "scenario", p.arc_span);
    p.sigma2_v = get_or(*sc, "sigma2_v", "scenario", p.sigma2_v);
    p.sigma2_alpha = get_or(*sc, "sigma2_alpha", "scenario", p.sigma2_alpha);
    p.sigma2_beta = get_or(*sc, "sigma2_beta", "scenario", p.sigma2_beta);
    p.uniform_placement =
        get_or(*sc, "uniform_placement", "scenario", p.uniform_placement);
    p.placement_seed = get_or<std::uint64_t>(*sc, "placement_seed", "scenario",
                                             p.placement_seed);
  } else if (type == "unmix") {
    cfg.scenario = ScenarioKind::kUnmix;
    UnmixParams& p = cfg.unmix;
    p.rows = get_or(*sc, "rows", "scenario", p.rows);
    p.cols = get_or(*sc, "cols", "scenario", p.cols);
    p.n_endmembers = get_or(*sc, "endmembers", "scenario", p.n_endmembers);
    p.n_bands = get_or(*sc, "bands", "scenario", p.n_bands);
    p.snr_db = get_or(*sc, "snr_db", "scenario", p.snr_db);
    p.scene_seed = get_or<std::uint64_t>(*sc, "scene_seed", "scenario", p.scene_seed);
    p.noise_seed = get_or<std::uint64_t>(*sc, "noise_seed", "scenario", p.noise_seed);
  } else if (type == "network") {
    cfg.scenario = ScenarioKind::kNetwork;
    auto nw = sc->find("network");
    if (nw == sc->end()) throw ConfigError("scenario.network", "missing key");
    NetworkDocument doc = detail::network_from_json_obj(*nw, "scenario.network");
    auto envj = sc->find("env");
    if (envj == sc->end()) throw ConfigError("scenario.env", "missing key");
    NodeEnvironment env = env_from_json(*envj, doc.network, "scenario.env");
    DiffusionProblem p{std::move(doc.network), std::move(doc.combiners),
                       env.w_star_stacked(),
                       std::make_shared<GaussianSource>(env), std::move(env)};
    cfg.custom = std::make_shared<DiffusionProblem>(std::move(p));
  } else {
    throw ConfigError("scenario.type", "unknown scenario \"" + type + "\"");
  }

  const std::string algo = get_or<std::string>(j, "algorithm", "", "atc");
  if (algo == "compare") {
    cfg.compare = true;
    cfg.experiment.algorithm = Algorithm::kAtc;
  } else {
    cfg.experiment.algorithm = parse_algorithm(algo);
  }
  if (cfg.scenario == ScenarioKind::kUnmix &&
      cfg.experiment.algorithm != Algorithm::kUnmix)
    throw ConfigError("algorithm", "the unmix scenario requires \"unmix\"");
  if (cfg.scenario != ScenarioKind::kUnmix &&
      cfg.experiment.algorithm == Algorithm::kUnmix)
    throw ConfigError("algorithm", "\"unmix\" requires the unmix scenario");

  auto grid = j.find("grid");
  if (grid == j.end() || !grid->is_array() || grid->empty())
    throw ConfigError("grid", "need a non-empty array of {mu, eta} points");
  int gi = 0;
  for (const auto& g : *grid) {
    GridPoint gp;
    const std::string base = "grid[" + std::to_string(gi) + "]";
    if (!g.contains("mu")) throw ConfigError(base + ".mu", "missing key");
    gp.mu = g["mu"].get<double>();
    gp.eta = get_or(g, "eta", base, 0.0);
    if (!(gp.mu > 0.0)) throw ConfigError(base + ".mu", "must be > 0");
    if (gp.eta < 0.0) throw ConfigError(base + ".eta", "must be >= 0");
    cfg.experiment.grid.push_back(gp);
    ++gi;
  }

  cfg.experiment.n_trials = get_or(j, "n_trials", "", 100);
  cfg.experiment.n_iters = get_or<long>(j, "n_iters", "", 2000);
  if (cfg.experiment.n_trials < 1) throw ConfigError("n_trials", "must be >= 1");
  if (cfg.experiment.n_iters < 1) throw ConfigError("n_iters", "must be >= 1");
  cfg.experiment.seed = get_or<std::uint64_t>(j, "seed", "", 0);
  cfg.experiment.with_theory = get_or(j, "theory", "", true);
  cfg.experiment.threads = get_or(j, "threads", "", 1);
  cfg.experiment.size_cap =
      get_or<std::size_t>(j, "size_cap", "", kDefaultTheorySizeCap);
  cfg.require_stable = get_or(j, "require_stable", "", false);
  cfg.out_dir = get_or<std::string>(j, "out_dir", "", "out");
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("file", "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return from_json(ss.str());
}

DiffusionProblem make_problem(const RunConfig& cfg) {
  switch (cfg.scenario) {
    case ScenarioKind::kIllustrative:
      return illustrative_env();
    case ScenarioKind::kSpectrum:
      return spectrum_env(cfg.spectrum);
    case ScenarioKind::kLocalization:
      return localization_env(cfg.localization);
    case ScenarioKind::kNetwork:
      return *cfg.custom;
    case ScenarioKind::kUnmix:
      break;
  }
  throw ConfigError("scenario", "the unmix scenario has no diffusion problem");
}

namespace {

SummaryRow summarize_grid(const std::string& strategy, const GridResult& g) {
  SummaryRow row;
  row.strategy = strategy;
  row.mu = g.point.mu;
  row.eta = g.point.eta;
  row.steady_state_msd_db = to_db(g.steady_state_msd);
  // delta method: se(10 log10 x) = 10/ln10 * se(x)/x
  row.stderr_db = g.steady_state_msd > 0.0
                      ? 10.0 / std::log(10.0) * g.steady_state_stderr /
                            g.steady_state_msd
                      : 0.0;
  if (g.theory_steady_state) row.theory_msd_db = to_db(*g.theory_steady_state);
  row.diverged_trials = g.diverged_trials;
  return row;
}

std::string algo_name(Algorithm a) {
  switch (a) {
    case Algorithm::kAtc: return "atc";
    case Algorithm::kSingleTask: return "single_task";
    case Algorithm::kMultitask: return "multitask";
    case Algorithm::kLms: return "lms";
    case Algorithm::kUnmix: return "unmix";
  }
  return "?";
}

std::string point_suffix(const GridPoint& gp) {
  return "_mu" + format_g(gp.mu) + "_eta" + format_g(gp.eta);
}

}  // namespace

void cmd_run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> artifacts;
  std::vector<SummaryRow> rows;
  int diverged_total = 0;

  auto emit_grid = [&](const std::string& name, const GridResult& g) {
    const std::string curve_name = "curve_" + name + point_suffix(g.point) + ".csv";
    write_curve_csv(cfg.out_dir + "/" + curve_name, g.empirical.msd);
    artifacts.push_back(curve_name);
    if (g.theory) {
      const std::string theory_name =
          "theory_" + name + point_suffix(g.point) + ".csv";
      write_curve_csv(cfg.out_dir + "/" + theory_name, g.theory->zeta);
      artifacts.push_back(theory_name);
    }
    rows.push_back(summarize_grid(name, g));
    diverged_total += g.diverged_trials;
  };

  if (cfg.scenario == ScenarioKind::kUnmix) {
    UnmixClean clean = unmix_clean(cfg.unmix);
    UnmixRunResult result = run_unmix(clean, cfg.unmix.snr_db, cfg.experiment);
    for (const auto& g : result.grid) {
      const std::string curve_name = "curve_unmix" + point_suffix(g.point) + ".csv";
      write_curve_csv(cfg.out_dir + "/" + curve_name, g.empirical.msd);
      artifacts.push_back(curve_name);
      SummaryRow row;
      row.strategy = "unmix";
      row.mu = g.point.mu;
      row.eta = g.point.eta;
      row.steady_state_msd_db = to_db(g.steady_state_msd);
      row.stderr_db = g.steady_state_msd > 0.0
                          ? 10.0 / std::log(10.0) * g.steady_state_stderr /
                                g.steady_state_msd
                          : 0.0;
      row.diverged_trials = 0;
      rows.push_back(row);
    }
  } else {
    DiffusionProblem problem = make_problem(cfg);
    if (cfg.compare) {
      StrategyReport report = compare_strategies(problem, cfg.experiment);
      for (const auto& r : report.rows) emit_grid(r.strategy, r.result);
    } else {
      RunResult result = run(problem, cfg.experiment);
      const std::string name = algo_name(cfg.experiment.algorithm);
      for (const auto& g : result.grid) emit_grid(name, g);
    }
  }

  write_summary_json(cfg.out_dir + "/summary.json", rows);
  artifacts.push_back("summary.json");
  write_manifest(cfg.out_dir + "/manifest.json", cfg.config_hash,
                 cfg.experiment.seed, artifacts);

  if (cfg.require_stable && diverged_total > 0)
    throw DivergenceError(std::to_string(diverged_total) +
                          " trial(s) diverged but require_stable is set");
}

void cmd_validate(const RunConfig& cfg) {
  if (cfg.scenario == ScenarioKind::kUnmix) {
    UnmixClean clean = unmix_clean(cfg.unmix);
    std::cout << "ok: unmix scene " << clean.rows << "x" << clean.cols << ", "
              << clean.M.cols() << " endmembers, " << clean.M.rows()
              << " bands\n";
    return;
  }
  DiffusionProblem problem = make_problem(cfg);
  const ValidationReport report = validate(problem.network, problem.combiners);
  if (!report.ok) throw ConfigError("scenario", report.message);
  std::cout << "ok: " << problem.network.n_nodes() << " nodes, "
            << problem.network.n_clusters() << " clusters, combiners valid\n";
}

void cmd_theory(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  DiffusionProblem problem = make_problem(cfg);
  if (!problem.moments)
    throw ConfigError("scenario",
                      "closed-form moments unavailable for this scenario");
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> artifacts;
  std::vector<SummaryRow> rows;

  for (const auto& gp : cfg.experiment.grid) {
    const AdaptConfig acfg{gp.mu, gp.eta};
    TheoryModel model = assemble(problem.network, problem.combiners,
                                 *problem.moments, acfg,
                                 cfg.experiment.size_cap);
    const Eigen::VectorXd v0 = -model.w_star;
    MsdCurve curve =
        transient_msd(model, v0, static_cast<int>(cfg.experiment.n_iters) - 1);
    const std::string name = "theory" + point_suffix(gp) + ".csv";
    write_curve_csv(cfg.out_dir + "/" + name, curve.zeta);
    artifacts.push_back(name);

    SummaryRow row;
    row.strategy = "theory";
    row.mu = gp.mu;
    row.eta = gp.eta;
    row.diverged_trials = 0;
    row.stderr_db = 0.0;
    try {
      const double zeta_star = steady_state_msd(model);
      row.theory_msd_db = to_db(zeta_star);
      row.steady_state_msd_db = to_db(zeta_star);
    } catch (const StabilityError& e) {
      std::cerr << "warning: (mu=" << gp.mu << ", eta=" << gp.eta << "): "
                << e.what() << "\n";
      row.steady_state_msd_db = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }

  write_summary_json(cfg.out_dir + "/summary.json", rows);
  artifacts.push_back("summary.json");
  write_manifest(cfg.out_dir + "/manifest.json", cfg.config_hash,
                 cfg.experiment.seed, artifacts);
}

void cmd_oracle(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  DiffusionProblem problem = make_problem(cfg);
  if (!problem.moments)
    throw ConfigError("scenario",
                      "closed-form moments unavailable for this scenario");
  fs::create_directories(cfg.out_dir);

  const GridPoint gp = cfg.experiment.grid.front();
  const AdaptConfig acfg{gp.mu, gp.eta};
  DescentResult res = centralized_descent(problem.network, problem.combiners,
                                          *problem.moments, acfg);

  nlohmann::json out;
  out["mu"] = gp.mu;
  out["eta"] = gp.eta;
  out["iterations"] = res.iterations;
  out["gradient_norm"] = res.grad_norm;
  nlohmann::json clusters = nlohmann::json::array();
  nlohmann::json w_o = nlohmann::json::array();
  nlohmann::json bias = nlohmann::json::array();
  for (int i = 0; i < problem.network.n_clusters(); ++i) {
    nlohmann::json members = nlohmann::json::array();
    for (int k : problem.network.cluster(i)) members.push_back(k + 1);
    clusters.push_back(std::move(members));
    nlohmann::json wi = nlohmann::json::array();
    nlohmann::json bi = nlohmann::json::array();
    const int rep = problem.network.cluster(i).front();
    for (int c = 0; c < problem.moments->dim(); ++c) {
      wi.push_back(res.w_o[i][c]);
      bi.push_back(res.w_o[i][c] - problem.moments->w_star(rep)[c]);
    }
    w_o.push_back(std::move(wi));
    bias.push_back(std::move(bi));
  }
  out["clusters"] = std::move(clusters);
  out["w_o"] = std::move(w_o);
  out["bias"] = std::move(bias);

  std::ofstream f(cfg.out_dir + "/oracle.json");
  if (!f) throw std::runtime_error("cannot write oracle.json");
  f << out.dump(2) << '\n';
  write_manifest(cfg.out_dir + "/manifest.json", cfg.config_hash,
                 cfg.experiment.seed, {"oracle.json"});
}

}  // namespace diffnet
