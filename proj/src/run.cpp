#include "rggloc/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rggloc/acceptance.hpp"
#include "rggloc/extractor.hpp"
#include "rggloc/ldp.hpp"
#include "rggloc/parallel.hpp"
#include "rggloc/plot.hpp"
#include "rggloc/samplers.hpp"
#include "rggloc/sgraded.hpp"
#include "rggloc/statistics.hpp"

namespace rggloc {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kArtifactVersion = "0.1.0";

// ---- config parsing ----

const Json& section(const Json& root, const char* name, bool required) {
  static const Json empty = Json::object();
  if (!root.contains(name)) {
    if (required) throw ConfigError(std::string("config: missing section '") + name + "'");
    return empty;
  }
  const Json& s = root.at(name);
  if (!s.is_object()) throw ConfigError(std::string("config: '") + name + "' must be an object");
  return s;
}

void reject_unknown(const Json& obj, const char* where, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ConfigError(std::string("config: unknown key '") + key + "' in " + where);
    }
  }
}

double number(const Json& obj, const char* key, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(std::string("config: missing number '") + key + "'");
    return *fallback;
  }
  if (!obj.at(key).is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return obj.at(key).get<double>();
}

std::int64_t integer(const Json& obj, const char* key, std::optional<std::int64_t> fallback) {
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(std::string("config: missing integer '") + key + "'");
    return *fallback;
  }
  const Json& v = obj.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (x == std::floor(x) && std::fabs(x) < 9e15) return static_cast<std::int64_t>(x);
  }
  throw ConfigError(std::string("config: '") + key + "' must be an integer");
}

std::string text(const Json& obj, const char* key, std::optional<std::string> fallback) {
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(std::string("config: missing string '") + key + "'");
    return *fallback;
  }
  if (!obj.at(key).is_string()) throw ConfigError(std::string("config: '") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

Json snapshot_json(const RunConfig& c) {
  Json model = Json::object();
  model["n"] = c.n;
  if (c.r) model["r"] = *c.r;
  if (c.p_target) model["p_target"] = *c.p_target;
  model["delta_star"] = c.delta_star;
  model["d"] = c.d;
  model["norm"] = c.norm;
  Json j = Json::object();
  j["schema"] = "runconfig.v1";
  j["model"] = model;
  j["grid"] = {{"s", c.s}};
  j["conditioning"] = {{"delta", c.delta}, {"delta_tilde", c.delta_tilde}, {"eps", c.eps}, {"eps_tilde", c.eps_tilde}};
  j["sampler"] = {{"method", c.method},   {"plant_mode", c.plant_mode}, {"slack", c.slack},
                  {"replicas", c.replicas}, {"budget", c.budget},       {"t", c.t},
                  {"n_sweep", c.n_sweep}, {"sandwich_eps", c.sandwich_eps}, {"store", c.store}};
  j["verify"] = {{"scale", c.verify_scale}};
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  return j;
}

// ---- output bookkeeping ----

class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

  void write(const std::string& rel, const std::string& content) {
    const fs::path path = root_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + path.string());
    files_.push_back(rel);
  }

  // manifest.json, listing every file written so far with its checksum.
  void finish(const std::string& command, const RunConfig& cfg, const Json& derived, const std::vector<std::string>& warnings) {
    std::sort(files_.begin(), files_.end());
    Json files = Json::array();
    for (const auto& rel : files_) {
      const fs::path path = root_ / rel;
      files.push_back({{"path", rel}, {"bytes", fs::file_size(path)}, {"sha256", sha256_file(path.string())}});
    }
    Json m = Json::object();
    m["schema"] = "manifest.v1";
    m["artifact_version"] = kArtifactVersion;
    m["command"] = command;
    m["timestamp"] = utc_now();
    m["seed"] = cfg.seed;
    m["config"] = Json::parse(cfg.snapshot);
    m["derived"] = derived;
    m["warnings"] = warnings;
    m["files"] = files;
    std::ofstream os(root_ / "manifest.json", std::ios::binary);
    os << m.dump(2) << '\n';
  }

  const fs::path& root() const { return root_; }

 private:
  static std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  fs::path root_;
  std::vector<std::string> files_;
};

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- shared setup ----

struct Setup {
  RunConfig cfg;
  ModelParams params;
  GridModel grid;
  DerivedScales sc;
  std::vector<std::string> warnings;
};

DerivedScales scales_for(const RunConfig& cfg, const GridModel& grid) {
  return DerivedScales::compute(grid, cfg.delta_tilde, cfg.delta_star,
                                DerivedScales::xi_from_eps(cfg.eps_tilde, static_cast<double>(grid.tau_s)));
}

PlantOptions plant_options(const RunConfig& cfg) {
  PlantOptions po;
  po.mode = cfg.plant_mode == "tilted" ? PlantMode::Tilted : PlantMode::Conditioned;
  po.slack = cfg.slack;
  return po;
}

// Checks every module precondition the commands rely on, before sampling.
Setup prepare(RunConfig cfg, const std::string& command) {
  Setup su;
  if (!(cfg.delta > 0.0)) throw ConfigError("conditioning.delta must be positive");
  if (!(cfg.delta_tilde > 0.0)) throw ConfigError("conditioning.delta_tilde must be positive");
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ConfigError("conditioning.eps must lie in (0, 1)");
  if (!(cfg.eps_tilde > 0.0 && cfg.eps_tilde < 1.0)) throw ConfigError("conditioning.eps_tilde must lie in (0, 1)");
  if (cfg.method != "planted" && cfg.method != "rejection") throw ConfigError("sampler.method must be planted or rejection");
  if (cfg.plant_mode != "conditioned" && cfg.plant_mode != "tilted") {
    throw ConfigError("sampler.plant_mode must be conditioned or tilted");
  }
  if (cfg.replicas < 1) throw ConfigError("sampler.replicas must be >= 1");
  if (cfg.budget < 1) throw ConfigError("sampler.budget must be >= 1");
  if (!(cfg.t > 0.0)) throw ConfigError("sampler.t must be positive");
  if (!(cfg.sandwich_eps > 0.0 && cfg.sandwich_eps < 0.5)) throw ConfigError("sampler.sandwich_eps must lie in (0, 1/2)");
  for (double v : cfg.n_sweep) {
    if (!(v > 1.0)) throw ConfigError("sampler.n_sweep entries must exceed 1");
  }
  if (command == "tail" && cfg.method == "planted" && cfg.replicas < 100) {
    throw ConfigError("tail: importance sampling needs sampler.replicas >= 100");
  }
  parse_scale(cfg.verify_scale);
  try {
    su.params = cfg.params();
    su.grid = GridModel::build(su.params, cfg.s);
    su.sc = scales_for(cfg, su.grid);
    if (command == "tail") {
      for (double v : cfg.n_sweep.empty() ? std::vector<double>{cfg.n} : cfg.n_sweep) {
        const ModelParams p = cfg.params_at(v);
        GridModel::build(p, cfg.s);
        rate_function(cfg.t, p.p_hat);
      }
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  su.warnings = su.params.regime_warnings();
  if (!su.grid.tau_exact) su.warnings.push_back("tau_s is a lower bound (clique search budget)");
  su.cfg = std::move(cfg);
  return su;
}

Json derived_json(const Setup& su) {
  const RunConfig& c = su.cfg;
  const PlantPlan plan = plan_planting(su.grid, c.delta_tilde, plant_options(c));
  Json d = Json::object();
  d["mu"] = expected_edges(su.params);
  d["mu_tilde"] = su.sc.mu_tilde;
  d["r"] = su.params.r;
  d["tau"] = ball_volume_tau(su.params.r, su.params.norm);
  d["m"] = su.grid.m;
  d["D"] = su.grid.D;
  d["nbhd_size"] = su.grid.nbhd_size;
  d["tau_s"] = su.grid.tau_s;
  d["tau_s_exact"] = su.grid.tau_exact;
  d["p_hat"] = su.params.p_hat;
  d["p_hat_grid"] = su.sc.p_hat;
  d["q"] = su.sc.q;
  d["w"] = su.sc.w;
  d["a"] = su.sc.a;
  d["M"] = su.sc.M;
  d["z"] = su.sc.z;
  d["alpha"] = su.sc.alpha;
  d["beta"] = su.sc.beta;
  d["gamma"] = su.sc.gamma;
  d["xi"] = su.sc.xi;
  d["edge_threshold"] = (1.0 + c.delta_tilde) * su.sc.mu_tilde;
  d["mass_threshold"] = su.sc.mass_threshold();
  d["very_large_cut"] = std::pow(su.sc.xi, 0.25) * su.sc.q / su.sc.tau_s;
  d["planted_mean"] = plan.D_prime;
  d["planted_floor"] = plan.k;
  d["planted_continuum_count"] = planted_continuum_count(su.params, c.delta, c.slack);
  return d;
}

// Largest relative disagreement between a stored derived record and a fresh one.
double derived_disagreement(const Json& stored, const Json& fresh, std::string& worst_key) {
  double worst = 0.0;
  for (const auto& [key, value] : fresh.items()) {
    if (!stored.contains(key)) {
      worst_key = key;
      return INFINITY;
    }
    const Json& s = stored.at(key);
    double diff;
    if (value.is_boolean()) {
      diff = s == value ? 0.0 : INFINITY;
    } else {
      const double a = s.get<double>(), b = value.get<double>();
      diff = std::fabs(a - b) / std::max(1.0, std::fabs(b));
    }
    if (diff > worst) {
      worst = diff;
      worst_key = key;
    }
  }
  return worst;
}

Json cell_sidecar(const CellConfig& cfg, const Setup& su) {
  return {{"schema", "cell_config.v1"}, {"d", su.grid.dim},   {"norm", su.grid.norm.name()},
          {"s", su.grid.s},             {"m", su.grid.m},     {"n", su.grid.n},
          {"r", su.grid.r},             {"D", su.grid.D},     {"total", cfg.total()},
          {"support", cfg.support()}};
}

void store_cells(OutputDir& out, const std::string& stem, const CellConfig& cfg, const Setup& su) {
  std::ostringstream csv;
  write_cell_config_csv(csv, cfg);
  out.write(stem + ".csv", csv.str());
  out.write(stem + ".json", cell_sidecar(cfg, su).dump(2) + "\n");
}

Json report_json(const LocalizationReport& r) {
  return {{"status", r.status},
          {"thm2_pass", r.thm2_pass},
          {"frakI_size", r.frakI.size()},
          {"frakT_size", r.frakT.size()},
          {"frakP", r.frakP},
          {"diamP", r.diamP},
          {"cardP", r.cardP},
          {"max_dev_inside", std::isfinite(r.max_dev_inside) ? Json(r.max_dev_inside) : Json(nullptr)},
          {"max_ratio_outside", r.max_ratio_outside},
          {"worst_outside_cell", r.worst_outside_cell},
          {"worst_outside_count", r.worst_outside_count},
          {"Q_P", r.QP},
          {"V_frakI", r.V_frakI},
          {"eps_tilde", r.eps_tilde}};
}

Json margin_json(const ProbeMargin& p) {
  return {{"probe", p.probe}, {"count", p.count}, {"measure_ratio", p.measure_ratio}, {"margin", p.margin}};
}

Json tail_json(const TailEstimate& e, const ModelParams& p, const GridModel& g, std::uint64_t seed) {
  return {{"schema", "tail_estimate.v1"},
          {"t", e.t},
          {"n", p.n},
          {"r", p.r},
          {"s", g.s},
          {"norm", g.norm.name()},
          {"method", e.method},
          {"threshold", e.threshold},
          {"log_prob", std::isfinite(e.log_prob) ? Json(e.log_prob) : Json(nullptr)},
          {"std_err", e.std_err},
          {"log_std_err", std::isfinite(e.log_std_err) ? Json(e.log_std_err) : Json(nullptr)},
          {"n_replicas", e.n_replicas},
          {"hits", e.hits},
          {"ess", e.ess},
          {"unreliable", e.unreliable},
          {"truncation_error", e.truncation_error},
          {"warning", e.warning},
          {"seed", seed}};
}

// ---- commands ----

int cmd_grid_info(const Setup& su, OutputDir& out, std::ostream& os) {
  const Json derived = derived_json(su);
  os << "norm " << su.grid.norm.name() << "  d " << su.grid.dim << "  s " << su.grid.s << "  n " << g17(su.params.n)
     << '\n';
  for (const auto& [key, value] : derived.items()) os << std::left << std::setw(26) << key << value.dump() << '\n';
  for (const auto& w : su.warnings) os << "warning: " << w << '\n';
  Json j = {{"schema", "grid_info.v1"}, {"derived", derived}, {"warnings", su.warnings}};
  out.write("grid_info.json", j.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const Setup& su, OutputDir& out, std::ostream& os) {
  const RunConfig& c = su.cfg;
  struct Row {
    std::size_t vertices = 0;
    std::int64_t edges = 0, sedges = 0, max_cell = 0;
  };
  std::vector<Row> rows(c.replicas);
  parallel_for(c.replicas, [&](std::size_t i) {
    Rng rng = Rng::stream(c.seed, i);
    const PointSet ps = sample_ppp(su.params.n, su.params.norm, rng);
    const CellConfig cells = coarsen(ps, su.grid);
    rows[i].vertices = ps.size();
    rows[i].edges = edge_count(ps, su.params.r, su.params.norm);
    rows[i].sedges = sgraded_edge_count(cells);
    rows[i].max_cell = cells.count.empty() ? 0 : *std::max_element(cells.count.begin(), cells.count.end());
  });
  std::ostringstream csv;
  csv << "replica,vertices,edges,sgraded_edges,max_cell_count\n";
  std::vector<double> e, se;
  double sum = 0.0, sum2 = 0.0, ssum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << i << ',' << rows[i].vertices << ',' << rows[i].edges << ',' << rows[i].sedges << ',' << rows[i].max_cell << '\n';
    e.push_back(static_cast<double>(rows[i].edges));
    se.push_back(static_cast<double>(rows[i].sedges));
    sum += e.back();
    sum2 += e.back() * e.back();
    ssum += se.back();
  }
  const double N = static_cast<double>(rows.size());
  const double mean = sum / N;
  const double sd = N > 1 ? std::sqrt(std::max(0.0, (sum2 - N * mean * mean) / (N - 1))) : 0.0;
  out.write("simulate_summary.csv", csv.str());
  std::ostringstream h1, h2;
  write_histogram_svg(h1, "Edge count |E|", "|E|", e);
  write_histogram_svg(h2, "s-graded edge count |E_s|", "|E_s|", se);
  out.write("edges_hist.svg", h1.str());
  out.write("sgraded_edges_hist.svg", h2.str());
  {
    Rng rng = Rng::stream(c.seed, 0);
    const PointSet ps = sample_ppp(su.params.n, su.params.norm, rng);
    std::ostringstream pts;
    write_pointset_csv(pts, ps);
    out.write("sample_points.csv", pts.str());
    store_cells(out, "sample_cells", coarsen(ps, su.grid), su);
  }
  Json stats = {{"schema", "simulate_stats.v1"}, {"replicas", c.replicas},       {"mean_edges", mean},
                {"sd_edges", sd},                {"mu", expected_edges(su.params)}, {"mean_sgraded_edges", ssum / N},
                {"mu_tilde", su.sc.mu_tilde}};
  out.write("simulate_stats.json", stats.dump(2) + "\n");
  os << "replicas " << c.replicas << "  mean |E| " << g17(mean) << "  mu " << g17(expected_edges(su.params))
     << "  mean |E_s| " << g17(ssum / N) << "  mu_tilde " << g17(su.sc.mu_tilde) << '\n';
  return kExitOk;
}

std::string profile_header() {
  return "replica,edges,event_L,log_weight,status,thm2_pass,cardP,diamP,max_dev_inside,max_ratio_outside,Q_P,Q_P_Pc,Q_Pc,V_P\n";
}

std::string profile_row(std::size_t i, std::int64_t edges, bool in_L, double log_w, const LocalizationProfile& p) {
  std::ostringstream os;
  os << i << ',' << edges << ',' << (in_L ? 1 : 0) << ',' << g17(log_w) << ',' << p.report.status << ','
     << (p.report.thm2_pass ? 1 : 0) << ',' << p.report.cardP << ',' << p.report.diamP << ','
     << g17(p.report.max_dev_inside) << ',' << g17(p.report.max_ratio_outside) << ',' << g17(p.Q_P) << ','
     << g17(p.Q_P_Pc) << ',' << g17(p.Q_Pc) << ',' << g17(p.V_P) << '\n';
  return os.str();
}

int cmd_condition(const Setup& su, OutputDir& out, std::ostream& os) {
  const RunConfig& c = su.cfg;
  std::ostringstream csv;
  csv << profile_header();
  Json summary = {{"schema", "condition_summary.v1"}, {"method", c.method}};
  if (c.method == "rejection") {
    const double threshold = (1.0 + c.delta_tilde) * su.sc.mu_tilde;
    RejectionResult res = rejection_conditional(su.grid, threshold, c.budget, c.seed, c.store);
    for (auto& cfg : res.accepted) cfg.grid = &su.grid;
    for (std::size_t i = 0; i < res.accepted.size(); ++i) {
      const CellConfig& cfg = res.accepted[i];
      const LocalizationProfile p = localization_profile(cfg, su.grid, su.sc, c.eps_tilde);
      csv << profile_row(i, sgraded_edge_count(cfg), event_L(cfg, su.sc), 0.0, p);
      store_cells(out, "configs/cells_" + std::to_string(i), cfg, su);
    }
    summary["threshold"] = threshold;
    summary["consumed"] = res.consumed;
    summary["accepted"] = res.accepted_count;
    summary["acceptance_rate"] = res.acceptance_rate;
    summary["status"] = res.status;
    os << "rejection: accepted " << res.accepted_count << "/" << res.consumed << " (" << res.status << ")\n";
  } else {
    const PlantPlan plan = plan_planting(su.grid, c.delta_tilde, plant_options(c));
    struct Rec {
      std::int64_t edges = 0;
      bool in_L = false;
      double log_w = 0.0;
      LocalizationProfile prof;
      CellConfig cfg;
    };
    std::vector<Rec> recs(c.replicas);
    parallel_for(c.replicas, [&](std::size_t i) {
      Rng rng = Rng::stream(c.seed, i);
      CellConfig cfg = planted_cell_config(su.grid, plan, rng);
      recs[i].edges = sgraded_edge_count(cfg);
      recs[i].in_L = event_L(cfg, su.sc);
      recs[i].log_w = mixture_log_weight(cfg, plan);
      recs[i].prof = localization_profile(cfg, su.grid, su.sc, c.eps_tilde);
      if (i < c.store) recs[i].cfg = std::move(cfg);
    });
    std::size_t in_L = 0, pass = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      csv << profile_row(i, recs[i].edges, recs[i].in_L, recs[i].log_w, recs[i].prof);
      in_L += recs[i].in_L;
      pass += recs[i].prof.report.thm2_pass;
      if (i < c.store) store_cells(out, "configs/cells_" + std::to_string(i), recs[i].cfg, su);
    }
    summary["plant_mode"] = c.plant_mode;
    summary["planted_mean"] = plan.D_prime;
    summary["planted_floor"] = plan.k;
    summary["fallback"] = plan.fallback;
    summary["replicas"] = c.replicas;
    summary["event_L_rate"] = static_cast<double>(in_L) / static_cast<double>(c.replicas);
    summary["thm2_pass_rate"] = static_cast<double>(pass) / static_cast<double>(c.replicas);
    os << "planted (" << c.plant_mode << "): event L " << in_L << "/" << c.replicas << ", localization certified " << pass
       << "/" << c.replicas << '\n';
  }
  out.write("condition_profiles.csv", csv.str());
  out.write("condition_summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

// Heatmap around the densest part of cfg, with frakP outlined. Higher
// dimensions show the slice through the centre cell.
std::string heatmap(const CellConfig& cfg, const GridModel& grid, const IndexSet& frakP) {
  std::uint64_t centre = 0;
  if (!frakP.empty()) {
    centre = frakP.front();
  } else if (!cfg.count.empty()) {
    centre = cfg.index[std::max_element(cfg.count.begin(), cfg.count.end()) - cfg.count.begin()];
  }
  const CellCoords c0 = grid.decode(centre);
  const int side = static_cast<int>(std::min<std::int64_t>(grid.m, 4 * grid.s + 9));
  const int cols = side, rows = grid.dim >= 2 ? side : 1;
  std::vector<double> values(static_cast<std::size_t>(cols) * rows, 0.0);
  std::vector<bool> outline(values.size(), false);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      CellCoords off{};
      off[0] = x - side / 2;
      if (grid.dim >= 2) off[1] = y - side / 2;
      const std::uint64_t lin = grid.shift(c0, off);
      const std::size_t i = static_cast<std::size_t>(y) * cols + x;
      values[i] = static_cast<double>(cfg.at(lin));
      outline[i] = set_contains(frakP, lin);
    }
  }
  std::ostringstream svg;
  write_heatmap_svg(svg, "Cell counts near the localized set", cols, rows, values, outline);
  return svg.str();
}

int cmd_extract(const Setup& su, OutputDir& out, std::ostream& os, const std::optional<std::string>& input) {
  const RunConfig& c = su.cfg;
  std::optional<PointSet> points;
  CellConfig cells;
  std::string source;
  if (input) {
    std::ifstream is(*input);
    if (!is) throw ConfigError("extract: cannot open input " + *input);
    std::string first;
    std::getline(is, first);
    is.seekg(0);
    if (first.rfind("dim,", 0) == 0) {
      points = read_pointset_csv(is);
      if (points->dim != su.grid.dim) throw ConfigError("extract: input dimension differs from the config");
      cells = coarsen(*points, su.grid);
    } else {
      cells = read_cell_config_csv(is, su.grid);
    }
    source = fs::path(*input).filename().string();
  } else {
    points = planted_continuum_sampler(su.params, c.delta, c.seed, {}, c.slack);
    cells = coarsen(*points, su.grid);
    source = "planted continuum sample";
  }
  Json j = {{"schema", "extract_report.v1"}, {"input", source}};
  const LocalizationReport rep = certify_thm2(cells, su.grid, su.sc, c.eps_tilde);
  j["cells"] = report_json(rep);
  os << "cell localization: " << rep.status << " (|P|=" << rep.cardP << ", diam " << rep.diamP << ")\n";
  if (points) {
    const Thm1Report t1 = certify_thm1(*points, su.params, c.s, c.delta, c.eps);
    j["continuum"] = {{"candidate_source", t1.candidate_source},
                      {"center", t1.center},
                      {"radius", t1.radius},
                      {"count_A", t1.count_A},
                      {"scale", t1.scale},
                      {"ratio_A", t1.ratio_A},
                      {"clause_a_A", t1.clause_a_A},
                      {"clause_a", t1.clause_a},
                      {"clause_b", t1.clause_b},
                      {"probes_a", t1.probes_a},
                      {"probes_b", t1.probes_b},
                      {"worst_a", margin_json(t1.worst_a)},
                      {"worst_b", margin_json(t1.worst_b)}};
    os << "continuum ball: " << t1.count_A << " points (ratio " << g17(t1.ratio_A) << "), clause (a) "
       << (t1.clause_a ? "holds" : "fails") << ", clause (b) " << (t1.clause_b ? "holds" : "fails") << '\n';
  }
  out.write("extract_report.json", j.dump(2) + "\n");
  out.write("heatmap.svg", heatmap(cells, su.grid, rep.frakP));
  return kExitOk;
}

int cmd_tail(const Setup& su, OutputDir& out, std::ostream& os) {
  const RunConfig& c = su.cfg;
  const std::vector<double> sweep = c.n_sweep.empty() ? std::vector<double>{c.n} : c.n_sweep;
  std::ostringstream tails, sandwich, conv;
  write_tail_csv_header(tails);
  write_sandwich_csv_header(sandwich);
  conv << "n,log_n,normalized_estimate,normalized_std_err,normalized_lower,normalized_upper,midpoint,minus_I,ess,unreliable\n";
  Json all = Json::array();
  Series est_s{"estimate", {}, {}, {}}, lo_s{"lower bound", {}, {}, {}}, hi_s{"upper bound", {}, {}, {}};
  double minus_I = 0.0;
  for (double n : sweep) {
    const ModelParams p = c.params_at(n);
    const GridModel grid = GridModel::build(p, c.s);
    const TailEstimate est = c.method == "rejection" ? rejection_tail_estimate(grid, c.t, c.replicas, c.seed)
                                                     : importance_estimate_tail(grid, c.t, c.replicas, c.seed, plant_options(c));
    const SandwichBound sb = sandwich_bounds(p, grid, c.t, c.sandwich_eps);
    const double mu = expected_edges(p);
    const NormalizedTail nt = normalized_log_tail(est, mu, n);
    const double speed = std::sqrt(mu) * std::log(n);
    const double lo = sb.lower_log / speed, hi = sb.upper_log / speed;
    minus_I = -rate_function(c.t, p.p_hat);
    write_tail_csv_row(tails, est, grid, c.seed);
    write_sandwich_csv_row(sandwich, sb, p);
    conv << g17(n) << ',' << g17(std::log(n)) << ',' << g17(nt.value) << ',' << g17(nt.std_err) << ',' << g17(lo) << ','
         << g17(hi) << ',' << g17(0.5 * (lo + hi)) << ',' << g17(minus_I) << ',' << g17(est.ess) << ','
         << (nt.unreliable ? 1 : 0) << '\n';
    Json tj = tail_json(est, p, grid, c.seed);
    tj["sandwich"] = {{"lower_log", sb.lower_log},
                      {"upper_log", sb.upper_log},
                      {"eps", sb.eps},
                      {"raw_upper_log", sb.components.raw_upper_log},
                      {"log_clique_sets", sb.components.log_clique_sets},
                      {"log_upper_tail", sb.components.log_upper_tail},
                      {"upper_threshold", sb.components.upper_threshold},
                      {"lower_count", sb.components.lower_count},
                      {"log_lower_pmf", sb.components.log_lower_pmf},
                      {"assumptions", sb.components.assumptions}};
    all.push_back(tj);
    est_s.x.push_back(std::log(n));
    est_s.y.push_back(nt.value);
    est_s.y_err.push_back(nt.std_err);
    lo_s.x.push_back(std::log(n));
    lo_s.y.push_back(lo);
    hi_s.x.push_back(std::log(n));
    hi_s.y.push_back(hi);
    os << "n " << g17(n) << ": normalized estimate " << g17(nt.value) << " in [" << g17(lo) << ", " << g17(hi) << "]"
       << (nt.unreliable ? " (ESS < 10)" : "") << '\n';
  }
  out.write("tail_estimates.csv", tails.str());
  out.write("tail_estimates.json", all.dump(2) + "\n");
  out.write("sandwich.csv", sandwich.str());
  out.write("ldp_convergence.csv", conv.str());
  std::ostringstream svg;
  write_line_plot_svg(svg, "Normalized log-tail vs log n", "log n", "log P / (sqrt(mu) log n)", {est_s, lo_s, hi_s},
                      ReferenceLine{minus_I, "-I(t)"});
  out.write("ldp_trend.svg", svg.str());
  return kExitOk;
}

int cmd_verify(const Setup& su, OutputDir& out, std::ostream& os) {
  AcceptanceOptions opts;
  opts.scale = parse_scale(su.cfg.verify_scale);
  opts.seed = su.cfg.seed;
  std::ostringstream txt;
  Json report = Json::array();
  bool all = true;
  for (int id : criterion_ids()) {
    const CriterionResult r = run_criterion(id, opts);
    all = all && r.pass;
    txt << format_result(r) << '\n';
    report.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    os << format_result(r) << "  [" << std::fixed << std::setprecision(1) << r.seconds << " s]\n" << std::defaultfloat;
  }
  // Round-trip the manifest's derived record and compare with a recomputation.
  const Json stored = Json::parse(derived_json(su).dump());
  const Setup again = prepare(su.cfg, "verify");
  std::string key;
  const double gap = derived_disagreement(stored, derived_json(again), key);
  const bool manifest_ok = gap <= 1e-12;
  all = all && manifest_ok;
  const std::string line = std::string(manifest_ok ? "PASS" : "FAIL") + "  - manifest derived quantities: largest relative gap " +
                           g17(gap) + (key.empty() ? "" : " (" + key + ")");
  txt << line << '\n';
  os << line << '\n';
  report.push_back({{"id", "manifest"}, {"pass", manifest_ok}, {"detail", line}});
  out.write("verify_report.txt", txt.str());
  Json j = {{"schema", "verify_report.v1"}, {"scale", su.cfg.verify_scale}, {"seed", su.cfg.seed}, {"all_pass", all},
            {"criteria", report}};
  out.write("verify_report.json", j.dump(2) + "\n");
  return all ? kExitOk : kExitTestFailure;
}

}  // namespace

// ---- RunConfig ----

ModelParams RunConfig::params() const { return params_at(n); }

ModelParams RunConfig::params_at(double n_value) const {
  const NormSpec spec = NormSpec::parse(norm, d);
  if (p_target) return ModelParams::from_p_target(n_value, *p_target, spec, delta_star);
  return ModelParams::make(n_value, *r, spec, delta_star);
}

RunConfig parse_run_config(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.empty()) throw ConfigError("config is empty");
  reject_unknown(j, "the document", {"schema", "model", "grid", "conditioning", "sampler", "verify", "seed", "output_dir"});
  if (j.contains("schema") && j.at("schema") != "runconfig.v1") throw ConfigError("config: schema must be runconfig.v1");
  RunConfig c;
  const Json& model = section(j, "model", true);
  reject_unknown(model, "model", {"n", "r", "p_target", "delta_star", "d", "norm"});
  c.n = number(model, "n", std::nullopt);
  if (model.contains("r")) c.r = number(model, "r", std::nullopt);
  if (model.contains("p_target")) c.p_target = number(model, "p_target", std::nullopt);
  if (c.r.has_value() == c.p_target.has_value()) throw ConfigError("config: give exactly one of model.r and model.p_target");
  c.delta_star = number(model, "delta_star", 0.5);
  c.d = static_cast<int>(integer(model, "d", std::nullopt));
  c.norm = text(model, "norm", std::nullopt);
  if (c.d < 1 || c.d > kMaxDim) throw ConfigError("config: model.d must lie in 1..4");
  if (c.norm != "L1" && c.norm != "L2" && c.norm != "Linf") throw ConfigError("config: model.norm must be L1, L2 or Linf");

  const Json& grid = section(j, "grid", true);
  reject_unknown(grid, "grid", {"s"});
  c.s = static_cast<int>(integer(grid, "s", std::nullopt));
  if (c.s < 3) throw ConfigError("config: grid.s must be at least 3");

  const Json& cond = section(j, "conditioning", false);
  reject_unknown(cond, "conditioning", {"delta", "delta_tilde", "eps", "eps_tilde"});
  c.delta = number(cond, "delta", c.delta);
  c.delta_tilde = number(cond, "delta_tilde", c.delta_tilde);
  c.eps = number(cond, "eps", c.eps);
  c.eps_tilde = number(cond, "eps_tilde", c.eps_tilde);

  const Json& samp = section(j, "sampler", false);
  reject_unknown(samp, "sampler",
                 {"method", "plant_mode", "slack", "replicas", "budget", "t", "n_sweep", "sandwich_eps", "store"});
  c.method = text(samp, "method", c.method);
  c.plant_mode = text(samp, "plant_mode", c.plant_mode);
  if (samp.contains("slack")) {
    if (!samp.at("slack").is_boolean()) throw ConfigError("config: sampler.slack must be a boolean");
    c.slack = samp.at("slack").get<bool>();
  }
  const std::int64_t replicas = integer(samp, "replicas", static_cast<std::int64_t>(c.replicas));
  const std::int64_t budget = integer(samp, "budget", static_cast<std::int64_t>(c.budget));
  const std::int64_t store = integer(samp, "store", static_cast<std::int64_t>(c.store));
  if (replicas < 1 || budget < 1 || store < 0) throw ConfigError("config: replicas and budget must be >= 1, store >= 0");
  c.replicas = static_cast<std::uint64_t>(replicas);
  c.budget = static_cast<std::uint64_t>(budget);
  c.store = static_cast<std::uint64_t>(store);
  c.t = number(samp, "t", c.t);
  c.sandwich_eps = number(samp, "sandwich_eps", c.sandwich_eps);
  if (samp.contains("n_sweep")) {
    const Json& sw = samp.at("n_sweep");
    if (!sw.is_array()) throw ConfigError("config: sampler.n_sweep must be an array");
    for (const auto& v : sw) {
      if (!v.is_number()) throw ConfigError("config: sampler.n_sweep entries must be numbers");
      c.n_sweep.push_back(v.get<double>());
    }
  }
  const Json& ver = section(j, "verify", false);
  reject_unknown(ver, "verify", {"scale"});
  c.verify_scale = text(ver, "scale", c.verify_scale);

  const std::int64_t seed = integer(j, "seed", 1);
  if (seed < 0) throw ConfigError("config: seed must be nonnegative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.output_dir = text(j, "output_dir", c.output_dir);
  c.snapshot = snapshot_json(c).dump();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str());
}

int run_command(const std::string& command, const std::string& config_path, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  static const char* const kCommands[] = {"grid-info", "simulate", "condition", "extract", "tail", "verify"};
  if (std::none_of(std::begin(kCommands), std::end(kCommands), [&](const char* c) { return command == c; })) {
    err << "error: unknown command '" << command << "'\n";
    return kExitConfigError;
  }
  try {
    RunConfig cfg = load_run_config(config_path);
    if (options.seed) cfg.seed = *options.seed;
    if (options.out_dir) cfg.output_dir = *options.out_dir;
    cfg.snapshot = snapshot_json(cfg).dump();
    const Setup su = prepare(cfg, command);
    OutputDir dir(su.cfg.output_dir);
    std::ostringstream sink;
    std::ostream& os = options.quiet ? static_cast<std::ostream&>(sink) : out;
    int code = kExitOk;
    if (command == "grid-info") code = cmd_grid_info(su, dir, os);
    if (command == "simulate") code = cmd_simulate(su, dir, os);
    if (command == "condition") code = cmd_condition(su, dir, os);
    if (command == "extract") code = cmd_extract(su, dir, os, options.input);
    if (command == "tail") code = cmd_tail(su, dir, os);
    if (command == "verify") code = cmd_verify(su, dir, os);
    dir.finish(command, su.cfg, derived_json(su), su.warnings);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const BudgetExceeded& e) {
    err << "budget exhausted: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitTestFailure;
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace rggloc
