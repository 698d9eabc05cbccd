#include "ranla/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ranla/rng.hpp"

namespace ranla {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// Inter-site distance as a multiple of the drawn cell radius; the three
// sites sit on the vertices of an equilateral triangle.
constexpr double kIsdRadiusFactor = 3.0;

void require_nonempty(size_t n, const char* what) {
  if (n == 0) throw ConfigError(std::string("randomization space: empty set '") + what + "'");
}

void check_space(const RandomizationSpace& s) {
  require_nonempty(s.bandwidth_mhz.size(), "bandwidth_mhz");
  require_nonempty(s.num_subbands.size(), "num_subbands");
  require_nonempty(s.dl_tx_power_w.size(), "dl_tx_power_w");
  if (s.bandwidth_mhz.size() != s.num_subbands.size() ||
      s.bandwidth_mhz.size() != s.dl_tx_power_w.size()) {
    throw ConfigError("randomization space: bandwidth/num_subbands/dl_tx_power_w lists must be parallel");
  }
  require_nonempty(s.cell_radius_m.size(), "cell_radius_m");
  require_nonempty(s.site_types.size(), "site_types");
  require_nonempty(s.fb_ue_counts.size(), "fb_ue_counts");
  require_nonempty(s.mbb_ue_counts.size(), "mbb_ue_counts");
  require_nonempty(s.fb_speeds_mps.size(), "fb_speeds_mps");
  require_nonempty(s.mbb_speeds_mps.size(), "mbb_speeds_mps");
  require_nonempty(s.indoor_probabilities.size(), "indoor_probabilities");
  require_nonempty(s.ue_antennas.size(), "ue_antennas");
  require_nonempty(s.receiver_types.size(), "receiver_types");
  if (s.duration_ttis <= 0) throw ConfigError("randomization space: duration_ttis must be > 0");
}

std::vector<SiteConfig> make_sites(int num_sites, const std::vector<SiteType>& types,
                                   double radius_m, double bw_mhz, int subbands, double power_w) {
  double isd = kIsdRadiusFactor * radius_m;
  // Equilateral triangle vertices; a single site sits at the origin.
  const double xs[3] = {0.0, isd, isd / 2.0};
  const double ys[3] = {0.0, 0.0, isd * std::sqrt(3.0) / 2.0};
  std::vector<SiteConfig> sites;
  for (int s = 0; s < num_sites; ++s) {
    SiteConfig site;
    site.site_id = s;
    site.x_m = xs[s];
    site.y_m = ys[s];
    site.site_type = types[s];
    for (int k = 0; k < kCellsPerSite; ++k) {
      CellConfig cell;
      cell.cell_id = s * kCellsPerSite + k;
      cell.azimuth_deg = 120.0 * k;
      cell.cell_radius_m = radius_m;
      cell.bandwidth_mhz = bw_mhz;
      cell.num_subbands = subbands;
      cell.dl_tx_power_w = power_w;
      site.cells.push_back(cell);
    }
    sites.push_back(site);
  }
  return sites;
}

struct UeDrawParams {
  std::vector<double> speeds;
  std::vector<int> antennas;
  std::vector<int> receiver_types;
  double indoor_probability = 0.0;
};

UEConfig draw_ue(Rng& rng, int ue_id, TrafficType traffic, const ScenarioConfig& cfg,
                 const UeDrawParams& p) {
  UEConfig ue;
  ue.ue_id = ue_id;
  ue.traffic = traffic;
  int num_cells = cfg.num_cells();
  ue.serving_cell_id = static_cast<int>(rng.uniform_int(0, num_cells - 1));
  const SiteConfig* site = cfg.site_of_cell(ue.serving_cell_id);
  const CellConfig* cell = cfg.find_cell(ue.serving_cell_id);
  // Uniform drop in the serving-cell disc.
  double r = cell->cell_radius_m * std::sqrt(rng.uniform());
  double theta = rng.uniform(0.0, 2.0 * kPi);
  ue.x_m = site->x_m + r * std::cos(theta);
  ue.y_m = site->y_m + r * std::sin(theta);
  ue.speed_mps = rng.pick(p.speeds);
  ue.num_antennas = rng.pick(p.antennas);
  ue.max_rank = ue.num_antennas;
  ue.receiver_type = rng.pick(p.receiver_types);
  ue.indoor = rng.uniform() < p.indoor_probability;
  return ue;
}

}  // namespace

std::string to_string(SiteType t) {
  return t == SiteType::kMimo ? "MIMO" : "mMIMO";
}

std::string to_string(TrafficType t) {
  return t == TrafficType::kFullBuffer ? "FB" : "MBB";
}

std::string to_string(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::kMimoFb: return "MIMO-FB";
    case BenchmarkId::kMassiveMimoFb: return "mMIMO-FB";
    case BenchmarkId::kMassiveMimoMbb: return "mMIMO-MBB";
    case BenchmarkId::kMassiveMimoMixed: return "mMIMO-Mixed";
    case BenchmarkId::kHetNetMixed: return "HetNet-Mixed";
  }
  throw ConfigError("unknown benchmark id");
}

BenchmarkId benchmark_from_string(const std::string& name) {
  for (BenchmarkId id : all_benchmarks()) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("unknown benchmark '" + name + "'; expected one of MIMO-FB, mMIMO-FB, mMIMO-MBB, mMIMO-Mixed, HetNet-Mixed");
}

std::vector<BenchmarkId> all_benchmarks() {
  return {BenchmarkId::kMimoFb, BenchmarkId::kMassiveMimoFb, BenchmarkId::kMassiveMimoMbb,
          BenchmarkId::kMassiveMimoMixed, BenchmarkId::kHetNetMixed};
}

int ScenarioConfig::num_cells() const {
  int n = 0;
  for (const auto& s : sites) n += static_cast<int>(s.cells.size());
  return n;
}

const CellConfig* ScenarioConfig::find_cell(int cell_id) const {
  for (const auto& s : sites)
    for (const auto& c : s.cells)
      if (c.cell_id == cell_id) return &c;
  return nullptr;
}

const SiteConfig* ScenarioConfig::site_of_cell(int cell_id) const {
  for (const auto& s : sites)
    for (const auto& c : s.cells)
      if (c.cell_id == cell_id) return &s;
  return nullptr;
}

ScenarioConfig sample_scenario(uint64_t seed, const RandomizationSpace& space) {
  check_space(space);
  Rng rng(hash_seed(seed, stream::kScenario));

  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.duration_ttis = space.duration_ttis;

  // One positional index selects the bandwidth/sub-band/power triple;
  // radius and indoor probability are scenario-wide draws.
  size_t tri = rng.uniform_int(0, space.bandwidth_mhz.size() - 1);
  double radius = rng.pick(space.cell_radius_m);
  double indoor_p = rng.pick(space.indoor_probabilities);

  std::vector<SiteType> types;
  for (int s = 0; s < kSitesPerScenario; ++s) types.push_back(rng.pick(space.site_types));
  cfg.sites = make_sites(kSitesPerScenario, types, radius, space.bandwidth_mhz[tri],
                         space.num_subbands[tri], space.dl_tx_power_w[tri]);

  int n_fb = rng.pick(space.fb_ue_counts);
  int n_mbb = rng.pick(space.mbb_ue_counts);

  UeDrawParams fb{space.fb_speeds_mps, space.ue_antennas, space.receiver_types, indoor_p};
  UeDrawParams mbb{space.mbb_speeds_mps, space.ue_antennas, space.receiver_types, indoor_p};
  for (int i = 0; i < n_fb; ++i)
    cfg.ues.push_back(draw_ue(rng, static_cast<int>(cfg.ues.size()), TrafficType::kFullBuffer, cfg, fb));
  for (int i = 0; i < n_mbb; ++i)
    cfg.ues.push_back(draw_ue(rng, static_cast<int>(cfg.ues.size()), TrafficType::kMbb, cfg, mbb));
  return cfg;
}

ScenarioConfig benchmark_scenario(BenchmarkId id, uint64_t seed) {
  // Fixed desk-scale deployment parameters shared by the pinned
  // benchmarks: mid-range cell geometry and system bandwidth, slow
  // pedestrian UEs, 4-antenna type-0 receivers, 80% indoor.
  constexpr double kRadius = 600.0;
  constexpr double kBw = 50.0;
  constexpr int kSubbands = 133;
  constexpr double kPower = 50.0;
  constexpr double kSpeed = 0.67;
  constexpr double kIndoorP = 0.8;
  constexpr int kDuration = 3000;

  if (id == BenchmarkId::kHetNetMixed) {
    // Randomized heterogeneous deployments: full randomization space,
    // restricted to mixed traffic (MBB count >= 10) and to site draws
    // that actually contain both array types.
    RandomizationSpace space;
    space.mbb_ue_counts = {10, 25, 50, 100, 200, 300};
    space.duration_ttis = kDuration;
    for (uint64_t attempt = 0;; ++attempt) {
      ScenarioConfig cfg = sample_scenario(hash_seed(seed, stream::kScenario, 4u, attempt), space);
      bool has_mimo = false, has_mmimo = false;
      for (const auto& s : cfg.sites) {
        (s.site_type == SiteType::kMimo ? has_mimo : has_mmimo) = true;
      }
      if (has_mimo && has_mmimo) {
        cfg.seed = seed;
        return cfg;
      }
    }
  }

  int num_sites = (id == BenchmarkId::kMassiveMimoMixed) ? 3 : 1;
  SiteType type = (id == BenchmarkId::kMimoFb) ? SiteType::kMimo : SiteType::kMassiveMimo;
  int n_fb = 0, n_mbb = 0;
  switch (id) {
    case BenchmarkId::kMimoFb: n_fb = 6; break;
    case BenchmarkId::kMassiveMimoFb: n_fb = 6; break;
    case BenchmarkId::kMassiveMimoMbb: n_mbb = 90; break;
    case BenchmarkId::kMassiveMimoMixed: n_fb = 5; n_mbb = 60; break;
    case BenchmarkId::kHetNetMixed: break;  // handled above
  }

  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.duration_ttis = kDuration;
  std::vector<SiteType> types(num_sites, type);
  cfg.sites = make_sites(num_sites, types, kRadius, kBw, kSubbands, kPower);

  Rng rng(hash_seed(seed, stream::kScenario, static_cast<uint64_t>(id)));
  UeDrawParams p{{kSpeed}, {4}, {0}, kIndoorP};
  for (int i = 0; i < n_fb; ++i)
    cfg.ues.push_back(draw_ue(rng, static_cast<int>(cfg.ues.size()), TrafficType::kFullBuffer, cfg, p));
  for (int i = 0; i < n_mbb; ++i)
    cfg.ues.push_back(draw_ue(rng, static_cast<int>(cfg.ues.size()), TrafficType::kMbb, cfg, p));
  return cfg;
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
  std::vector<std::string> bad;
  auto flag = [&bad](const std::string& msg) { bad.push_back(msg); };

  if (cfg.sites.empty()) flag("no sites");
  if (cfg.duration_ttis <= 0) flag("duration_ttis must be > 0");
  if (cfg.carrier_freq_ghz != kCarrierFreqGhz) flag("carrier_freq_ghz must be 3.5");
  if (cfg.duplexing != "TDD") flag("duplexing must be TDD");

  // The positional bandwidth/sub-band pairing of the default value sets.
  const RandomizationSpace table;
  std::set<int> site_ids, cell_ids, ue_ids;
  for (const auto& site : cfg.sites) {
    if (!site_ids.insert(site.site_id).second)
      flag("duplicate site_id " + std::to_string(site.site_id));
    if (static_cast<int>(site.cells.size()) != kCellsPerSite)
      flag("site " + std::to_string(site.site_id) + ": expected 3 cells, got " +
           std::to_string(site.cells.size()));
    for (const auto& cell : site.cells) {
      if (!cell_ids.insert(cell.cell_id).second)
        flag("duplicate cell_id " + std::to_string(cell.cell_id));
      if (cell.dl_tx_power_w <= 0)
        flag("cell " + std::to_string(cell.cell_id) + ": dl_tx_power_w must be > 0");
      if (cell.num_subbands < 1)
        flag("cell " + std::to_string(cell.cell_id) + ": num_subbands must be >= 1");
      bool paired = false;
      for (size_t i = 0; i < table.bandwidth_mhz.size(); ++i) {
        if (cell.bandwidth_mhz == table.bandwidth_mhz[i] &&
            cell.num_subbands == table.num_subbands[i])
          paired = true;
      }
      if (!paired)
        flag("cell " + std::to_string(cell.cell_id) + ": unpaired bandwidth/subband (" +
             std::to_string(cell.bandwidth_mhz) + " MHz / " +
             std::to_string(cell.num_subbands) + " PRBs)");
      if (cell.cell_radius_m <= 0)
        flag("cell " + std::to_string(cell.cell_id) + ": cell_radius_m must be > 0");
    }
  }
  for (const auto& ue : cfg.ues) {
    if (!ue_ids.insert(ue.ue_id).second)
      flag("duplicate ue_id " + std::to_string(ue.ue_id));
    if (cell_ids.count(ue.serving_cell_id) == 0)
      flag("ue " + std::to_string(ue.ue_id) + ": dangling serving_cell_id " +
           std::to_string(ue.serving_cell_id));
    if (ue.num_antennas != 2 && ue.num_antennas != 4)
      flag("ue " + std::to_string(ue.ue_id) + ": num_antennas must be 2 or 4");
    if (ue.max_rank != ue.num_antennas)
      flag("ue " + std::to_string(ue.ue_id) + ": max_rank must equal num_antennas");
    if (ue.receiver_type < 0 || ue.receiver_type > 3)
      flag("ue " + std::to_string(ue.ue_id) + ": receiver_type must be 0..3");
    const std::vector<double>& speeds = ue.traffic == TrafficType::kFullBuffer
                                            ? RandomizationSpace{}.fb_speeds_mps
                                            : RandomizationSpace{}.mbb_speeds_mps;
    if (std::find(speeds.begin(), speeds.end(), ue.speed_mps) == speeds.end())
      flag("ue " + std::to_string(ue.ue_id) + ": speed " + std::to_string(ue.speed_mps) +
           " not in the " + to_string(ue.traffic) + " speed set");
  }
  return bad;
}

SiteType site_type_from_string(const std::string& s) {
  if (s == "MIMO") return SiteType::kMimo;
  if (s == "mMIMO") return SiteType::kMassiveMimo;
  throw ConfigError("unknown site_type '" + s + "'");
}

TrafficType traffic_from_string(const std::string& s) {
  if (s == "FB") return TrafficType::kFullBuffer;
  if (s == "MBB") return TrafficType::kMbb;
  throw ConfigError("unknown traffic type '" + s + "'");
}

namespace {

json cell_to_json(const CellConfig& c) {
  return json{{"cell_id", c.cell_id},
              {"azimuth_deg", c.azimuth_deg},
              {"cell_radius_m", c.cell_radius_m},
              {"bandwidth_mhz", c.bandwidth_mhz},
              {"num_subbands", c.num_subbands},
              {"dl_tx_power_w", c.dl_tx_power_w}};
}

CellConfig cell_from_json(const json& j) {
  CellConfig c;
  c.cell_id = j.at("cell_id").get<int>();
  c.azimuth_deg = j.at("azimuth_deg").get<double>();
  c.cell_radius_m = j.at("cell_radius_m").get<double>();
  c.bandwidth_mhz = j.at("bandwidth_mhz").get<double>();
  c.num_subbands = j.at("num_subbands").get<int>();
  c.dl_tx_power_w = j.at("dl_tx_power_w").get<double>();
  return c;
}


}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["seed"] = cfg.seed;
  j["duration_ttis"] = cfg.duration_ttis;
  j["carrier_freq_ghz"] = cfg.carrier_freq_ghz;
  j["duplexing"] = cfg.duplexing;
  j["sites"] = json::array();
  for (const auto& site : cfg.sites) {
    json js{{"site_id", site.site_id},
            {"x_m", site.x_m},
            {"y_m", site.y_m},
            {"site_type", to_string(site.site_type)}};
    js["cells"] = json::array();
    for (const auto& cell : site.cells) js["cells"].push_back(cell_to_json(cell));
    j["sites"].push_back(js);
  }
  j["ues"] = json::array();
  for (const auto& ue : cfg.ues) {
    j["ues"].push_back(json{{"ue_id", ue.ue_id},
                            {"serving_cell_id", ue.serving_cell_id},
                            {"traffic", to_string(ue.traffic)},
                            {"num_antennas", ue.num_antennas},
                            {"max_rank", ue.max_rank},
                            {"speed_mps", ue.speed_mps},
                            {"receiver_type", ue.receiver_type},
                            {"indoor", ue.indoor},
                            {"x_m", ue.x_m},
                            {"y_m", ue.y_m}});
  }
  return j.dump(2) + "\n";
}

ScenarioConfig scenario_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  try {
    int version = j.at("schema_version").get<int>();
    if (version != kScenarioSchemaVersion)
      throw ConfigError("unsupported scenario schema_version " + std::to_string(version));
    ScenarioConfig cfg;
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.duration_ttis = j.at("duration_ttis").get<int>();
    cfg.carrier_freq_ghz = j.at("carrier_freq_ghz").get<double>();
    cfg.duplexing = j.at("duplexing").get<std::string>();
    for (const auto& js : j.at("sites")) {
      SiteConfig site;
      site.site_id = js.at("site_id").get<int>();
      site.x_m = js.at("x_m").get<double>();
      site.y_m = js.at("y_m").get<double>();
      site.site_type = site_type_from_string(js.at("site_type").get<std::string>());
      for (const auto& jc : js.at("cells")) site.cells.push_back(cell_from_json(jc));
      cfg.sites.push_back(site);
    }
    for (const auto& ju : j.at("ues")) {
      UEConfig ue;
      ue.ue_id = ju.at("ue_id").get<int>();
      ue.serving_cell_id = ju.at("serving_cell_id").get<int>();
      ue.traffic = traffic_from_string(ju.at("traffic").get<std::string>());
      ue.num_antennas = ju.at("num_antennas").get<int>();
      ue.max_rank = ju.at("max_rank").get<int>();
      ue.speed_mps = ju.at("speed_mps").get<double>();
      ue.receiver_type = ju.at("receiver_type").get<int>();
      ue.indoor = ju.at("indoor").get<bool>();
      ue.x_m = ju.at("x_m").get<double>();
      ue.y_m = ju.at("y_m").get<double>();
      cfg.ues.push_back(ue);
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario JSON field error: ") + e.what());
  }
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << scenario_to_json(cfg);
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace ranla
