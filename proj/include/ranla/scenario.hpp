#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ranla {

inline constexpr int kScenarioSchemaVersion = 1;
inline constexpr double kCarrierFreqGhz = 3.5;
inline constexpr int kSitesPerScenario = 3;  // randomized deployments
inline constexpr int kCellsPerSite = 3;      // tri-sector sites

// Bad configuration data (files, flags, out-of-range fields).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SiteType { kMimo = 0, kMassiveMimo = 1 };
enum class TrafficType { kFullBuffer = 0, kMbb = 1 };

std::string to_string(SiteType t);
std::string to_string(TrafficType t);

struct CellConfig {
  int cell_id = 0;
  double azimuth_deg = 0.0;
  double cell_radius_m = 600.0;
  double bandwidth_mhz = 50.0;
  int num_subbands = 133;  // PRBs
  double dl_tx_power_w = 50.0;

  bool operator==(const CellConfig&) const = default;
};

struct SiteConfig {
  int site_id = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  SiteType site_type = SiteType::kMimo;
  std::vector<CellConfig> cells;  // exactly 3 sectors

  bool operator==(const SiteConfig&) const = default;
};

struct UEConfig {
  int ue_id = 0;
  int serving_cell_id = 0;
  TrafficType traffic = TrafficType::kFullBuffer;
  int num_antennas = 4;  // {2, 4}
  int max_rank = 4;      // equals num_antennas
  double speed_mps = 0.67;
  int receiver_type = 0;  // 0..3, modeled as a CQI-measurement SINR offset
  bool indoor = false;
  double x_m = 0.0;
  double y_m = 0.0;

  bool operator==(const UEConfig&) const = default;
};

struct ScenarioConfig {
  uint64_t seed = 0;
  int duration_ttis = 3000;  // 1 TTI = 1 ms
  double carrier_freq_ghz = kCarrierFreqGhz;
  std::string duplexing = "TDD";
  std::vector<SiteConfig> sites;
  std::vector<UEConfig> ues;

  bool operator==(const ScenarioConfig&) const = default;

  int num_cells() const;
  // nullptr when absent.
  const CellConfig* find_cell(int cell_id) const;
  const SiteConfig* site_of_cell(int cell_id) const;
};

/**
 * Value sets for domain randomization. Bandwidth, sub-band count, and
 * DL power are parallel lists selected by one shared index (20 MHz pairs
 * with 20 PRBs and 20 W, ..., 100 MHz with 273 PRBs and 100 W); drawing
 * them independently would produce physically inconsistent cells.
 */
struct RandomizationSpace {
  // Parallel, index-linked triple (one draw selects all three).
  std::vector<double> bandwidth_mhz{20, 40, 50, 80, 100};
  std::vector<int> num_subbands{20, 106, 133, 217, 273};
  std::vector<double> dl_tx_power_w{20, 40, 50, 80, 100};

  std::vector<double> cell_radius_m{166, 300, 600, 900, 1200};
  std::vector<SiteType> site_types{SiteType::kMimo, SiteType::kMassiveMimo};
  std::vector<int> fb_ue_counts{1, 5, 10};
  std::vector<int> mbb_ue_counts{0, 10, 25, 50, 100, 200, 300};
  std::vector<double> fb_speeds_mps{0.67, 10, 15, 30};
  std::vector<double> mbb_speeds_mps{0.67, 1.5, 3};
  std::vector<double> indoor_probabilities{0.2, 0.4, 0.8};
  std::vector<int> ue_antennas{2, 4};
  std::vector<int> receiver_types{0, 1, 2, 3};
  int duration_ttis = 3000;
};

enum class BenchmarkId {
  kMimoFb,
  kMassiveMimoFb,
  kMassiveMimoMbb,
  kMassiveMimoMixed,
  kHetNetMixed,
};

// Canonical names: MIMO-FB, mMIMO-FB, mMIMO-MBB, mMIMO-Mixed, HetNet-Mixed.
std::string to_string(BenchmarkId id);
BenchmarkId benchmark_from_string(const std::string& name);  // throws ConfigError
SiteType site_type_from_string(const std::string& s);        // throws ConfigError
TrafficType traffic_from_string(const std::string& s);       // throws ConfigError
std::vector<BenchmarkId> all_benchmarks();

/**
 * Draw a fully randomized 3-site tri-sector scenario. Pure function of
 * (seed, space): repeated calls yield identical configs.
 */
ScenarioConfig sample_scenario(uint64_t seed, const RandomizationSpace& space = {});

/**
 * Fixed benchmark deployments. Deployment shape, traffic mix, and UE
 * types are pinned per id; only UE drops and (downstream) channel /
 * arrival randomness vary with the seed.
 */
ScenarioConfig benchmark_scenario(BenchmarkId id, uint64_t seed);

// Every invariant violation in the config; empty means valid.
std::vector<std::string> validate(const ScenarioConfig& cfg);

// JSON round trip; load(save(x)) == x and save(load(j)) == j byte-for-byte.
std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const std::string& json_text);  // throws ConfigError
void save_scenario(const ScenarioConfig& cfg, const std::string& path);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace ranla
