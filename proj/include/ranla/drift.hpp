#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ranla/features.hpp"

namespace ranla {

/** Streaming per-feature mean/variance (Welford) over state vectors. */
struct FeatureStats {
  int64_t count = 0;
  std::array<double, kStateDim> mean{};
  std::array<double, kStateDim> m2{};

  void add(const StateVector& s);
  double variance(int i) const;
  double std_dev(int i) const;
  void merge(const FeatureStats& other);
};

std::string feature_stats_to_json(const FeatureStats& stats);
FeatureStats feature_stats_from_json(const std::string& text);

/**
 * Per-feature mean-shift check of runtime inputs against the training
 * reference: z_i = (mean_runtime_i - mean_ref_i) / ref_std_i. Any |z| > 4
 * marks the source as drifted. Features whose reference deviation is zero
 * are skipped and reported rather than divided by.
 */
struct DriftReport {
  std::string source_id;
  std::array<double, kStateDim> z{};
  std::vector<int> skipped_features;
  std::vector<int> drifted_features;
  bool drifted = false;
};

inline constexpr double kDriftZThreshold = 4.0;

DriftReport drift_check(const std::string& source_id, const FeatureStats& runtime,
                        const FeatureStats& reference);

}  // namespace ranla
