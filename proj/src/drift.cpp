#include "ranla/drift.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ranla {

void FeatureStats::add(const StateVector& s) {
  ++count;
  for (int i = 0; i < kStateDim; ++i) {
    double x = static_cast<double>(s[static_cast<size_t>(i)]);
    double delta = x - mean[static_cast<size_t>(i)];
    mean[static_cast<size_t>(i)] += delta / static_cast<double>(count);
    m2[static_cast<size_t>(i)] += delta * (x - mean[static_cast<size_t>(i)]);
  }
}

double FeatureStats::variance(int i) const {
  if (count < 2) return 0.0;
  return m2[static_cast<size_t>(i)] / static_cast<double>(count - 1);
}

double FeatureStats::std_dev(int i) const { return std::sqrt(variance(i)); }

void FeatureStats::merge(const FeatureStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count);
  const double nb = static_cast<double>(other.count);
  for (int i = 0; i < kStateDim; ++i) {
    const size_t k = static_cast<size_t>(i);
    double delta = other.mean[k] - mean[k];
    mean[k] = (na * mean[k] + nb * other.mean[k]) / (na + nb);
    m2[k] += other.m2[k] + delta * delta * na * nb / (na + nb);
  }
  count += other.count;
}

std::string feature_stats_to_json(const FeatureStats& stats) {
  nlohmann::ordered_json j;
  j["count"] = stats.count;
  j["mean"] = stats.mean;
  j["m2"] = stats.m2;
  return j.dump(2) + "\n";
}

FeatureStats feature_stats_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FeatureStats stats;
  stats.count = j.at("count").get<int64_t>();
  auto mean = j.at("mean").get<std::vector<double>>();
  auto m2 = j.at("m2").get<std::vector<double>>();
  if (mean.size() != kStateDim || m2.size() != kStateDim)
    throw std::runtime_error("feature_stats_from_json: wrong feature count");
  for (int i = 0; i < kStateDim; ++i) {
    stats.mean[static_cast<size_t>(i)] = mean[static_cast<size_t>(i)];
    stats.m2[static_cast<size_t>(i)] = m2[static_cast<size_t>(i)];
  }
  return stats;
}

DriftReport drift_check(const std::string& source_id, const FeatureStats& runtime,
                        const FeatureStats& reference) {
  DriftReport report;
  report.source_id = source_id;
  if (runtime.count == 0 || reference.count == 0) return report;
  for (int i = 0; i < kStateDim; ++i) {
    double ref_std = reference.std_dev(i);
    if (ref_std <= 0.0) {
      report.skipped_features.push_back(i);
      continue;
    }
    double z = (runtime.mean[static_cast<size_t>(i)] - reference.mean[static_cast<size_t>(i)]) / ref_std;
    report.z[static_cast<size_t>(i)] = z;
    if (std::abs(z) > kDriftZThreshold) {
      report.drifted_features.push_back(i);
      report.drifted = true;
    }
  }
  return report;
}

}  // namespace ranla
