#include "ranla/manifest.hpp"

#include <ctime>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace ranla {

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string write_manifest(const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["command"] = manifest.command;
  j["git_sha"] = manifest.git_sha;
  j["seed"] = manifest.seed;
  j["config_path"] = manifest.config_path;
  j["outdir"] = manifest.outdir;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["outputs"] = manifest.outputs;

  std::string path = manifest.outdir + "/manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write_manifest: write failed for " + path);
  return path;
}

}  // namespace ranla
