#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ranla {

/**
 * Provenance record written to <outdir>/manifest.json before a command
 * does any work, then finalized with the end timestamp and the list of
 * produced files. Guarantees every output directory identifies the code
 * revision, command, and seed that produced it.
 */
struct RunManifest {
  std::string command;
  std::string git_sha;
  uint64_t seed = 0;
  std::string config_path;  // empty when the command takes no config file
  std::string outdir;
  std::string started_at;   // ISO 8601 UTC
  std::string finished_at;  // empty until finalized
  std::vector<std::string> outputs;
};

std::string iso8601_utc_now();

// Serializes and writes <outdir>/manifest.json; returns the path.
std::string write_manifest(const RunManifest& manifest);

}  // namespace ranla
