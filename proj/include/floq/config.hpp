#pragma once

// Declarative experiment configuration (key = value sections), orchestration,
// and artifact manifests. Outputs are deterministic for a fixed seed.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace floq {

class ExperimentConfig {
 public:
  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string str(const std::string& key, const std::string& fallback = "") const;
  double num(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Range validation; throws with the offending key.
  void validate() const;

 private:
  std::map<std::string, std::string> kv_;
};

struct RunResult {
  int exit_status = 0;
  std::vector<std::string> artifacts;  // paths, manifest last
};

// Executes the configured experiment, writes artifacts plus a manifest with
// content hashes into the output directory. Partial outputs are removed on
// error.
RunResult run_experiment(const ExperimentConfig& config);

std::string sha256_file(const std::string& path);
std::string format_g17(double v);

}  // namespace floq
