#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace menos {

struct InvariantResult {
  std::string module;
  std::string name;
  bool passed;
  double value;      // worst observed deviation (or ratio, see detail)
  double threshold;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::optional<Eigen::Matrix4d> weight_matrix;  // replaces the built-in HG weights
  std::size_t random_instances = 20;
  std::size_t oracle_samples = 10000;
  int workers = 0;
};

std::vector<InvariantResult> run_verify(const VerifyOptions& options = {});

bool all_passed(const std::vector<InvariantResult>& results);
nlohmann::json verify_report(const std::vector<InvariantResult>& results, const VerifyOptions& options);

}  // namespace menos
