#pragma once

#include "ouk/common.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace ouk {

// Experiment harness: validated configs in, CSV tables plus a structured
// summary with verdicts out. Hard assertions drive the exit status; fitted
// constants are informational.

struct RunResult {
  int status = 0;  // 0 pass, 1 suite assertion failed, 2 config error
  std::string summary_path;
  std::vector<std::string> failures;  // named failing invariants
};

/// Validate a config object: schema-checked, unknown keys rejected, defaults
/// materialized into the returned effective config. Throws Error on schema
/// violations.
nlohmann::json validate_config(const nlohmann::json& config);

/// Execute the configured suite, writing artifacts under out_dir.
RunResult run_suite(const nlohmann::json& config, const std::string& out_dir);

/// Stable catalog of built-in models, field functions and source terms.
std::string list_builtins();

}  // namespace ouk
