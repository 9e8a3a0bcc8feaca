#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qdesign/config.hpp"

namespace qdesign::verification {

struct Check {
  bool pass = false;
  std::string text;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  std::vector<std::string> info;  // reported, never gating

  bool pass() const;
};

/// Runs criteria 1 to 14. Geometry comes from the config; every other input
/// and tolerance is fixed here. `on_result` fires as each criterion ends.
std::vector<CriterionResult> run_acceptance(
    const config::ToolkitConfig& cfg,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3  title: check; check" on one line.
std::string format_line(const CriterionResult& r);

}  // namespace qdesign::verification
