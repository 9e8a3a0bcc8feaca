#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "qdesign/loss_budget.hpp"

namespace qdesign::reports {

using Json = nlohmann::ordered_json;

// One report, two views: to_json() is the machine contract and
// render_table() prints the same fields for people.
struct Report {
  std::string name;
  Json summary = Json::object();
  std::vector<std::string> columns;
  Json rows = Json::array();
  std::vector<std::string> notes;

  void add_row(Json row);
};

Json to_json(const Report& r);
std::string render_table(const Report& r);
std::string render(const Report& r, bool json);

/// %.6g, with integers printed without a decimal point.
std::string format_value(const Json& v);

/// Table-style rows: lifetimes at two significant figures, rates exact.
Report budget_report(const loss::LossBudget& b, double omega_q, const std::string& only_key = "");

}  // namespace qdesign::reports
