#include "qdesign/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "qdesign/errors.hpp"

namespace qdesign::reports {

void Report::add_row(Json row) {
  for (const auto& [key, _] : row.items()) {
    if (std::find(columns.begin(), columns.end(), key) == columns.end()) columns.push_back(key);
  }
  rows.push_back(std::move(row));
}

Json to_json(const Report& r) {
  Json j;
  j["report"] = r.name;
  j["summary"] = r.summary;
  j["rows"] = r.rows;
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

std::string format_value(const Json& v) {
  if (v.is_null()) return "-";
  if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
    return buf;
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : " ") + format_value(x);
    return s;
  }
  return v.dump();
}

std::string render_table(const Report& r) {
  std::ostringstream out;
  out << r.name << "\n";
  std::size_t key_width = 0;
  for (const auto& [key, _] : r.summary.items()) key_width = std::max(key_width, key.size());
  for (const auto& [key, value] : r.summary.items()) {
    out << "  " << key << std::string(key_width - key.size(), ' ') << "  " << format_value(value)
        << "\n";
  }
  if (!r.rows.empty()) {
    std::vector<std::size_t> width;
    std::vector<std::vector<std::string>> cells;
    for (const auto& c : r.columns) width.push_back(c.size());
    for (const auto& row : r.rows) {
      std::vector<std::string> line;
      for (std::size_t i = 0; i < r.columns.size(); ++i) {
        const auto it = row.find(r.columns[i]);
        line.push_back(it == row.end() ? "" : format_value(*it));
        width[i] = std::max(width[i], line.back().size());
      }
      cells.push_back(std::move(line));
    }
    auto emit = [&](const std::vector<std::string>& line) {
      std::string s = " ";
      for (std::size_t i = 0; i < line.size(); ++i) {
        s += " ";
        // first column left aligned, numbers right aligned
        if (i == 0) s += line[i] + std::string(width[i] - line[i].size(), ' ');
        else s += std::string(width[i] - line[i].size(), ' ') + line[i];
      }
      while (!s.empty() && s.back() == ' ') s.pop_back();
      out << s << "\n";
    };
    out << "\n";
    emit(r.columns);
    for (const auto& line : cells) emit(line);
  }
  for (const auto& n : r.notes) out << "note: " << n << "\n";
  return out.str();
}

std::string render(const Report& r, bool json) {
  return json ? to_json(r).dump(2) + "\n" : render_table(r);
}

Report budget_report(const loss::LossBudget& b, double omega_q, const std::string& only_key) {
  Report r;
  r.name = "loss budget";
  r.summary["f_q_GHz"] = omega_q / (2.0 * std::numbers::pi) * 1e-9;
  bool found = false;
  for (const auto& row : b.rows()) {
    if (!only_key.empty() && row.key != only_key) continue;
    found = true;
    Json j;
    j["channel"] = row.key;
    j["label"] = row.label;
    j["T1_us"] = loss::round_significant(row.lifetime_us, 2);
    j["rate_per_s"] = row.rate;
    r.add_row(std::move(j));
  }
  if (!found) throw DomainError("no budget row named '" + only_key + "'");
  return r;
}

}  // namespace qdesign::reports
