#include "qdesign/spectroscopy_csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdesign/errors.hpp"

namespace qdesign::fit {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

SpectroscopyDataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw DomainError(source + ": empty file, no header row");

  int col_bias = -1, col_freq = -1, col_weight = -1, col_order = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& h = header[i];
    const int idx = static_cast<int>(i);
    if (h == "bias_mA") col_bias = idx;
    else if (h == "freq_GHz") col_freq = idx;
    else if (h == "weight") col_weight = idx;
    else if (h == "m") col_order = idx;
    else throw ParseError(source + ": unknown column '" + h + "'", {line_no});
  }
  if (col_bias < 0 || col_freq < 0)
    throw ParseError(source + ": header must name bias_mA and freq_GHz", {line_no});

  SpectroscopyDataset data;
  std::vector<std::size_t> bad;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    SpectroscopyPoint p;
    bool ok = cells.size() == header.size() &&
              parse_double(cells[col_bias], p.bias_ma) &&
              parse_double(cells[col_freq], p.freq_ghz) && p.freq_ghz > 0.0;
    if (ok && col_weight >= 0)
      ok = parse_double(cells[col_weight], p.weight) && p.weight > 0.0;
    if (ok && col_order >= 0) {
      double m = 0.0;
      ok = parse_double(cells[col_order], m) && m >= 1.0 && m == std::floor(m) && m < 100.0;
      p.order = static_cast<int>(m);
    }
    if (ok)
      data.points.push_back(p);
    else
      bad.push_back(line_no);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << source << ": malformed or non-finite rows at line";
    if (bad.size() > 1) msg << "s";
    for (std::size_t i = 0; i < bad.size(); ++i) msg << (i ? ", " : " ") << bad[i];
    throw ParseError(msg.str(), bad);
  }
  if (data.points.empty()) throw DomainError(source + ": no data rows");
  return data;
}

SpectroscopyDataset ingest_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_csv(in, path);
}

void write_csv(std::ostream& out, const SpectroscopyDataset& data) {
  out << "bias_mA,freq_GHz,weight,m\n";
  char buf[128];
  for (const auto& p : data.points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", p.bias_ma, p.freq_ghz,
                  p.weight, p.order);
    out << buf;
  }
}

void write_csv(const std::string& path, const SpectroscopyDataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out, data);
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace qdesign::fit
