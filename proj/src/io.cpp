#include "coupledpf/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace coupledpf::io {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash));
  return "# config_hash=" + std::string(buf) + ", seed=" + std::to_string(seed);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
    throw InvalidArgument("not a number: '" + t + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_doubles(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_double(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_observations_csv(std::ostream& out, const Observations& y) {
  const Matrix& m = y.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << "y" << (j + 1);
  out << '\n';
  for (Eigen::Index t = 0; t < m.rows(); ++t) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(t, j));
    out << '\n';
  }
}

Observations read_observations_csv(std::istream& in) {
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header) {
      header = true;
      if (t[0] == 'y') continue;
    }
    try {
      rows.push_back(parse_doubles(t));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("observations line " + std::to_string(lineno) + ": " + e.what());
    }
    if (rows.back().size() != rows.front().size()) {
      throw InvalidArgument("observations line " + std::to_string(lineno) + ": wrong column count");
    }
  }
  detail::require(!rows.empty(), "observations: no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < rows[t].size(); ++j) {
      m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = rows[t][j];
    }
  }
  return Observations(std::move(m));
}

std::map<std::string, std::string> parse_ini(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw InvalidArgument("config line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

}  // namespace coupledpf::io
