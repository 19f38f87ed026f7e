#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coupledpf/types.hpp"

namespace coupledpf::io {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// "# config_hash=<16 hex digits>, seed=<seed>"
std::string provenance_line(std::uint64_t config_hash, std::uint64_t seed);

/// Shortest round-trip decimal form.
std::string format_double(double v);

/// Header y1..yd, one row per time step.
void write_observations_csv(std::ostream& out, const Observations& y);
/// Reads the format above; '#' lines are skipped.
Observations read_observations_csv(std::istream& in);

/// `key = value` lines, `[section]` headers (folded into "section.key"), '#' or ';' comments.
/// Throws InvalidArgument naming the offending line.
std::map<std::string, std::string> parse_ini(std::istream& in);

/// Comma-separated reals.
std::vector<double> parse_doubles(std::string_view text);

}  // namespace coupledpf::io
