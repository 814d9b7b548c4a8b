#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dualdiv/harness.hpp"

namespace dualdiv {

/// Malformed configuration; the message names the field (and line).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConfigEntry {
  std::string value;
  int line;
};
using ConfigMap = std::map<std::string, ConfigEntry, std::less<>>;

/// Flat "key = value" lines; '#' starts a comment, blank lines are skipped.
/// Duplicate keys and lines without '=' are errors.
ConfigMap parse_config(std::string_view text, std::string_view source = "config");
ConfigMap read_config_file(const std::string& path);

/// Sets one SimConfig field from text. Returns false for keys that are not
/// SimConfig fields; throws ConfigError on malformed values.
bool set_config_value(SimConfig& cfg, std::string_view key, std::string_view value);

/// Applies every entry; keys outside SimConfig must be listed in `extra_keys`.
void apply_config(const ConfigMap& entries, SimConfig& cfg,
                  const std::vector<std::string>& extra_keys = {});

std::vector<double> parse_double_list(std::string_view text, std::string_view field);
std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view field);
double parse_double(std::string_view text, std::string_view field);
long long parse_integer(std::string_view text, std::string_view field);

/// "<eps>,dirac,<x>" or "<eps>,<model>,<p1>[,<p2>]", e.g. "0.2,exponential,0.2".
ContaminationSpec parse_contamination(std::string_view text);
std::string format_contamination(const ContaminationSpec& c);
/// "<model>,<p1>[,<p2>]", e.g. "exponential,0.1111111111".
CensoringSpec parse_censoring(std::string_view text);
std::string format_censoring(const CensoringSpec& c);

std::string format_double_list(const std::vector<double>& values);
std::string format_params(const Params& p);

}  // namespace dualdiv
