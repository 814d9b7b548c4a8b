#include "dualdiv/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dualdiv {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s = s.substr(pos + 1);
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view field, std::string_view value, std::string_view why) {
  throw ConfigError("field '" + std::string(field) + "': " + std::string(why) + " (got '" +
                    std::string(value) + "')");
}

}  // namespace

ConfigMap parse_config(std::string_view text, std::string_view source) {
  ConfigMap out;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    std::ostringstream where;
    where << source << ":" << line_no << ": ";
    if (eq == std::string_view::npos) {
      throw ConfigError(where.str() + "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(where.str() + "empty key");
    if (value.empty()) throw ConfigError(where.str() + "field '" + key + "' has no value");
    if (out.count(key)) throw ConfigError(where.str() + "duplicate field '" + key + "'");
    out.emplace(key, ConfigEntry{value, line_no});
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

double parse_double(std::string_view text, std::string_view field) {
  text = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    bad_value(field, text, "expected a number");
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view field) {
  text = trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    bad_value(field, text, "expected an integer");
  }
  return v;
}

std::vector<double> parse_double_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  for (auto tok : split(text, ',')) out.push_back(parse_double(tok, field));
  return out;
}

std::vector<std::size_t> parse_size_list(std::string_view text, std::string_view field) {
  std::vector<std::size_t> out;
  for (auto tok : split(text, ',')) {
    const long long v = parse_integer(tok, field);
    if (v < 1) bad_value(field, tok, "sizes must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

namespace {

Params params_from(const std::vector<std::string_view>& toks, std::size_t first, const ModelSpec& m,
                   std::string_view field, std::string_view text) {
  if (toks.size() - first != static_cast<std::size_t>(m.dim())) {
    bad_value(field, text, "wrong number of parameters for " + m.name());
  }
  Params p(m.dim());
  for (int i = 0; i < m.dim(); ++i) p[i] = parse_double(toks[first + static_cast<std::size_t>(i)], field);
  if (!m.valid(p)) bad_value(field, text, "parameters outside the domain of " + m.name());
  return p;
}

ModelSpec model_from(std::string_view text, std::string_view field) {
  try {
    return ModelSpec::parse(text);
  } catch (const std::invalid_argument& e) {
    bad_value(field, text, e.what());
  }
}

}  // namespace

ContaminationSpec parse_contamination(std::string_view text) {
  const auto toks = split(text, ',');
  if (toks.size() < 3) bad_value("contamination", text, "expected '<eps>,dirac,<x>' or '<eps>,<model>,<params>'");
  const double eps = parse_double(toks[0], "contamination");
  if (!(eps >= 0.0 && eps <= 1.0)) bad_value("contamination", text, "eps must lie in [0, 1]");
  if (toks[1] == "dirac") {
    if (toks.size() != 3) bad_value("contamination", text, "dirac takes one location");
    return {eps, DiracAt{parse_double(toks[2], "contamination")}};
  }
  const ModelSpec m = model_from(toks[1], "contamination");
  return {eps, ModelContaminant{m, params_from(toks, 2, m, "contamination", text)}};
}

std::string format_contamination(const ContaminationSpec& c) {
  std::ostringstream os;
  os << format_double_list({c.eps}) << ",";
  if (const auto* d = std::get_if<DiracAt>(&c.contaminant)) {
    os << "dirac," << format_double_list({d->location});
  } else {
    const auto& mc = std::get<ModelContaminant>(c.contaminant);
    os << mc.model.name() << "," << format_params(mc.params);
  }
  return os.str();
}

CensoringSpec parse_censoring(std::string_view text) {
  const auto toks = split(text, ',');
  if (toks.size() < 2) bad_value("censoring", text, "expected '<model>,<params>'");
  const ModelSpec m = model_from(toks[0], "censoring");
  return {m, params_from(toks, 1, m, "censoring", text)};
}

std::string format_censoring(const CensoringSpec& c) {
  return c.model.name() + "," + format_params(c.params);
}

std::string format_double_list(const std::vector<double>& values) {
  // shortest text that reads back to the same double
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    const auto res = std::to_chars(buf, buf + sizeof buf, values[i]);
    out.append(buf, res.ptr);
  }
  return out;
}

std::string format_params(const Params& p) {
  return format_double_list(std::vector<double>(p.data(), p.data() + p.size()));
}

bool set_config_value(SimConfig& cfg, std::string_view key, std::string_view value) {
  auto positive_int = [&](std::string_view field) {
    const long long v = parse_integer(value, field);
    if (v < 1) bad_value(field, value, "must be >= 1");
    return static_cast<int>(v);
  };
  if (key == "model") {
    cfg.model = model_from(value, "model");
    if (cfg.true_params.size() != 0 && !cfg.model.valid(cfg.true_params)) cfg.true_params = Params();
  } else if (key == "true_params") {
    const auto vals = parse_double_list(value, "true_params");
    Params p(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) p[static_cast<Eigen::Index>(i)] = vals[i];
    cfg.true_params = p;
  } else if (key == "gammas") {
    cfg.gammas = parse_double_list(value, "gammas");
  } else if (key == "sample_sizes") {
    cfg.sample_sizes = parse_size_list(value, "sample_sizes");
  } else if (key == "reps") {
    cfg.reps = positive_int("reps");
  } else if (key == "B") {
    cfg.B = positive_int("B");
  } else if (key == "scheme") {
    try {
      cfg.scheme = WeightScheme::parse(value);
    } catch (const std::invalid_argument& e) {
      bad_value("scheme", value, e.what());
    }
  } else if (key == "level") {
    cfg.level = parse_double(value, "level");
  } else if (key == "interval") {
    try {
      cfg.interval = parse_interval_kind(value);
    } catch (const std::invalid_argument& e) {
      bad_value("interval", value, e.what());
    }
  } else if (key == "escort") {
    try {
      cfg.escort = parse_escort(value);
    } catch (const std::invalid_argument& e) {
      bad_value("escort", value, e.what());
    }
  } else if (key == "contamination") {
    if (value == "none") cfg.contamination.reset();
    else cfg.contamination = parse_contamination(value);
  } else if (key == "censoring") {
    if (value == "none") cfg.censoring.reset();
    else cfg.censoring = parse_censoring(value);
  } else if (key == "seed") {
    const long long v = parse_integer(value, "seed");
    if (v < 0) bad_value("seed", value, "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(v);
  } else if (key == "threads") {
    cfg.threads = positive_int("threads");
  } else if (key == "mse_target") {
    if (value == "bootstrap") cfg.mse_target = MseTarget::bootstrap;
    else if (value == "point") cfg.mse_target = MseTarget::point;
    else bad_value("mse_target", value, "expected 'bootstrap' or 'point'");
  } else if (key == "kl_convention") {
    if (value == "exact") cfg.kl_convention = KlConvention::exact;
    else if (value == "printed") cfg.kl_convention = KlConvention::printed;
    else bad_value("kl_convention", value, "expected 'exact' or 'printed'");
  } else {
    return false;
  }
  return true;
}

void apply_config(const ConfigMap& entries, SimConfig& cfg, const std::vector<std::string>& extra_keys) {
  // model first so that true_params is checked against the right family
  if (auto it = entries.find("model"); it != entries.end()) set_config_value(cfg, "model", it->second.value);
  for (const auto& [key, entry] : entries) {
    if (key == "model") continue;
    bool known = false;
    try {
      known = set_config_value(cfg, key, entry.value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(entry.line) + ": " + e.what());
    }
    if (!known && std::find(extra_keys.begin(), extra_keys.end(), key) == extra_keys.end()) {
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace dualdiv
