#include "dualdiv/data_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace dualdiv {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void fail(std::string_view source, int line, const std::string& why) {
  std::ostringstream os;
  os << source << ":" << line << ": " << why;
  throw DataError(os.str());
}

// Calls row(fields, line) for every data line.
template <typename Row>
void for_each_row(std::string_view text, std::string_view source, std::size_t columns, Row&& row) {
  int line_no = 0;
  bool first = true;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (;;) {
      const auto comma = line.find(',');
      fields.push_back(trim(line.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      line = line.substr(comma + 1);
    }
    if (fields.size() != columns) {
      fail(source, line_no, "expected " + std::to_string(columns) + " column(s), found " +
                                std::to_string(fields.size()));
    }
    double probe = 0.0;
    if (first && !to_double(fields[0], probe)) {
      first = false;
      continue;  // header
    }
    first = false;
    row(fields, line_no);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read data file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Sample parse_sample_csv(std::string_view text, std::string_view source) {
  Sample out;
  for_each_row(text, source, 1, [&](const std::vector<std::string_view>& f, int line) {
    double v = 0.0;
    if (!to_double(f[0], v)) fail(source, line, "not a finite number: '" + std::string(f[0]) + "'");
    out.push_back(v);
  });
  if (out.empty()) throw DataError(std::string(source) + ": no observations");
  return out;
}

Sample read_sample_csv(const std::string& path) { return parse_sample_csv(read_file(path), path); }

CensoredSample parse_censored_csv(std::string_view text, std::string_view source) {
  std::vector<double> y;
  std::vector<int> delta;
  for_each_row(text, source, 2, [&](const std::vector<std::string_view>& f, int line) {
    double t = 0.0;
    if (!to_double(f[0], t)) fail(source, line, "time is not a finite number: '" + std::string(f[0]) + "'");
    if (f[1] != "0" && f[1] != "1") fail(source, line, "indicator must be 0 or 1, got '" + std::string(f[1]) + "'");
    y.push_back(t);
    delta.push_back(f[1] == "1" ? 1 : 0);
  });
  if (y.empty()) throw DataError(std::string(source) + ": no observations");
  try {
    return CensoredSample(std::move(y), std::move(delta));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string(source) + ": " + e.what());
  }
}

CensoredSample read_censored_csv(const std::string& path) {
  return parse_censored_csv(read_file(path), path);
}

}  // namespace dualdiv
