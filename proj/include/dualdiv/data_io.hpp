#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "dualdiv/censoring.hpp"
#include "dualdiv/models.hpp"

namespace dualdiv {

/// Unreadable or malformed data file; the message carries "source:line".
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One numeric column. Blank lines and '#' comments are skipped, and a
/// non-numeric first line is taken as a header.
Sample parse_sample_csv(std::string_view text, std::string_view source = "data");
Sample read_sample_csv(const std::string& path);

/// Two columns: time, indicator (1 = death observed, 0 = censored).
CensoredSample parse_censored_csv(std::string_view text, std::string_view source = "data");
CensoredSample read_censored_csv(const std::string& path);

}  // namespace dualdiv
