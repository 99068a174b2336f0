#ifndef BBR_FORMAT_HPP
#define BBR_FORMAT_HPP

#include <cstdio>
#include <string>

namespace bbr {

/// Shortest decimal that round-trips a double exactly (%.17g is always
/// sufficient; try %.15g and %.16g first to keep files readable).
inline std::string format_double_roundtrip(double v) {
  char buf[40];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  return buf;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

inline std::string format_sig(double v, int digits = 6) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace bbr

#endif  // BBR_FORMAT_HPP
