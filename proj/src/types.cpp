#include "swapsim/types.hpp"

#include <cctype>
#include <cstdio>

namespace swapsim {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw ScenarioError("invalid hex digit");
}
}  // namespace

std::string hex(const Bytes32& b) {
  std::string s;
  s.reserve(64);
  for (auto byte : b) {
    s.push_back(kHexDigits[byte >> 4]);
    s.push_back(kHexDigits[byte & 0x0f]);
  }
  return s;
}

std::string hex8(const Bytes32& b) {
  std::string s;
  for (int i = 0; i < 4; ++i) {
    s.push_back(kHexDigits[b[static_cast<std::size_t>(i)] >> 4]);
    s.push_back(kHexDigits[b[static_cast<std::size_t>(i)] & 0x0f]);
  }
  return s;
}

Bytes32 from_hex(const std::string& s) {
  if (s.size() != 64) throw ScenarioError("expected 64 hex chars");
  Bytes32 out{};
  for (std::size_t i = 0; i < 32; ++i) {
    out[i] = static_cast<std::uint8_t>(hex_nibble(s[2 * i]) * 16 + hex_nibble(s[2 * i + 1]));
  }
  return out;
}

Amount parse_amount(const std::string& s) {
  if (s.empty()) throw ScenarioError("empty amount");
  std::size_t i = 0;
  Amount whole = 0;
  bool any = false;
  for (; i < s.size() && s[i] != '.'; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
      throw ScenarioError("bad amount: " + s);
    }
    whole = whole * 10 + (s[i] - '0');
    if (whole > (1LL << 50)) throw ScenarioError("amount too large: " + s);
    any = true;
  }
  Amount frac = 0;
  int frac_digits = 0;
  if (i < s.size()) {  // consume '.'
    for (++i; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])) || frac_digits >= 6) {
        throw ScenarioError("bad amount: " + s);
      }
      frac = frac * 10 + (s[i] - '0');
      ++frac_digits;
      any = true;
    }
  }
  if (!any) throw ScenarioError("bad amount: " + s);
  for (; frac_digits < 6; ++frac_digits) frac *= 10;
  return whole * kCoin + frac;
}

std::string format_amount(Amount a) {
  const bool neg = a < 0;
  if (neg) a = -a;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s%lld.%06lld", neg ? "-" : "",
                static_cast<long long>(a / kCoin), static_cast<long long>(a % kCoin));
  return buf;
}

}  // namespace swapsim
