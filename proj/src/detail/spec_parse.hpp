// Parsing helpers for the textual set specifications.

#pragma once

#include "squarelab/numeric.hpp"

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace squarelab::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline long long parse_int(std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error("malformed integer: " + std::string(text));
  return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Little-endian hex mask: bit i of the number selects element i.
inline std::vector<bool> parse_hex_mask(std::string_view hex, std::size_t size) {
  hex = trim(hex);
  if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
  if (hex.empty()) throw Error("empty mask");
  std::vector<bool> bits(size, false);
  std::size_t bit = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
    const char c = *it;
    int v = 0;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw Error("malformed hex mask");
    for (int b = 0; b < 4; ++b) {
      if (!((v >> b) & 1)) continue;
      if (bit + static_cast<std::size_t>(b) >= size) throw Error("mask has bits beyond set size");
      bits[bit + static_cast<std::size_t>(b)] = true;
    }
  }
  return bits;
}

inline std::string format_hex_mask(const std::vector<bool>& bits) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::size_t base = 0; base < bits.size(); base += 4) {
    int v = 0;
    for (std::size_t b = 0; b < 4 && base + b < bits.size(); ++b)
      if (bits[base + b]) v |= 1 << b;
    out.push_back(kDigits[v]);
  }
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  if (out.empty()) out = "0";
  return "0x" + std::string(out.rbegin(), out.rend());
}

inline std::vector<bool> parse_index_list(std::string_view list, std::size_t size) {
  std::vector<bool> bits(size, false);
  list = trim(list);
  if (list.empty()) return bits;
  for (auto item : split(list, ',')) {
    const long long i = parse_int(item);
    if (i < 0 || static_cast<std::size_t>(i) >= size)
      throw Error("index out of range: " + std::string(trim(item)));
    bits[static_cast<std::size_t>(i)] = true;
  }
  return bits;
}

/// "<list_key>=0,3,7" or "mask=0x89".
inline std::vector<bool> parse_membership(std::string_view spec, std::size_t size,
                                          std::string_view list_key = "leaves") {
  spec = trim(spec);
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) throw Error("malformed set spec: " + std::string(spec));
  const auto key = trim(spec.substr(0, eq));
  const auto value = spec.substr(eq + 1);
  if (key == "mask") return parse_hex_mask(value, size);
  if (key == list_key) return parse_index_list(value, size);
  throw Error("unknown set spec key: " + std::string(key));
}

}  // namespace squarelab::detail
