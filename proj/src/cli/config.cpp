#include "squarelab/cli.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace squarelab::cli {
namespace {

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool mentions(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
}

}  // namespace

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(f, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(number) + ": expected key = value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.starts_with("--")) key.erase(0, 2);
    if (key.empty()) throw std::runtime_error(path + ":" + std::to_string(number) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const std::map<std::string, std::string>& config,
                                      const std::vector<std::string>& flag_names) {
  // The subcommand is the first argument that is not an option or an option value.
  std::size_t insert_at = args.size();
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (!args[i].starts_with("-")) {
      insert_at = i + 1;
      break;
    }
    if (args[i].find('=') == std::string::npos) ++i;  // skip the option's value
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : config) {
    if (key == "config" || mentions(args, key)) continue;
    if (std::find(flag_names.begin(), flag_names.end(), key) != flag_names.end()) {
      if (value == "true" || value == "1") injected.push_back("--" + key);
      else if (value != "false" && value != "0") throw std::runtime_error("flag " + key + " expects true or false");
      continue;
    }
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
  return out;
}

}  // namespace squarelab::cli
