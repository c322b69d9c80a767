#include "squarelab/cli.hpp"

#include <boost/uuid/random_generator.hpp>
#include <boost/uuid/uuid_io.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace squarelab::cli {
namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string param_text(const nlohmann::json& params, const char* key) {
  if (!params.contains(key)) return "";
  const auto& v = params.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

std::string float_text(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

nlohmann::json ExperimentRecord::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["timestamp"] = timestamp;
  j["subcommand"] = subcommand;
  j["params"] = params;
  j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
  nlohmann::json r = nlohmann::json::object();
  for (const auto& [name, v] : results)
    r[name] = {{"exact", v.exact ? nlohmann::json(*v.exact) : nlohmann::json(nullptr)},
               {"float", v.value ? nlohmann::json(*v.value) : nlohmann::json(nullptr)}};
  j["results"] = r;
  j["output"] = output;
  j["version"] = version;
  return j;
}

ExperimentRecord ExperimentRecord::from_json(const nlohmann::json& j) {
  ExperimentRecord r;
  r.id = j.at("id").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.subcommand = j.at("subcommand").get<std::string>();
  r.params = j.at("params");
  if (!r.params.is_object()) throw std::runtime_error("params must be an object");
  if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& [name, v] : j.at("results").items()) {
    ResultValue value;
    if (!v.at("exact").is_null()) value.exact = v.at("exact").get<std::string>();
    if (!v.at("float").is_null()) value.value = v.at("float").get<double>();
    r.results[name] = value;
  }
  r.output = j.at("output");
  r.version = j.at("version").get<std::string>();
  return r;
}

std::string default_ledger_path() {
  if (const char* env = std::getenv("SQUARELAB_LEDGER"); env != nullptr && *env != '\0') return env;
  return "./runs.jsonl";
}

std::string new_uuid() {
  static thread_local boost::uuids::random_generator gen;
  return boost::uuids::to_string(gen());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void Ledger::append(const ExperimentRecord& record) const {
  std::ofstream f(path_, std::ios::app);
  if (!f) throw std::runtime_error("cannot open ledger " + path_);
  f << record.to_json().dump() << '\n';
  f.flush();
  if (!f) throw std::runtime_error("cannot write ledger " + path_);
}

LedgerContents Ledger::read() const {
  LedgerContents out;
  std::ifstream f(path_);
  if (!f) return out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(f, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(ExperimentRecord::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      ++out.warnings;
      out.messages.push_back(path_ + ":" + std::to_string(number) + ": skipped corrupt record (" + e.what() + ")");
    }
  }
  return out;
}

std::string export_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = "id,timestamp,subcommand,objective,resolution,seed,result_name,exact,float\n";
  for (const auto& r : records) {
    const std::string prefix = csv_field(r.id) + "," + csv_field(r.timestamp) + "," + csv_field(r.subcommand) + "," +
                               csv_field(param_text(r.params, "objective")) + "," +
                               csv_field(param_text(r.params, "resolution")) + "," +
                               (r.seed ? std::to_string(*r.seed) : std::string()) + ",";
    for (const auto& [name, v] : r.results)
      out += prefix + csv_field(name) + "," + csv_field(v.exact.value_or("")) + "," +
             (v.value ? float_text(*v.value) : std::string()) + "\n";
  }
  return out;
}

nlohmann::json export_json(const std::vector<ExperimentRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(r.to_json());
  return arr;
}

}  // namespace squarelab::cli
