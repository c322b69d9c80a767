// Command-line front end: subcommands, the JSON-lines experiment ledger and
// its export.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace squarelab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailed = 1;
inline constexpr int kExitUsage = 2;

struct ResultValue {
  std::optional<std::string> exact;
  std::optional<double> value;
};

struct ExperimentRecord {
  std::string id;
  std::string timestamp;
  std::string subcommand;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::map<std::string, ResultValue> results;
  /// The JSON printed on stdout.
  nlohmann::json output;
  std::string version;

  nlohmann::json to_json() const;
  /// Throws nlohmann::json::exception or std::runtime_error on malformed input.
  static ExperimentRecord from_json(const nlohmann::json& j);
  friend bool operator==(const ExperimentRecord& a, const ExperimentRecord& b) { return a.to_json() == b.to_json(); }
};

/// $SQUARELAB_LEDGER, or ./runs.jsonl.
std::string default_ledger_path();
std::string new_uuid();
/// e.g. 2026-10-15T08:30:00Z
std::string utc_timestamp();

struct LedgerContents {
  std::vector<ExperimentRecord> records;
  std::size_t warnings = 0;
  std::vector<std::string> messages;
};

class Ledger {
 public:
  explicit Ledger(std::string path) : path_(std::move(path)) {}
  const std::string& path() const { return path_; }
  /// One line, flushed before returning.
  void append(const ExperimentRecord& record) const;
  /// Corrupt lines are skipped and counted. A missing file reads as empty.
  LedgerContents read() const;

 private:
  std::string path_;
};

/// id,timestamp,subcommand,objective,resolution,seed,result_name,exact,float
std::string export_csv(const std::vector<ExperimentRecord>& records);
nlohmann::json export_json(const std::vector<ExperimentRecord>& records);

/// Flat `key = value` lines; '#' starts a comment. Throws std::runtime_error.
std::map<std::string, std::string> read_config(const std::string& path);
/// Inserts `--key value` after the subcommand for every key not already on
/// the command line. "true" / "false" values toggle bare flags.
std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const std::map<std::string, std::string>& config,
                                      const std::vector<std::string>& flag_names);

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace squarelab::cli
