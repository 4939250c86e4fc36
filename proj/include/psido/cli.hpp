#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "psido/symbols.hpp"

namespace psido::cli {

/// Process exit codes of psido-lab.
enum ExitCode : int {
  kOk = 0,
  /// An enabled check of the experiment failed.
  kCheckFailed = 1,
  /// Parse error, invalid parameter, violated precondition, infeasible budget.
  kInvalidInput = 2,
  kIoError = 3,
  /// A symbol produced a non-finite value.
  kEvaluationError = 4,
  kInternalError = 5,
};

/// "kind:key=value;key=value". Kinds:
///   const:VALUE | const:re=..;im=..      zero
///   bessel:m=..                          <xi>^m
///   wave:m=..                            exp(i<xi>) <xi>^m
///   multiplication:coeffs=c0,c1,..;omega=..;N=..
///   multiplication:smoothness=..;terms=..;omega=..
///   separable:(coeffs=..|smoothness=..;terms=..);omega=..;m=..;N=..
///   variable-bessel:m=..;amplitude=..;omega=..
/// Throws InvalidInput naming the offending field.
Symbol parse_symbol(const std::string& spec);

/// Comma-separated reals; throws InvalidInput on malformed entries.
std::vector<double> parse_list(const std::string& text);

struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double predicted = 0.0;
  std::string detail;
};

/// One row of a sweep table; mirrored to CSV as j_or_t,measured,predicted,ratio,pass.
struct TableRow {
  double j_or_t = 0.0;
  double measured = 0.0;
  double predicted = 0.0;
  double ratio = 0.0;
  bool pass = true;
};

struct Report {
  static constexpr int kSchemaVersion = 1;

  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  /// Name of the table mirrored to CSV, and the table itself.
  std::string table_name;
  std::vector<TableRow> table;
  /// Further results (extra tables, scalars) in JSON only.
  nlohmann::json results = nlohmann::json::object();

  bool passed() const;
  /// timestamp is written verbatim; everything else is a function of the inputs.
  nlohmann::json to_json(const std::string& timestamp) const;
  void write_csv(std::ostream& out) const;
};

/// Writes the JSON report and the CSV table. Throws IoError with the path.
void write_report(const Report& report, const std::optional<std::filesystem::path>& json_path,
                  const std::optional<std::filesystem::path>& csv_path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// Full command-line entry point. Human-readable output goes to `out`,
/// diagnostics to `err`; returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psido::cli
