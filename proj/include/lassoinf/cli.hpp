#pragma once

#include "lassoinf/seltests.hpp"
#include "lassoinf/simlab.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lassoinf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Invalid or incomplete configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : "field '" + field + "': " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Output could not be produced (unwritable path, non-finite value); exit code 3.
class EmissionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Command { path, test, experiment };
enum class ExperimentKind { screening, qq, fdr, equicorr };

std::string_view to_string(Command c);
std::string_view to_string(ExperimentKind k);

struct RunConfig {
    Command command = Command::path;
    std::optional<ExperimentKind> experiment;
    DesignSpec design;
    SignalSpec signal;
    double sigma = 1.0;
    double alpha = 0.05;
    std::size_t reps = 0;
    std::size_t steps = 0;  // 0: command default
    std::uint64_t seed = 1;
    std::string output_path = ".";
    std::vector<TestMethod> methods;
    std::size_t n_mc = 1000;
    std::vector<std::size_t> k_grid;
    std::vector<double> beta_min_grid;
    std::size_t threads = 1;
    std::string cov_rate = "one";  // "one" (incremental null) or "step" (rate = k)
    std::optional<std::string> data_path;
};

/// Validates a JSON document against the run schema. Throws ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc);

/// Resolved configuration, suitable for the JSON sidecar.
nlohmann::json to_json(const RunConfig& config);

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

using CsvCell = std::variant<std::int64_t, double, std::string>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;
};

/// 17 significant digits, locale independent; parses back to the same double.
/// Throws EmissionError for NaN and infinities.
std::string format_real(double value);

/// Header row plus one line per record; fields quoted per RFC 4180, lines end in LF.
std::string render_csv(const CsvTable& table);

/// Writes `content` to a temporary sibling and renames it over `target`.
void write_atomic(const std::filesystem::path& target, std::string_view content);

void emit_csv(const CsvTable& table, const std::filesystem::path& target);

// ---------------------------------------------------------------------------

/// Full command-line entry point. Diagnostics go to `err`; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lassoinf::cli
