#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resdim/types.hpp"

namespace resdim {

// --- case files -------------------------------------------------------------
// A case is one JSON document with sections zones/nodes/lines/generators/
// wind/loads/options (plus an optional top-level "name"). Entities reference
// each other by id; the parser resolves ids to indices. Malformed text raises
// ParseError with a line/column location, structural problems raise
// SchemaError naming the offending section or field ("generators[2].capacity:
// missing"), and rule violations on well-formed data raise ValidationError.
// serialize_case emits shortest-round-trip numbers so load(serialize(x)) == x
// field for field.
SystemCase parse_case(const std::string& text, const std::string& source = "<text>");
SystemCase load_case(const std::filesystem::path& path);
std::string serialize_case(const SystemCase& sys);
void save_case(const std::filesystem::path& path, const SystemCase& sys);

// --- scenario files ----------------------------------------------------------
// Delimited text: header `scenario,probability,<farm id>,...`, one row per
// scenario. Blank lines and lines starting with '#' are skipped. Probabilities
// must sum to 1 within 1e-6 and are renormalized to a unit sum; a worse
// mismatch or a negative entry raises ValidationError. The case-aware overloads
// reorder the farm columns into case order and reject missing/unknown farms.
ScenarioSet parse_scenarios(const std::string& text, const std::string& source = "<text>");
ScenarioSet parse_scenarios(const std::string& text, const SystemCase& sys,
                            const std::string& source = "<text>");
ScenarioSet load_scenarios(const std::filesystem::path& path);
ScenarioSet load_scenarios(const std::filesystem::path& path, const SystemCase& sys);
std::string serialize_scenarios(const ScenarioSet& scenarios);
void save_scenarios(const std::filesystem::path& path, const ScenarioSet& scenarios);

// --- digests & run directories ----------------------------------------------
// FNV-1a, 64-bit; digest_hex renders the hash as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);

// Collects the artifacts of one run under a single directory and records a
// content digest per file; finalize() writes `manifest.txt` with one
// "<digest>  <name>" line per artifact (sorted by name), so identical inputs
// can be checked to produce byte-identical outputs.
class RunDirectory {
public:
    explicit RunDirectory(std::filesystem::path dir);
    const std::filesystem::path& path() const { return dir_; }
    std::filesystem::path write(const std::string& name, const std::string& content);
    void finalize();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::string, std::string>> entries_; // name -> digest
};

// Root under which run directories are created: $RESDIM_RUN_DIR if set and
// non-empty, otherwise "runs".
std::filesystem::path run_root();

// Sectioned delimited report of a full sequential-market outcome: costs,
// zonal requirements, reserve schedule, day-ahead dispatch, per-scenario
// real-time cost.
void write_outcome_report(std::ostream& os, const SystemCase& sys, const ScenarioSet& scenarios,
                          const MarketOutcome& outcome);

} // namespace resdim
