#pragma once

#include "updown/rational.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace updown::io {

/// Writes to a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Exact grid: "v", "v1,v2,...", or "start..end:step" (step > 0, end inclusive).
/// Values use parse_rational, so decimals are read exactly.
std::vector<Rational> parse_rational_grid(std::string_view text);

/// Integer grid with the same syntax; "start..end" steps by 1.
std::vector<long> parse_integer_grid(std::string_view text);

/// Grid point given as text (for output) and its value.
struct GridPoint {
    std::string label;
    std::string value;  // decimal or rational literal, exact for linear grids
};

/// Like parse_rational_grid, and additionally "start..end" (no step) for 50 log-spaced
/// points or "start..end*N" for N log-spaced points (both need 0 < start < end).
std::vector<GridPoint> parse_real_grid(std::string_view text);

/// Subcommand, echoed configuration, seed, version and written files. Output paths are
/// stored relative to the manifest's directory so that identical runs into different
/// directories give identical manifests. Timings go to a separate file.
struct RunManifest {
    std::string subcommand;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::uint64_t master_seed = 0;
    std::string tool_version;
    std::vector<std::filesystem::path> outputs;

    std::string to_json(const std::filesystem::path& manifest_path) const;
    void write(const std::filesystem::path& manifest_path) const;
};

/// "<project version>+<git describe>" as configured at build time.
std::string tool_version();

}  // namespace updown::io
