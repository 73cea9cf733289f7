#pragma once

#include <filesystem>
#include <string>

#include "narid/pipeline.hpp"

namespace narid {

inline constexpr int kReportSchemaVersion = 1;

/// Structured run report (JSON text). Timings are excluded so that the text is
/// reproducible for a fixed configuration.
[[nodiscard]] std::string report_json(const RunReport& r);

/**
 * @brief Verifies that every interval quantity contains its point counterpart.
 *
 * `relative_slack` widens each interval by that fraction of its magnitude to absorb the
 * rounding of the point computation itself.
 * @throws std::logic_error describing the first violation.
 */
void check_containment(const RunReport& r, double relative_slack = 1e-9);

/**
 * @brief Writes report.json, timing.json and the CSV artifacts into `dir`.
 *
 * For a failed run the completed sections are written together with a FAILED marker file.
 * For a successful run containment is asserted before anything is written.
 */
void write_artifacts(const RunReport& r, const std::filesystem::path& dir);

}  // namespace narid
