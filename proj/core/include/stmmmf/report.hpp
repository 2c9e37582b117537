#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "stmmmf/eval.hpp"
#include "stmmmf/selftrain.hpp"

namespace stmmmf {

/// Column header of the cumulative iteration CSV.
inline constexpr const char* kIterationCsvHeader =
    "iter,observed,unobserved,candidates,augmented,refined,overlap,retained_frac,test_mae,"
    "test_rmse";

/// Column header of the per-round baseline CSV.
inline constexpr const char* kRoundsCsvHeader = "round,mae,rmse";

/// One JSON object, no trailing newline.
std::string to_json_line(const IterationReport& report);
std::string to_csv_row(const IterationReport& report);

void write_iteration_csv(std::ostream& out, std::span<const IterationReport> reports);
void write_rounds_csv(std::ostream& out, std::span<const MetricsSnapshot> rounds);

/// Confusion counts plus an HR@0..HR@(R-1) block; '*' where a distance does not exist.
void write_confusion_table(std::ostream& out, const ConfusionMatrix& cm);

}  // namespace stmmmf
