#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "sepcp/report.hpp"
#include "sepcp/sepfpca.hpp"

namespace sepcp::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kValidation = 2, kDegenerate = 3, kIo = 4 };

/// Runs the tool with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Projected scores of one input: CSV scores are used as-is; F4DS series are
/// detrended, then projected on `shared` or on a basis estimated from the series.
ScoreMatrix load_scores(const std::filesystem::path& input, const PipelineConfig& cfg,
                        const SeparableBasis* shared, std::vector<std::string>& warnings);

/// Single-subject pipeline used by both `test` and `cohort`.
ChangePointReport test_subject(const std::filesystem::path& input, const PipelineConfig& cfg,
                               const std::string& subject, const SeparableBasis* shared);

/// Subject id of an input path (file name without extension).
std::string subject_id(const std::filesystem::path& input);

/// Inputs of a cohort directory (*.f4ds and *.csv), sorted by file name.
std::vector<std::filesystem::path> cohort_inputs(const std::filesystem::path& dir);

}  // namespace sepcp::cli
