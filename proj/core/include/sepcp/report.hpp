#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sepcp/bootstrap.hpp"
#include "sepcp/cpstat.hpp"

namespace sepcp {

using ConfigValue = std::variant<bool, std::int64_t, double, std::string, std::vector<std::int64_t>,
                                 std::vector<double>>;
/// Ordered key/value echo of the configuration that produced a report.
using ConfigEcho = std::vector<std::pair<std::string, ConfigValue>>;

struct AnalysisOptions {
    BootstrapConfig bootstrap;
    std::vector<double> alphas{0.01, 0.05, 0.10};
    /// Drop zero-variance components instead of failing.
    bool drop_degenerate = false;
};

/// Everything known about one subject after testing.
struct ChangePointReport {
    std::string subject;
    std::size_t n = 0;
    std::size_t d = 0;
    StatisticKind kind = StatisticKind::sum_a;
    StatisticValue sum;
    StatisticValue max;
    EpidemicEstimate estimate;
    std::vector<std::vector<std::size_t>> labels;
    LongRunVariance long_run;
    std::vector<std::size_t> dropped_components;
    BootstrapDistribution distribution;
    std::vector<std::pair<double, double>> critical_values;  ///< (alpha, c*(alpha))
    std::vector<std::string> warnings;
    ConfigEcho config;

    const StatisticValue& statistic() const { return kind == StatisticKind::sum_a ? sum : max; }
    double p_value() const { return distribution.p_value(); }
};

/// Statistics, estimate, and bootstrap distribution for one subject's scores.
/// Uses opts.bootstrap.seed directly; derive subject-specific seeds with subject_seed.
ChangePointReport analyze_scores(const ScoreMatrix& scores, const AnalysisOptions& opts, std::string subject);

/// Seed of a subject's bootstrap streams, derived from the run seed and subject id.
std::uint64_t subject_seed(std::uint64_t seed, const std::string& subject);

/// Report as pretty-printed JSON (deterministic: no timestamps).
std::string to_json(const ChangePointReport& report);
void write_report(const std::filesystem::path& path, const ChangePointReport& report);

/// Sorted bootstrap replicates as a one-column CSV (`replicate,value`).
void write_replicates_csv(const std::filesystem::path& path, const BootstrapDistribution& dist);

/// Alpha label as used in report keys, e.g. 0.05 -> "0.05", 0.1 -> "0.10".
std::string alpha_label(double alpha);

}  // namespace sepcp
