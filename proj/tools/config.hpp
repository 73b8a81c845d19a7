#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sepcp/cpstat.hpp"
#include "sepcp/model.hpp"
#include "sepcp/population.hpp"
#include "sepcp/report.hpp"

namespace sepcp::cli {

/// Plain `key = value` document; `#` starts a comment. Keys are unique.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);
KeyValues read_key_values(const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& text, char sep = ',');

/// Settings shared by the test, basis, cohort and density subcommands.
struct PipelineConfig {
    std::vector<std::size_t> d_per_axis{4};  ///< one entry is broadcast to every axis
    int detrend_order = 3;                   ///< negative disables detrending
    StatisticKind kind = StatisticKind::sum_a;
    Alternative alternative = Alternative::epidemic;
    std::size_t replicates = 1000;
    std::size_t block_length = 0;            ///< 0: round(n^(1/3))
    ReplicateStudentizer studentizer = ReplicateStudentizer::block;
    std::vector<double> alphas{0.01, 0.05, 0.10};
    double fdr_q = 0.05;
    std::uint64_t seed = 0;
    std::string kde_preset = "silverman";    ///< or "paper-defaults"
    KernelType kernel = KernelType::gaussian;
    BoundaryMode boundary = BoundaryMode::none;
    std::size_t grid_points = 201;
    bool drop_degenerate = false;
    unsigned threads = 0;

    /// Applies recognized keys; unknown keys are a ValidationError.
    void apply(const KeyValues& kv);
    void validate() const;
    std::vector<std::size_t> resolved_d(std::size_t rank) const;
    AnalysisOptions analysis_options(std::uint64_t bootstrap_seed) const;
    ConfigEcho echo() const;
};

/// Parameters of the synthetic cohort written by `simulate`.
struct SimulationConfig {
    std::vector<std::size_t> grid{8, 8, 4};
    std::size_t n = 120;
    std::size_t subjects = 1;
    std::uint64_t seed = 0;
    NoiseProcess process = NoiseProcess::ar1;
    double coefficient = 0.4;
    std::vector<std::size_t> latent{4, 4, 4};
    double sd_decay = 0.8;        ///< channel sd = sd_decay^(sum of frequencies)
    double mean_level = 0.0;
    ChangeKind change = ChangeKind::epidemic;
    std::vector<double> theta1{0.3};
    std::vector<double> theta2{0.6};
    double delta_scale = 3.0;     ///< <Delta, v_1> in units of the first channel's sd
    std::size_t changed_subjects = static_cast<std::size_t>(-1);  ///< default: all

    void apply(const KeyValues& kv);
    void validate() const;
};

}  // namespace sepcp::cli
