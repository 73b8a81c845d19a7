#include "sepcp/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "sepcp/error.hpp"
#include "sepcp/io.hpp"
#include "sepcp/rng.hpp"

namespace sepcp {
namespace {

using nlohmann::ordered_json;

ordered_json to_json_value(const ConfigValue& v) {
    return std::visit([](const auto& x) { return ordered_json(x); }, v);
}

std::string label_text(const std::vector<std::size_t>& label) {
    std::string s = "(";
    for (std::size_t i = 0; i < label.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(label[i] + 1);
    }
    return s + ")";
}

}  // namespace

std::string alpha_label(double alpha) {
    char buf[32];
    const double pct = alpha * 100.0;
    if (std::abs(pct - std::round(pct)) < 1e-9)
        std::snprintf(buf, sizeof(buf), "%.2f", alpha);
    else
        return io::format_double(alpha);
    return buf;
}

std::uint64_t subject_seed(std::uint64_t seed, const std::string& subject) {
    return derive_key(seed, "subject:" + subject);
}

ChangePointReport analyze_scores(const ScoreMatrix& input, const AnalysisOptions& opts, std::string subject) {
    ChangePointReport r;
    r.subject = std::move(subject);
    r.kind = opts.bootstrap.kind;

    ScoreMatrix scores = input;
    if (opts.drop_degenerate) {
        r.dropped_components = degenerate_components(input, opts.bootstrap.alternative);
        if (!r.dropped_components.empty()) {
            scores = input.without(r.dropped_components);
            for (std::size_t l : r.dropped_components)
                r.warnings.push_back("dropped degenerate component " + std::to_string(l + 1) + " " +
                                     label_text(input.labels.at(l)));
        }
    }

    const DiagonalStatistics stats = statistic_diag(scores, opts.bootstrap.alternative);
    r.n = scores.length();
    r.d = scores.dimension();
    r.sum = stats.sum;
    r.max = stats.max;
    r.estimate = stats.estimate;
    r.labels = scores.labels;
    r.long_run = stats.long_run;
    for (std::size_t l = 0; l < r.d; ++l)
        if (stats.long_run.floor_active[l])
            r.warnings.push_back("long-run variance floor active for component " + std::to_string(l + 1));

    r.distribution = bootstrap_residuals(stats.residuals, stats.get(r.kind).value, opts.bootstrap);
    if (r.distribution.regenerated > 0)
        r.warnings.push_back(std::to_string(r.distribution.regenerated) +
                             " bootstrap replicates were redrawn after a zero block variance");
    for (double a : opts.alphas) r.critical_values.emplace_back(a, r.distribution.critical_value(a));
    return r;
}

std::string to_json(const ChangePointReport& r) {
    ordered_json j;
    j["subject"] = r.subject;
    j["n"] = r.n;
    j["d"] = r.d;
    j["statistic"] = {{"kind", std::string(to_string(r.kind))},
                      {"value", r.statistic().value},
                      {"studentization", std::string(to_string(r.statistic().studentization))}};
    j["statistics"] = {{"sum-A", r.sum.value}, {"max-B", r.max.value}};
    j["theta1_hat"] = r.estimate.theta1;
    j["theta2_hat"] = r.estimate.theta2;
    j["tau_hat"] = r.estimate.duration();
    j["change_indices"] = {r.estimate.segment.first, r.estimate.segment.last};
    j["p_value"] = r.p_value();
    ordered_json crit = ordered_json::object();
    for (const auto& [a, c] : r.critical_values) crit[alpha_label(a)] = c;
    j["critical_values"] = crit;

    std::vector<std::size_t> bandwidths = r.long_run.bandwidth;
    j["bandwidths"] = bandwidths;
    j["long_run_variances"] =
        std::vector<double>(r.long_run.variance.data(), r.long_run.variance.data() + r.long_run.variance.size());
    ordered_json comps = ordered_json::array();
    for (std::size_t l = 0; l < r.d; ++l) {
        ordered_json c;
        std::vector<std::size_t> label;
        for (std::size_t x : r.labels.at(l)) label.push_back(x + 1);
        c["label"] = label;
        c["m1"] = r.estimate.components.at(l).first;
        c["m2"] = r.estimate.components.at(l).last;
        c["long_run_variance"] = r.long_run.variance[static_cast<Eigen::Index>(l)];
        c["bandwidth"] = r.long_run.bandwidth.at(l);
        c["floor_active"] = static_cast<bool>(r.long_run.floor_active.at(l));
        comps.push_back(c);
    }
    j["components"] = comps;
    std::vector<std::size_t> dropped;
    for (std::size_t l : r.dropped_components) dropped.push_back(l + 1);
    j["dropped_components"] = dropped;
    j["bootstrap"] = {{"replicates", r.distribution.replicates().size()},
                      {"block_length", r.distribution.block_length},
                      {"regenerated", r.distribution.regenerated}};
    j["warnings"] = r.warnings;
    ordered_json cfg = ordered_json::object();
    for (const auto& [k, v] : r.config) cfg[k] = to_json_value(v);
    j["config"] = cfg;
    return j.dump(2) + "\n";
}

void write_report(const std::filesystem::path& path, const ChangePointReport& report) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << to_json(report);
    if (!out) throw IoError("failed writing report '" + path.string() + "'");
}

void write_replicates_csv(const std::filesystem::path& path, const BootstrapDistribution& dist) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "replicate,value\n";
    for (std::size_t i = 0; i < dist.replicates().size(); ++i)
        out << (i + 1) << ',' << io::format_double(dist.replicates()[i]) << '\n';
    if (!out) throw IoError("failed writing replicates CSV");
}

}  // namespace sepcp
