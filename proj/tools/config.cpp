#include "config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sepcp/error.hpp"

namespace sepcp::cli {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw ValidationError("config key '" + key + "': cannot parse '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ValidationError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text, char sep = ',') {
    std::vector<T> out;
    for (const auto& item : split_list(text, sep)) out.push_back(parse_number<T>(key, item));
    if (out.empty()) throw ValidationError("config key '" + key + "' is empty");
    return out;
}

NoiseProcess parse_process(const std::string& text) {
    if (text == "iid" || text == "iid-gaussian") return NoiseProcess::iid_gaussian;
    if (text == "ar1") return NoiseProcess::ar1;
    if (text == "ma1") return NoiseProcess::ma1;
    throw ValidationError("unknown noise process '" + text + "' (expected iid, ar1 or ma1)");
}

ChangeKind parse_change(const std::string& text) {
    if (text == "none") return ChangeKind::none;
    if (text == "epidemic") return ChangeKind::epidemic;
    if (text == "amoc") return ChangeKind::amoc;
    throw ValidationError("unknown change kind '" + text + "'");
}

BoundaryMode parse_boundary(const std::string& text) {
    if (text == "none") return BoundaryMode::none;
    if (text == "reflect") return BoundaryMode::reflect;
    throw ValidationError("unknown boundary mode '" + text + "' (expected none or reflect)");
}

}  // namespace

std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
            throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

void PipelineConfig::apply(const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "d")
            d_per_axis = parse_list<std::size_t>(key, value, value.find('x') != std::string::npos ? 'x' : ',');
        else if (key == "detrend")
            detrend_order = value == "none" ? -1 : parse_number<int>(key, value);
        else if (key == "statistic")
            kind = parse_statistic_kind(value);
        else if (key == "alternative")
            alternative = parse_alternative(value);
        else if (key == "replicates")
            replicates = parse_number<std::size_t>(key, value);
        else if (key == "block-length")
            block_length = parse_number<std::size_t>(key, value);
        else if (key == "bootstrap-studentizer")
            studentizer = parse_replicate_studentizer(value);
        else if (key == "alpha")
            alphas = parse_list<double>(key, value);
        else if (key == "fdr-q")
            fdr_q = parse_number<double>(key, value);
        else if (key == "seed")
            seed = parse_number<std::uint64_t>(key, value);
        else if (key == "kde")
            kde_preset = value;
        else if (key == "kernel")
            kernel = parse_kernel(value);
        else if (key == "boundary")
            boundary = parse_boundary(value);
        else if (key == "grid-points")
            grid_points = parse_number<std::size_t>(key, value);
        else if (key == "drop-degenerate")
            drop_degenerate = parse_bool(key, value);
        else if (key == "threads")
            threads = parse_number<unsigned>(key, value);
        else
            throw ValidationError("unknown pipeline config key '" + key + "'");
    }
}

void PipelineConfig::validate() const {
    if (d_per_axis.empty()) throw ValidationError("d needs at least one value");
    for (std::size_t d : d_per_axis)
        if (d < 1) throw ValidationError("d must be at least 1 per axis");
    if (replicates < 1) throw ValidationError("replicates must be at least 1");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0)) throw ValidationError("alpha levels must lie in (0, 1)");
    if (!(fdr_q > 0.0 && fdr_q < 1.0)) throw ValidationError("fdr-q must lie in (0, 1)");
    if (kde_preset != "silverman" && kde_preset != "paper-defaults")
        throw ValidationError("kde preset must be silverman or paper-defaults");
    if (grid_points < 2) throw ValidationError("grid-points must be at least 2");
}

std::vector<std::size_t> PipelineConfig::resolved_d(std::size_t rank) const {
    if (d_per_axis.size() == 1) return std::vector<std::size_t>(rank, d_per_axis[0]);
    if (d_per_axis.size() != rank)
        throw ValidationError("d lists " + std::to_string(d_per_axis.size()) + " axes but the grid has " +
                              std::to_string(rank));
    return d_per_axis;
}

AnalysisOptions PipelineConfig::analysis_options(std::uint64_t bootstrap_seed) const {
    AnalysisOptions opts;
    opts.bootstrap.replicates = replicates;
    opts.bootstrap.block_length = block_length;
    opts.bootstrap.seed = bootstrap_seed;
    opts.bootstrap.kind = kind;
    opts.bootstrap.alternative = alternative;
    opts.bootstrap.threads = threads;
    opts.bootstrap.studentizer = studentizer;
    opts.alphas = alphas;
    opts.drop_degenerate = drop_degenerate;
    return opts;
}

ConfigEcho PipelineConfig::echo() const {
    std::vector<std::int64_t> d;
    for (std::size_t x : d_per_axis) d.push_back(static_cast<std::int64_t>(x));
    return {
        {"d", d},
        {"detrend", static_cast<std::int64_t>(detrend_order)},
        {"statistic", std::string(to_string(kind))},
        {"alternative", std::string(to_string(alternative))},
        {"replicates", static_cast<std::int64_t>(replicates)},
        {"block_length", static_cast<std::int64_t>(block_length)},
        {"bootstrap_studentizer", std::string(to_string(studentizer))},
        {"alpha", alphas},
        {"fdr_q", fdr_q},
        {"seed", static_cast<std::int64_t>(seed)},
        {"kde", kde_preset},
        {"kernel", std::string(to_string(kernel))},
        {"boundary", std::string(boundary == BoundaryMode::none ? "none" : "reflect")},
        {"drop_degenerate", drop_degenerate},
    };
}

void SimulationConfig::apply(const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "grid")
            grid = parse_list<std::size_t>(key, value, 'x');
        else if (key == "n")
            n = parse_number<std::size_t>(key, value);
        else if (key == "subjects")
            subjects = parse_number<std::size_t>(key, value);
        else if (key == "seed")
            seed = parse_number<std::uint64_t>(key, value);
        else if (key == "process")
            process = parse_process(value);
        else if (key == "coefficient")
            coefficient = parse_number<double>(key, value);
        else if (key == "latent")
            latent = parse_list<std::size_t>(key, value, 'x');
        else if (key == "sd-decay")
            sd_decay = parse_number<double>(key, value);
        else if (key == "mean")
            mean_level = parse_number<double>(key, value);
        else if (key == "change")
            change = parse_change(value);
        else if (key == "theta1")
            theta1 = parse_list<double>(key, value);
        else if (key == "theta2")
            theta2 = parse_list<double>(key, value);
        else if (key == "delta-scale")
            delta_scale = parse_number<double>(key, value);
        else if (key == "changed-subjects")
            changed_subjects = parse_number<std::size_t>(key, value);
        else
            throw ValidationError("unknown simulation config key '" + key + "'");
    }
}

void SimulationConfig::validate() const {
    GridSpec g(grid);
    if (latent.size() != grid.size()) throw ValidationError("latent must list one count per grid axis");
    for (std::size_t a = 0; a < grid.size(); ++a)
        if (latent[a] < 1 || latent[a] > grid[a]) throw ValidationError("latent count out of range on an axis");
    if (n < 2) throw ValidationError("n must be at least 2");
    if (subjects < 1) throw ValidationError("subjects must be at least 1");
    if (!(sd_decay > 0.0)) throw ValidationError("sd-decay must be positive");
    if (process == NoiseProcess::ar1 && !(std::abs(coefficient) < 1.0))
        throw ValidationError("AR(1) coefficient must satisfy |rho| < 1");
    if (change == ChangeKind::none) return;
    for (double t1 : theta1) {
        if (change == ChangeKind::amoc) {
            if (!(t1 > 0.0 && t1 < 1.0)) throw ValidationError("AMOC theta1 must lie in (0, 1)");
            continue;
        }
        for (double t2 : theta2)
            if (!(t1 > 0.0 && t1 < t2 && t2 < 1.0))
                throw ValidationError("epidemic change needs 0 < theta1 < theta2 < 1 (got theta1 = " +
                                      std::to_string(t1) + ", theta2 = " + std::to_string(t2) + ")");
    }
}

}  // namespace sepcp::cli
