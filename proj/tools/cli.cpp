#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepcp/bootstrap.hpp"
#include "sepcp/error.hpp"
#include "sepcp/io.hpp"
#include "sepcp/model.hpp"
#include "sepcp/parallel.hpp"
#include "sepcp/population.hpp"

namespace sepcp::cli {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Command-line flags that mirror PipelineConfig keys.
class PipelineFlags {
public:
    void add_to(CLI::App* app) {
        add(app, "--d", "d", "eigenvectors per axis: one value or a list like 4x4x2");
        add(app, "--detrend", "detrend", "polynomial detrend order, or 'none'");
        add(app, "--statistic", "statistic", "sum-A or max-B");
        add(app, "--alternative", "alternative", "epidemic or amoc");
        add(app, "--replicates", "replicates", "bootstrap replicates M");
        add(app, "--block-length", "block-length", "bootstrap block length K (0: n^(1/3))");
        add(app, "--bootstrap-studentizer", "bootstrap-studentizer",
            "replicate studentizer: block (default) or pipeline (decontaminate + flat-top per replicate)");
        add(app, "--alpha", "alpha", "comma-separated levels for critical values");
        add(app, "--fdr-q", "fdr-q", "Benjamini-Hochberg level q");
        add(app, "--seed", "seed", "run seed");
        add(app, "--kde", "kde", "bandwidth preset: silverman or paper-defaults");
        add(app, "--kernel", "kernel", "gaussian or epanechnikov");
        add(app, "--boundary", "boundary", "none or reflect");
        add(app, "--grid-points", "grid-points", "density evaluation points per axis");
        add(app, "--drop-degenerate", "drop-degenerate", "drop zero-variance components (true/false)");
        add(app, "--threads", "threads", "worker threads (0: all)");
        app->add_option("--config", config_file_, "key = value configuration file");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (!config_file_.empty()) cfg.apply(read_key_values(config_file_));
        KeyValues overrides;
        for (const auto& f : flags_)
            if (f.option->count() > 0) overrides[f.key] = *f.value;
        cfg.apply(overrides);
        cfg.validate();
        return cfg;
    }

private:
    struct Flag {
        std::string key;
        CLI::Option* option;
        std::shared_ptr<std::string> value;
    };

    void add(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto value = std::make_shared<std::string>();
        flags_.push_back({key, app->add_option(name, *value, help), value});
    }

    std::vector<Flag> flags_;
    std::string config_file_;
};

bool is_scores_csv(const fs::path& p) { return p.extension() == ".csv"; }

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FunctionalSeries preprocess(const FunctionalSeries& series, const PipelineConfig& cfg) {
    return cfg.detrend_order >= 0 ? detrend_polynomial(series, cfg.detrend_order) : series;
}

// ---------------------------------------------------------------- simulate

std::string simulated_subject_id(std::size_t cell, std::size_t cells, std::size_t subject) {
    char buf[64];
    if (cells == 1)
        std::snprintf(buf, sizeof(buf), "sim_%03zu", subject + 1);
    else
        std::snprintf(buf, sizeof(buf), "sim_c%02zu_%03zu", cell + 1, subject + 1);
    return buf;
}

int cmd_simulate(const SimulationConfig& sim, const fs::path& out_dir, std::ostream& out) {
    sim.validate();
    ensure_directory(out_dir);
    const GridSpec grid(sim.grid);

    NoiseSpec noise;
    noise.process = sim.process;
    noise.coefficient = sim.coefficient;
    noise.latent_basis = separable_cosine_basis(grid, sim.latent);
    noise.channel_sd.resize(noise.latent_basis.rows());
    {
        // Channel sd decays with the total frequency of the latent field.
        std::vector<std::size_t> freq(sim.latent.size(), 0);
        for (Eigen::Index l = 0; l < noise.channel_sd.size(); ++l) {
            std::size_t total = 0;
            for (std::size_t f : freq) total += f;
            noise.channel_sd[l] = std::pow(sim.sd_decay, static_cast<double>(total));
            for (std::size_t a = freq.size(); a-- > 0;) {
                if (++freq[a] < sim.latent[a]) break;
                freq[a] = 0;
            }
        }
    }
    noise.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(grid.size()), sim.mean_level);

    std::vector<std::pair<double, double>> cells;
    if (sim.change == ChangeKind::amoc)
        for (double t1 : sim.theta1) cells.emplace_back(t1, 1.0);
    else
        for (double t1 : sim.theta1)
            for (double t2 : sim.theta2) cells.emplace_back(t1, t2);
    if (sim.change == ChangeKind::none) cells.assign(1, {1.0, 1.0});

    const Eigen::VectorXd delta =
        sim.delta_scale * noise.channel_sd[0] * noise.latent_basis.row(0).transpose();

    std::size_t written = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (std::size_t s = 0; s < sim.subjects; ++s) {
            const std::string id = simulated_subject_id(c, cells.size(), s);
            const bool changed = sim.change != ChangeKind::none && s < sim.changed_subjects;
            ChangeSpec change = ChangeSpec::none();
            if (changed) {
                change = sim.change == ChangeKind::amoc ? ChangeSpec::amoc(cells[c].first, delta)
                                                        : ChangeSpec::epidemic(cells[c].first, cells[c].second, delta);
            }
            const std::uint64_t seed = subject_seed(sim.seed, id);
            const FunctionalSeries series = generate_synthetic(grid, sim.n, noise, change, seed);
            io::write_f4ds(out_dir / (id + ".f4ds"), series);

            ordered_json truth;
            truth["subject"] = id;
            truth["seed"] = seed;
            truth["n"] = sim.n;
            truth["axis_sizes"] = sim.grid;
            const char* kind = !changed ? "none" : sim.change == ChangeKind::amoc ? "amoc" : "epidemic";
            truth["change"] = {{"kind", kind}};
            if (changed) {
                const auto [first, last] = shifted_range(change, sim.n);
                truth["change"]["theta1"] = change.theta1;
                truth["change"]["theta2"] = change.theta2;
                truth["change"]["tau"] = change.duration();
                truth["change"]["shifted_indices"] = {first + 1, last};
            }
            std::vector<double> projections;
            for (Eigen::Index l = 0; l < noise.latent_basis.rows(); ++l)
                projections.push_back(changed ? noise.latent_basis.row(l).dot(delta.transpose()) : 0.0);
            truth["delta_projections"] = projections;
            truth["noise"] = {{"process", sim.process == NoiseProcess::ar1   ? "ar1"
                                          : sim.process == NoiseProcess::ma1 ? "ma1"
                                                                              : "iid"},
                              {"coefficient", sim.coefficient},
                              {"channel_sd", std::vector<double>(noise.channel_sd.data(),
                                                                 noise.channel_sd.data() + noise.channel_sd.size())}};
            write_text(out_dir / (id + ".truth.json"), truth.dump(2) + "\n");
            ++written;
        }
    }
    out << "wrote " << written << " series to " << out_dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- density

ordered_json write_population(const fs::path& dir, const std::vector<double>& location,
                              const std::vector<double>& duration, const PipelineConfig& cfg) {
    ordered_json s;
    s["m"] = location.size();
    s["preset"] = cfg.kde_preset;
    s["kernel"] = std::string(to_string(cfg.kernel));
    s["boundary"] = cfg.boundary == BoundaryMode::none ? "none" : "reflect";
    s["grid"] = {{"points", cfg.grid_points}, {"range", {0.0, 1.0}}};
    if (location.empty()) {
        s["note"] = "no subjects available; densities not computed";
        return s;
    }

    const std::vector<double> grid = linspace(0.0, 1.0, cfg.grid_points);
    io::write_density_csv(dir / "edf_location.csv", edf(location, grid));
    io::write_density_csv(dir / "edf_duration.csv", edf(duration, grid));
    s["files"] = {"edf_location.csv", "edf_duration.csv"};

    double h_loc = 0.0, h_dur = 0.0;
    if (cfg.kde_preset == "paper-defaults") {
        h_loc = kPresetBandwidths.first;
        h_dur = kPresetBandwidths.second;
    } else {
        try {
            h_loc = silverman_bandwidth(location);
            h_dur = silverman_bandwidth(duration);
        } catch (const ValidationError& e) {
            s["note"] = std::string("kernel density estimates skipped: ") + e.what();
            return s;
        }
    }
    const auto kde_loc = kde_1d(location, h_loc, grid, cfg.kernel, cfg.boundary);
    const auto kde_dur = kde_1d(duration, h_dur, grid, cfg.kernel, cfg.boundary);
    const auto kde_joint = kde_2d(location, duration, h_loc, h_dur, grid, grid, cfg.kernel, cfg.boundary);
    io::write_density_csv(dir / "kde_location.csv", kde_loc);
    io::write_density_csv(dir / "kde_duration.csv", kde_dur);
    io::write_density_csv(dir / "kde_joint.csv", kde_joint);
    s["files"].push_back("kde_location.csv");
    s["files"].push_back("kde_duration.csv");
    s["files"].push_back("kde_joint.csv");
    s["bandwidths"] = {{"location", h_loc}, {"duration", h_dur}, {"joint", {h_loc, h_dur}}};
    s["boundary_mass"] = {{"location", kde_loc.boundary_mass.at(0)},
                          {"duration", kde_dur.boundary_mass.at(0)},
                          {"joint", kde_joint.boundary_mass}};
    return s;
}

int cmd_density(const fs::path& input, const fs::path& out_dir, bool rejected_only, const PipelineConfig& cfg,
                std::ostream& out) {
    std::ifstream in(input);
    if (!in) throw IoError("cannot open '" + input.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw IoError("density input is empty");
    const auto header = split_list(line);
    auto column = [&](std::initializer_list<const char*> names) -> std::ptrdiff_t {
        for (const char* name : names) {
            const auto it = std::find(header.begin(), header.end(), name);
            if (it != header.end()) return it - header.begin();
        }
        return -1;
    };
    const auto loc_col = column({"theta1_hat", "theta1"});
    const auto dur_col = column({"tau_hat", "tau"});
    const auto rej_col = column({"rejected"});
    if (loc_col < 0 || dur_col < 0) throw IoError("density input needs theta1(_hat) and tau(_hat) columns");
    if (rejected_only && rej_col < 0) throw ValidationError("--rejected-only needs a 'rejected' column");

    std::vector<double> location, duration;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_list(line);
        if (static_cast<std::ptrdiff_t>(fields.size()) != static_cast<std::ptrdiff_t>(header.size()))
            throw IoError("line " + std::to_string(line_no) + ": wrong number of fields");
        if (rejected_only && fields[static_cast<std::size_t>(rej_col)] != "1") continue;
        location.push_back(std::stod(fields[static_cast<std::size_t>(loc_col)]));
        duration.push_back(std::stod(fields[static_cast<std::size_t>(dur_col)]));
    }
    ChangePointSample sample{location, duration, std::nullopt, std::nullopt};
    sample.validate();

    ensure_directory(out_dir);
    const ordered_json summary = write_population(out_dir, location, duration, cfg);
    write_text(out_dir / "density_summary.json", summary.dump(2) + "\n");
    out << "density estimates for " << location.size() << " subjects written to " << out_dir.string() << "\n";
    return kOk;
}

// ---------------------------------------------------------------- cohort

int cmd_cohort(const fs::path& dir, const fs::path& out_dir, const fs::path& basis_path, const PipelineConfig& cfg,
               std::ostream& out) {
    const auto inputs = cohort_inputs(dir);
    if (inputs.empty()) throw ValidationError("cohort directory '" + dir.string() + "' has no .f4ds or .csv inputs");

    std::optional<SeparableBasis> shared;
    if (!basis_path.empty()) {
        shared = io::read_basis(basis_path);
        for (const auto& p : inputs) {
            if (is_scores_csv(p)) continue;
            std::ifstream in(p, std::ios::binary);
            std::string header;
            std::getline(in, header);
            const auto j = ordered_json::parse(header, nullptr, false);
            if (j.is_discarded() || !j.contains("axis_sizes")) throw IoError("bad F4DS header in " + p.string());
            if (j["axis_sizes"].get<std::vector<std::size_t>>() !=
                std::vector<std::size_t>(shared->grid().axis_sizes().begin(), shared->grid().axis_sizes().end()))
                throw ValidationError("subject " + subject_id(p) + " has a grid shape different from the shared basis");
        }
    }

    ensure_directory(out_dir / "reports");
    std::vector<ChangePointReport> reports(inputs.size());
    PipelineConfig inner = cfg;
    if (inputs.size() > 1) inner.threads = 1;
    parallel_for(
        inputs.size(),
        [&](std::size_t i) {
            reports[i] = test_subject(inputs[i], inner, subject_id(inputs[i]), shared ? &*shared : nullptr);
            // The echo reflects the user's configuration, not the per-subject thread split.
            reports[i].config = cfg.echo();
        },
        cfg.threads);

    std::vector<double> p_values;
    for (const auto& r : reports) p_values.push_back(r.p_value());
    const FdrResult fdr = bh_fdr(p_values, cfg.fdr_q);

    std::ostringstream summary;
    summary << "subject,statistic,p_value,rejected,theta1_hat,tau_hat\n";
    std::vector<double> location, duration;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        write_report(out_dir / "reports" / (r.subject + ".json"), r);
        summary << r.subject << ',' << io::format_double(r.statistic().value) << ','
                << io::format_double(r.p_value()) << ',' << (fdr.rejected[i] ? 1 : 0) << ','
                << io::format_double(r.estimate.theta1) << ',' << io::format_double(r.estimate.duration()) << '\n';
        if (fdr.rejected[i]) {
            location.push_back(r.estimate.theta1);
            duration.push_back(r.estimate.duration());
        }
    }
    write_text(out_dir / "summary.csv", summary.str());

    ordered_json fdr_json;
    fdr_json["q"] = cfg.fdr_q;
    fdr_json["subjects"] = reports.size();
    fdr_json["rejections"] = fdr.rejections;
    fdr_json["threshold"] = fdr.threshold;
    ordered_json pop = write_population(out_dir, location, duration, cfg);
    pop["source"] = "subjects rejected at the FDR level";
    fdr_json["population"] = pop;
    write_text(out_dir / "cohort_summary.json", fdr_json.dump(2) + "\n");

    out << fdr.rejections << " of " << reports.size() << " subjects rejected at FDR q = " << cfg.fdr_q << "\n";
    return kOk;
}

}  // namespace

std::string subject_id(const fs::path& input) { return input.stem().string(); }

std::vector<fs::path> cohort_inputs(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw IoError("'" + dir.string() + "' is not a directory");
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".f4ds" || ext == ".csv") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        return a.filename().string() < b.filename().string();
    });
    return out;
}

ScoreMatrix load_scores(const fs::path& input, const PipelineConfig& cfg, const SeparableBasis* shared,
                        std::vector<std::string>& warnings) {
    if (is_scores_csv(input)) return io::read_scores_csv(input);
    const FunctionalSeries series = preprocess(io::read_f4ds(input), cfg);
    if (shared) {
        if (shared->grid() != series.grid())
            throw ValidationError("input grid does not match the shared basis grid");
        const auto w = shared->warnings();
        warnings.insert(warnings.end(), w.begin(), w.end());
        return project(series, *shared);
    }
    const SeparableBasis basis = estimate_separable_basis(series, cfg.resolved_d(series.grid().rank()));
    const auto w = basis.warnings();
    warnings.insert(warnings.end(), w.begin(), w.end());
    return project(series, basis);
}

ChangePointReport test_subject(const fs::path& input, const PipelineConfig& cfg, const std::string& subject,
                               const SeparableBasis* shared) {
    std::vector<std::string> warnings;
    const ScoreMatrix scores = load_scores(input, cfg, shared, warnings);
    ChangePointReport report = analyze_scores(scores, cfg.analysis_options(subject_seed(cfg.seed, subject)), subject);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
    report.config = cfg.echo();
    return report;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Epidemic change-point testing for high-dimensional functional time series"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "write synthetic F4DS series with ground truth");
    std::string sim_config, sim_out;
    std::vector<std::string> sim_set;
    sim_cmd->add_option("--config", sim_config, "simulation key = value file");
    sim_cmd->add_option("--set", sim_set, "override a simulation key, e.g. --set n=200");
    sim_cmd->add_option("-o,--out", sim_out, "output directory")->required();

    // basis
    auto* basis_cmd = app.add_subcommand("basis", "estimate and export a separable basis");
    std::string basis_in, basis_out;
    PipelineFlags basis_flags;
    basis_cmd->add_option("input", basis_in, "F4DS series")->required();
    basis_cmd->add_option("-o,--out", basis_out, "basis file")->required();
    basis_flags.add_to(basis_cmd);

    // test
    auto* test_cmd = app.add_subcommand("test", "test one subject for an epidemic change");
    std::string test_in, test_out, test_basis, test_subject_name, test_replicates_csv, test_scores_out;
    PipelineFlags test_flags;
    test_cmd->add_option("input", test_in, "F4DS series or scores CSV")->required();
    test_cmd->add_option("-o,--out", test_out, "report JSON (default: stdout)");
    test_cmd->add_option("--basis", test_basis, "use an exported basis instead of estimating one");
    test_cmd->add_option("--subject", test_subject_name, "subject id (default: input file stem)");
    test_cmd->add_option("--replicates-csv", test_replicates_csv, "dump sorted bootstrap replicates");
    test_cmd->add_option("--scores-out", test_scores_out, "write the projected scores CSV");
    test_flags.add_to(test_cmd);

    // cohort
    auto* cohort_cmd = app.add_subcommand("cohort", "test every subject in a directory and apply FDR");
    std::string cohort_in, cohort_out, cohort_basis;
    PipelineFlags cohort_flags;
    cohort_cmd->add_option("input", cohort_in, "directory of F4DS / scores CSV inputs")->required();
    cohort_cmd->add_option("-o,--out", cohort_out, "output directory")->required();
    cohort_cmd->add_option("--basis", cohort_basis, "share one exported basis across subjects");
    cohort_flags.add_to(cohort_cmd);

    // density
    auto* density_cmd = app.add_subcommand("density", "EDF and kernel density estimates of change points");
    std::string density_in, density_out;
    bool density_rejected_only = false;
    PipelineFlags density_flags;
    density_cmd->add_option("input", density_in, "CSV with theta1(_hat) and tau(_hat) columns")->required();
    density_cmd->add_option("-o,--out", density_out, "output directory")->required();
    density_cmd->add_flag("--rejected-only", density_rejected_only, "keep rows with rejected = 1");
    density_flags.add_to(density_cmd);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }

    try {
        if (sim_cmd->parsed()) {
            SimulationConfig sim;
            if (!sim_config.empty()) sim.apply(read_key_values(sim_config));
            std::string overrides;
            for (const auto& s : sim_set) overrides += s + "\n";
            sim.apply(parse_key_values(overrides));
            return cmd_simulate(sim, sim_out, out);
        }
        if (basis_cmd->parsed()) {
            const PipelineConfig cfg = basis_flags.resolve();
            const FunctionalSeries series = preprocess(io::read_f4ds(basis_in), cfg);
            const SeparableBasis basis = estimate_separable_basis(series, cfg.resolved_d(series.grid().rank()));
            io::write_basis(fs::path(basis_out), basis);
            for (const auto& w : basis.warnings()) err << "warning: " << w << "\n";
            out << "basis with " << basis.dimension() << " joint functions written to " << basis_out << "\n";
            return kOk;
        }
        if (test_cmd->parsed()) {
            const PipelineConfig cfg = test_flags.resolve();
            std::optional<SeparableBasis> shared;
            if (!test_basis.empty()) shared = io::read_basis(fs::path(test_basis));
            const std::string subject = test_subject_name.empty() ? subject_id(test_in) : test_subject_name;
            if (!test_scores_out.empty()) {
                std::vector<std::string> ignored;
                io::write_scores_csv(fs::path(test_scores_out),
                                     load_scores(test_in, cfg, shared ? &*shared : nullptr, ignored));
            }
            const ChangePointReport report = test_subject(test_in, cfg, subject, shared ? &*shared : nullptr);
            if (test_out.empty())
                out << to_json(report);
            else
                write_report(fs::path(test_out), report);
            if (!test_replicates_csv.empty()) write_replicates_csv(fs::path(test_replicates_csv), report.distribution);
            return kOk;
        }
        if (cohort_cmd->parsed()) return cmd_cohort(cohort_in, cohort_out, cohort_basis, cohort_flags.resolve(), out);
        if (density_cmd->parsed())
            return cmd_density(density_in, density_out, density_rejected_only, density_flags.resolve(), out);
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const DegenerateDataError& e) {
        err << "degenerate data: " << e.what() << "\n";
        err << "hint: components with (near) zero variance can be removed with --drop-degenerate true, "
               "or use a smaller --d\n";
        return kDegenerate;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    }
    return kValidation;
}

}  // namespace sepcp::cli
