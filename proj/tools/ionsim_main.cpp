#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionsim/config.hpp"
#include "ionsim/experiments.hpp"
#include "ionsim/output.hpp"
#include "ionsim/seqlang.hpp"
#include "ionsim/version.hpp"

namespace fs = std::filesystem;
using namespace ionsim;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitRuntime = 3;

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    long shots = 0;
    std::string out;
    int workers = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_shots = true) {
    cmd->add_option("--config", o.config_path, "JSON configuration file (complete document)");
    cmd->add_option("--seed", o.seed, "master seed override")->each([&](const std::string&) {
        o.seed_set = true;
    });
    if (with_shots) cmd->add_option("--shots", o.shots, "shots per scan point override");
    cmd->add_option("--out", o.out, "output file or directory");
    cmd->add_option("--workers", o.workers, "worker thread count (env IONSIM_WORKERS as fallback)");
}

RunConfig load_config(const CommonOpts& o) {
    RunConfig cfg;
    if (!o.config_path.empty()) {
        cfg = config_from_json(slurp(o.config_path));
    }
    if (o.seed_set) cfg.master_seed = o.seed;
    if (o.shots > 0) cfg.shots_per_point = o.shots;
    if (o.workers > 0) {
        cfg.workers = o.workers;
    } else if (const char* env = std::getenv("IONSIM_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) {
            cfg.workers = static_cast<int>(v);
        } else {
            std::cerr << "warning: ignoring invalid IONSIM_WORKERS='" << env << "'\n";
        }
    }
    validate_config(cfg);
    return cfg;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int cmd_run(const std::string& seq_path, const CommonOpts& opts, const std::string& command) {
    const RunConfig cfg = load_config(opts);
    const seq::Program prog = seq::parse(slurp(seq_path));
    const std::vector<seq::CompiledBlock> blocks = seq::validate(prog, cfg);

    std::string out = opts.out.empty() ? std::string(".") : opts.out;
    const bool single_file = out.size() > 4 && out.substr(out.size() - 4) == ".csv";
    if (single_file && blocks.size() != 1) {
        throw std::runtime_error("--out names a .csv file but the program has " +
                                 std::to_string(blocks.size()) + " blocks; pass a directory");
    }
    if (!single_file) fs::create_directories(out);

    std::vector<std::string> outputs;
    std::uint64_t stream = 0;
    for (const seq::CompiledBlock& b : blocks) {
        for (const std::string& w : b.warnings) {
            std::cerr << "warning: " << b.name << ": " << w << "\n";
        }
        const long shots = opts.shots > 0 ? opts.shots : b.shots;
        const ScanResult res = run_scan(b.sequence, b.scan, cfg, cfg.master_seed, stream, shots,
                                        cfg.workers);
        const std::string path =
            single_file ? out : (fs::path(out) / (b.name + ".csv")).string();
        MetaMap meta{{"experiment", b.name},
                     {"seed", std::to_string(cfg.master_seed)},
                     {"stream", std::to_string(stream)},
                     {"shots_per_point", std::to_string(shots)},
                     {"version", kVersion}};
        write_scan_csv(path, res, meta);
        std::cout << "wrote " << path << "\n";
        outputs.push_back(path);
        ++stream;
    }
    const std::string manifest_path =
        single_file ? fs::path(out).replace_extension(".manifest.json").string()
                    : (fs::path(out) / "manifest.json").string();
    write_manifest(manifest_path, cfg, command, outputs);
    std::cout << "wrote " << manifest_path << "\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& model, double tau_us,
            const CommonOpts& opts) {
    const CsvData data = read_csv(data_path);
    if (data.rows.empty()) throw FitError("'" + data_path + "' contains no data rows");
    if (data.columns.size() < 2) throw FitError("'" + data_path + "' needs at least two columns");
    // The decay models report time constants in milliseconds; scan files
    // written by `run` carry wait axes in microseconds and say so in the
    // header, so convert rather than mislabel.
    double x_scale = 1.0;
    const bool wants_ms = model == "exponential" || model == "contrast-decay" ||
                          model == "gaussian-vs-exponential";
    const auto unit_it = data.meta.find("unit");
    if (wants_ms && unit_it != data.meta.end() && unit_it->second == "us") {
        x_scale = 1e-3;
        std::cout << "note: x axis declared in us; converted to ms for the fit\n";
    }

    std::vector<DataPoint> pts;
    pts.reserve(data.rows.size());
    for (const auto& row : data.rows) {
        DataPoint p;
        p.x = row[0] * x_scale;
        p.y = row[1];
        p.sigma = (row.size() >= 3 && row[2] > 0.0) ? row[2] : 1.0;
        pts.push_back(p);
    }

    FitReport fit;
    if (model == "line-center") {
        if (tau_us <= 0.0) {
            throw FitError("model 'line-center' needs --tau-us (the probe pulse duration)");
        }
        fit = fit_line_center(pts, tau_us);
    } else if (model == "fringe") {
        fit = fit_fringe(pts);
    } else if (model == "contrast-decay" || model == "gaussian-vs-exponential") {
        fit = fit_contrast_decay(pts);
    } else if (model == "sine-drift") {
        fit = fit_sine_drift(pts);
    } else if (model == "exponential") {
        fit = fit_exponential_decay(pts);
    } else if (model == "linear") {
        fit = fit_linear(pts);
    } else {
        std::cerr << "unknown model '" << model
                  << "'; available: line-center, fringe, contrast-decay "
                     "(gaussian-vs-exponential), sine-drift, exponential, linear\n";
        return kExitUsage;
    }

    const std::string text = fit_report_text(fit);
    std::cout << text;
    if (!opts.out.empty()) {
        std::ofstream os(opts.out);
        if (!os) throw std::runtime_error("cannot open '" + opts.out + "' for writing");
        os << "# source: " << data_path << "\n" << text;
        std::cout << "wrote " << opts.out << "\n";
    }
    return 0;
}

int cmd_figure(const std::string& name, const CommonOpts& opts, const std::string& command) {
    if (!is_figure_name(name)) {
        std::cerr << "unknown figure '" << name << "'; available:";
        for (const std::string& n : figure_names()) std::cerr << " " << n;
        std::cerr << "\n";
        return kExitUsage;
    }
    const RunConfig cfg = load_config(opts);
    const ExperimentResult result = run_figure(name, cfg);

    const std::string out = opts.out.empty() ? std::string(".") : opts.out;
    fs::create_directories(out);
    MetaMap meta{{"figure", result.name},
                 {"seed", std::to_string(cfg.master_seed)},
                 {"version", kVersion}};
    for (const auto& [k, v] : result.meta) meta.emplace(k, v);

    std::vector<std::string> outputs;
    for (const Table& t : result.tables) {
        const std::string path = (fs::path(out) / (result.name + "_" + t.name + ".csv")).string();
        write_table_csv(path, t, meta);
        outputs.push_back(path);
    }
    const std::string fits_path = (fs::path(out) / (result.name + "_fits.txt")).string();
    write_fit_reports(fits_path, result.fits, result.summary, meta);
    outputs.push_back(fits_path);
    const std::string manifest_path = (fs::path(out) / (result.name + "_manifest.json")).string();
    write_manifest(manifest_path, cfg, command, outputs);
    outputs.push_back(manifest_path);

    for (const std::string& line : result.summary) std::cout << line << "\n";
    for (const std::string& path : outputs) std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_validate(const std::string& seq_path, const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    const seq::Program prog = seq::parse(slurp(seq_path));
    const std::vector<seq::CompiledBlock> blocks = seq::validate(prog, cfg);
    for (const seq::CompiledBlock& b : blocks) {
        for (const std::string& w : b.warnings) {
            std::cerr << "warning: " << b.name << ": " << w << "\n";
        }
        std::cout << "ok: " << b.name << " (" << b.scan.values.size() << " points, " << b.shots
                  << " shots/point)\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trapped-ion qubit coherence simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOpts run_opts, fit_opts, fig_opts, val_opts;
    std::string run_seq, fit_data, fit_model, fig_name, val_seq;
    double fit_tau_us = -1.0;

    CLI::App* run = app.add_subcommand("run", "run a pulse program and write scan data");
    run->add_option("sequence", run_seq, "pulse program (.ionseq)")->required();
    add_common(run, run_opts);

    CLI::App* fit = app.add_subcommand("fit", "fit a model to a data file");
    fit->add_option("data", fit_data, "CSV data file")->required();
    fit->add_option("--model", fit_model, "model name")->required();
    fit->add_option("--tau-us", fit_tau_us, "probe pulse duration for line-center");
    add_common(fit, fit_opts, false);

    CLI::App* figure = app.add_subcommand("figure", "run a reference figure preset");
    figure->add_option("name", fig_name, "preset name")->required();
    add_common(figure, fig_opts);

    CLI::App* validate = app.add_subcommand("validate", "parse and check a pulse program");
    validate->add_option("sequence", val_seq, "pulse program (.ionseq)")->required();
    add_common(validate, val_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    const std::string command = join_args(argc, argv);
    try {
        if (run->parsed()) return cmd_run(run_seq, run_opts, command);
        if (fit->parsed()) return cmd_fit(fit_data, fit_model, fit_tau_us, fit_opts);
        if (figure->parsed()) return cmd_figure(fig_name, fig_opts, command);
        if (validate->parsed()) return cmd_validate(val_seq, val_opts);
    } catch (const seq::SeqError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const SequenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
