#include "ionsim/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ionsim/version.hpp"

namespace ionsim {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
        return buf;
    }
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    return os;
}

void write_meta(std::ostream& os, const MetaMap& meta) {
    for (const auto& [k, v] : meta) os << "# " << k << ": " << v << "\n";
}

}  // namespace

void write_scan_csv(const std::string& path, const ScanResult& scan, const MetaMap& meta) {
    MetaMap m = meta;
    m.emplace("axis", scan_axis_name(scan.axis));
    m.emplace("unit", scan_axis_unit(scan.axis));
    m.emplace("readout", scan.readout == Readout::BrightFraction ? "bright_fraction" : "mean_phonon");
    auto os = open_out(path);
    write_meta(os, m);
    os << (scan.readout == Readout::BrightFraction ? "scan_value,p_D,std_err,shots"
                                                   : "scan_value,mean_n,std_err,shots")
       << "\n";
    for (const ScanPoint& p : scan.points) {
        os << format_double(p.value) << "," << format_double(p.stat) << ","
           << format_double(p.stderr_) << "," << p.shots << "\n";
    }
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

void write_table_csv(const std::string& path, const Table& table, const MetaMap& meta) {
    MetaMap m = meta;
    if (!table.name.empty()) m.emplace("table", table.name);
    auto os = open_out(path);
    write_meta(os, m);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        os << (i ? "," : "") << table.columns[i];
    }
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_double(row[i]);
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

std::string fit_report_text(const FitReport& fit) {
    std::ostringstream os;
    os << "model: " << fit.model << "\n";
    os << "points: " << fit.n_points << "\n";
    os << "dof: " << fit.dof << "\n";
    os << "converged: " << (fit.converged ? "yes" : "no") << "\n";
    for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
        os << "param " << fit.param_names[i] << " = " << format_double(fit.params[i]) << " +- "
           << format_double(fit.sigmas[i]) << "\n";
    }
    os << "residual_ss: " << format_double(fit.residual_ss) << "\n";
    if (fit.dof > 0) os << "reduced_chi2: " << format_double(fit.reduced_chi2()) << "\n";
    for (const std::string& f : fit.flags) os << "flag: " << f << "\n";
    return os.str();
}

void write_fit_reports(const std::string& path, const std::vector<FitReport>& fits,
                       const std::vector<std::string>& summary, const MetaMap& meta) {
    auto os = open_out(path);
    write_meta(os, meta);
    for (const std::string& s : summary) os << s << "\n";
    for (const FitReport& f : fits) {
        os << "\n" << fit_report_text(f);
    }
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

void write_manifest(const std::string& path, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["tool"] = "ionsim";
    j["version"] = kVersion;
    j["command"] = command;
    j["master_seed"] = cfg.master_seed;
    char hex[20];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg)));
    j["config_hash"] = std::string("fnv1a:") + hex;
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    j["outputs"] = outputs;
    auto os = open_out(path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

CsvData read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    CsvData data;
    std::string line;
    bool have_header = false;
    long lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            if (!body.empty() && body[0] == ' ') body.erase(0, 1);
            const std::size_t colon = body.find(": ");
            if (colon != std::string::npos) {
                data.meta[body.substr(0, colon)] = body.substr(colon + 2);
            }
            continue;
        }
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            data.columns = std::move(fields);
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": non-numeric field '" + f + "'");
            }
            row.push_back(v);
        }
        if (row.size() != data.columns.size()) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                                     std::to_string(data.columns.size()) + " fields");
        }
        data.rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error(path + ": missing header row");
    return data;
}

}  // namespace ionsim
