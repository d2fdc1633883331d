#pragma once

#include <map>
#include <string>
#include <vector>

#include "ionsim/experiments.hpp"

namespace ionsim {

// Shortest decimal form that parses back to the identical double; keeps
// data files byte-stable across runs and worker counts.
std::string format_double(double v);

using MetaMap = std::map<std::string, std::string>;

// CSV with a commented "# key: value" header block.
void write_scan_csv(const std::string& path, const ScanResult& scan, const MetaMap& meta);
void write_table_csv(const std::string& path, const Table& table, const MetaMap& meta);

std::string fit_report_text(const FitReport& fit);
void write_fit_reports(const std::string& path, const std::vector<FitReport>& fits,
                       const std::vector<std::string>& summary, const MetaMap& meta);

// JSON sidecar tying outputs to the exact configuration, seed, and build.
void write_manifest(const std::string& path, const RunConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs);

// Reads back a CSV written by write_scan_csv/write_table_csv: numeric
// columns plus the header metadata.
struct CsvData {
    MetaMap meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};
CsvData read_csv(const std::string& path);

}  // namespace ionsim
