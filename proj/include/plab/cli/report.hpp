#pragma once

#include <map>
#include <string>
#include <vector>

namespace plab {

// One verdict. pass is decided only from measured against tolerance:
// "<=" passes when measured <= tolerance, ">=" when measured >= tolerance. NaN never passes.
struct Check {
    std::string name;
    std::string relation = "<=";
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;  // what was measured, or the error that aborted the phase
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunReport {
    std::string experiment;
    std::string config;       // canonical config text
    std::string config_hash;
    std::map<std::string, std::string> versions;
    std::vector<Check> checks;
    std::vector<Table> tables;
    // Wall times are kept out of the report files so that reruns compare byte for byte.
    std::vector<std::pair<std::string, double>> wall;

    bool passed() const;
    // append-only helpers
    Check& check_le(const std::string& name, double measured, double tol, const std::string& detail = "");
    Check& check_ge(const std::string& name, double measured, double bound, const std::string& detail = "");
    Check& fail(const std::string& name, const std::string& why);
    Table& table(const std::string& name, std::vector<std::string> columns);
};

enum class ReportFormat { json, csv, gnuplot };

// json: report.json; csv: checks.csv and one <table>.csv per table; gnuplot: <table>.dat per table
// and plot.gp. Numbers in csv and dat files carry 17 significant digits. timing.json is written
// alongside with the json format.
std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, ReportFormat format);
std::vector<std::string> emit_all(const RunReport& r, const std::string& dir);

std::string report_json(const RunReport& r);
RunReport report_from_json(const std::string& text);
RunReport read_report(const std::string& path);

// 17 significant digits; nan and inf spelled out
std::string format_number(double x);

}  // namespace plab
