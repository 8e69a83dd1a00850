#include "plab/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace plab {

namespace {

using nlohmann::ordered_json;

// JSON has no nan or inf; they are written as strings and read back.
ordered_json num(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

double denum(const ordered_json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("report: not a number: " + j.dump());
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + p.string());
}

// Table names become file names.
std::string file_stem(const std::string& name) {
    std::string s = name;
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) c = '_';
    return s.empty() ? "table" : s;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool RunReport::passed() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

Check& RunReport::check_le(const std::string& name, double measured, double tol, const std::string& detail) {
    checks.push_back({name, "<=", measured, tol, measured <= tol, detail});
    return checks.back();
}

Check& RunReport::check_ge(const std::string& name, double measured, double bound, const std::string& detail) {
    checks.push_back({name, ">=", measured, bound, measured >= bound, detail});
    return checks.back();
}

Check& RunReport::fail(const std::string& name, const std::string& why) {
    checks.push_back({name, "<=", std::numeric_limits<double>::quiet_NaN(), 0.0, false, why});
    return checks.back();
}

Table& RunReport::table(const std::string& name, std::vector<std::string> columns) {
    tables.push_back({name, std::move(columns), {}});
    return tables.back();
}

std::string report_json(const RunReport& r) {
    ordered_json j;
    j["experiment"] = r.experiment;
    j["manifest"] = {{"config_hash", r.config_hash}, {"versions", r.versions}};
    j["config"] = r.config;
    j["passed"] = r.passed();
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"relation", c.relation},
                          {"measured", num(c.measured)},
                          {"tolerance", num(c.tolerance)},
                          {"pass", c.pass},
                          {"detail", c.detail}});
    j["checks"] = checks;
    ordered_json tables = ordered_json::array();
    for (const auto& t : r.tables) {
        ordered_json rows = ordered_json::array();
        for (const auto& row : t.rows) {
            ordered_json jr = ordered_json::array();
            for (double x : row) jr.push_back(num(x));
            rows.push_back(jr);
        }
        tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", rows}});
    }
    j["tables"] = tables;
    return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
    const ordered_json j = ordered_json::parse(text);
    RunReport r;
    r.experiment = j.at("experiment").get<std::string>();
    r.config = j.at("config").get<std::string>();
    r.config_hash = j.at("manifest").at("config_hash").get<std::string>();
    r.versions = j.at("manifest").at("versions").get<std::map<std::string, std::string>>();
    for (const auto& c : j.at("checks"))
        r.checks.push_back({c.at("name").get<std::string>(), c.at("relation").get<std::string>(),
                            denum(c.at("measured")), denum(c.at("tolerance")), c.at("pass").get<bool>(),
                            c.at("detail").get<std::string>()});
    for (const auto& t : j.at("tables")) {
        Table tab{t.at("name").get<std::string>(), t.at("columns").get<std::vector<std::string>>(), {}};
        for (const auto& row : t.at("rows")) {
            std::vector<double> v;
            for (const auto& x : row) v.push_back(denum(x));
            tab.rows.push_back(std::move(v));
        }
        r.tables.push_back(std::move(tab));
    }
    return r;
}

RunReport read_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, ReportFormat format) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        const fs::path p = fs::path(dir) / name;
        write_file(p, text);
        written.push_back(p.string());
    };
    switch (format) {
        case ReportFormat::json: {
            put("report.json", report_json(r));
            ordered_json t = ordered_json::array();
            for (const auto& [phase, sec] : r.wall) t.push_back({{"phase", phase}, {"seconds", sec}});
            put("timing.json", t.dump(2) + "\n");
            break;
        }
        case ReportFormat::csv: {
            std::string s = "name,relation,measured,tolerance,pass,detail\n";
            for (const auto& c : r.checks)
                s += csv_field(c.name) + "," + c.relation + "," + format_number(c.measured) + "," +
                     format_number(c.tolerance) + "," + (c.pass ? "true" : "false") + "," + csv_field(c.detail) + "\n";
            put("checks.csv", s);
            for (const auto& t : r.tables) {
                std::string body;
                for (std::size_t i = 0; i < t.columns.size(); ++i) body += (i ? "," : "") + csv_field(t.columns[i]);
                body += "\n";
                for (const auto& row : t.rows) {
                    for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + format_number(row[i]);
                    body += "\n";
                }
                put(file_stem(t.name) + ".csv", body);
            }
            break;
        }
        case ReportFormat::gnuplot: {
            std::string script = "# gnuplot -p plot.gp\nset key autotitle columnhead\n";
            for (const auto& t : r.tables) {
                std::string body = "#";
                for (const auto& c : t.columns) body += " " + c;
                body += "\n";
                for (const auto& row : t.rows) {
                    for (std::size_t i = 0; i < row.size(); ++i) body += (i ? " " : "") + format_number(row[i]);
                    body += "\n";
                }
                const std::string file = file_stem(t.name) + ".dat";
                put(file, body);
                if (t.columns.size() >= 2) {
                    script += "set title '" + t.name + "'\nset xlabel '" + t.columns[0] + "'\nplot";
                    for (std::size_t i = 1; i < t.columns.size(); ++i)
                        script += std::string(i > 1 ? "," : "") + " '" + file + "' using 1:" + std::to_string(i + 1) +
                                  " with linespoints title '" + t.columns[i] + "'";
                    script += "\npause -1\n";
                }
            }
            put("plot.gp", script);
            break;
        }
    }
    return written;
}

std::vector<std::string> emit_all(const RunReport& r, const std::string& dir) {
    std::vector<std::string> out;
    for (ReportFormat f : {ReportFormat::json, ReportFormat::csv, ReportFormat::gnuplot}) {
        const auto w = emit_report(r, dir, f);
        out.insert(out.end(), w.begin(), w.end());
    }
    return out;
}

}  // namespace plab
