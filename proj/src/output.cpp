#include "mpes/output.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mpes/errors.hpp"

namespace mpes {

namespace {

std::ofstream open(const std::string& path) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw ConfigError("output", "cannot open '" + path + "' for writing");
    return os;
}

nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string csv_mirror_path(const std::string& path) {
    return std::filesystem::path(path).replace_extension(".csv").string();
}

void write_table(const std::string& path, const Table& table) {
    auto js = open(path);
    auto cs = open(csv_mirror_path(path));
    for (std::size_t i = 0; i < table.columns.size(); ++i) cs << (i ? "," : "") << table.columns[i];
    cs << "\n";
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < table.columns.size(); ++i) {
            double v = i < row.size() ? row[i] : std::nan("");
            obj[table.columns[i]] = number(v);
            cs << (i ? "," : "") << csv_number(v);
        }
        js << obj.dump() << "\n";
        cs << "\n";
    }
}

Table norm_table(const std::vector<NormReport>& series) {
    Table t;
    t.columns.push_back("t");
    for (const auto& k : norm_report_keys()) t.columns.push_back(k);
    for (const auto& r : series) {
        std::vector<double> row{r.t};
        for (const auto& k : norm_report_keys()) row.push_back(r.at(k));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_rows(const std::string& path, const std::vector<ConvergenceRow>& rows) {
    auto js = open(path);
    auto cs = open(csv_mirror_path(path));
    cs << "name,value,lo,hi,pass\n";
    for (const auto& r : rows) {
        nlohmann::ordered_json obj;
        obj["name"] = r.name;
        obj["value"] = number(r.value);
        obj["lo"] = number(r.lo);
        obj["hi"] = number(r.hi);
        obj["pass"] = r.pass;
        js << obj.dump() << "\n";
        cs << r.name << "," << csv_number(r.value) << "," << csv_number(r.lo) << ","
           << csv_number(r.hi) << "," << (r.pass ? "true" : "false") << "\n";
    }
}

} // namespace mpes
