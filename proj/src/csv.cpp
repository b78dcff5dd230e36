#include "ionspice/csv.hpp"

#include "ionspice/error.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ionspice {

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_transient_csv(std::ostream& out, const TransientResult& tr, const std::vector<std::string>& signals) {
    const std::vector<std::string>& names = signals.empty() ? tr.names : signals;
    std::vector<const std::vector<double>*> cols;
    for (const auto& n : names) cols.push_back(&tr.signal(n));
    out << "time";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        out << csv_number(tr.times[k]);
        for (const auto* c : cols) out << ',' << csv_number((*c)[k]);
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::string& source, std::span<const double> values,
                     std::span<const DcSolution> sols, const std::vector<std::string>& signals) {
    out << source;
    for (const auto& n : signals) out << ',' << n;
    out << '\n';
    for (std::size_t k = 0; k < sols.size(); ++k) {
        out << csv_number(values[k]);
        for (const auto& n : signals) out << ',' << csv_number(sols[k].signal(n));
        out << '\n';
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DomainError("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DomainError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                              " columns");
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            const auto v = parse_number(c);
            if (!v) throw DomainError("CSV line " + std::to_string(lineno) + ": bad number '" + c + "'");
            row.push_back(*v);
        }
        t.rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw DomainError("CSV is empty");
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open '" + path + "'");
    return read_csv(in);
}

}  // namespace ionspice
