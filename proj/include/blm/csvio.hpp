#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "blm/dofmap.hpp"
#include "blm/stats.hpp"
#include "blm/stepper.hpp"

namespace blm {

inline void write_stats_csv(std::ostream& out, const DissipationSeries& series) {
    out << "t,eps0,epsM,eps,ke,mke,power_in\n";
    for (const auto& s : series.samples)
        out << format_double(s.t) << ',' << format_double(s.eps0) << ',' << format_double(s.epsM)
            << ',' << format_double(s.eps0 + s.epsM) << ',' << format_double(s.ke) << ','
            << format_double(s.mke) << ',' << format_double(s.power_in) << '\n';
}

inline void write_audit_csv(std::ostream& out, const std::vector<EnergyAuditRecord>& records) {
    out << "step,t,KE,MKE,eps0_term,epsM_term,power_in,residual\n";
    for (const auto& r : records)
        out << r.step << ',' << format_double(r.t) << ',' << format_double(r.ke) << ','
            << format_double(r.mke) << ',' << format_double(r.eps0) << ','
            << format_double(r.epsM) << ',' << format_double(r.power_in) << ','
            << format_double(r.residual) << '\n';
}

struct SweepRow {
    double reynolds = 0.0;
    double eps_avg = 0.0;
    double U = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "Re,eps_avg,U,bound,ratio\n";
    for (const auto& r : rows)
        out << format_double(r.reynolds) << ',' << format_double(r.eps_avg) << ','
            << format_double(r.U) << ',' << format_double(r.bound) << ','
            << format_double(r.ratio) << '\n';
}

// Generic numeric CSV with a header row.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw Error("csv: missing column '" + name + "'");
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        if (table.header.empty()) {
            while (std::getline(ss, cell, ',')) table.header.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw ParseError("csv: non-numeric cell '" + cell + "'", line_no);
            row.push_back(v);
        }
        if (row.size() != table.header.size())
            throw ParseError("csv: row has " + std::to_string(row.size()) + " cells, expected " +
                                 std::to_string(table.header.size()),
                             line_no);
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw Error("csv: empty file");
    return table;
}

// ---------------------------------------------------------------------------
// Field snapshots: `field2d 1` header, dof count, one coefficient per line.
// ---------------------------------------------------------------------------

inline void save_field(std::ostream& out, const Field& f) {
    out << "field2d 1\n";
    out << "dofs " << f.size() << "\n";
    for (double c : f.coef) out << format_double(c) << "\n";
}

inline Field load_field(std::istream& in, SpaceKind kind) {
    std::string line;
    int line_no = 0;
    const auto next = [&]() {
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
            return true;
        }
        return false;
    };
    if (!next() || line != "field2d 1") throw ParseError("field: malformed header", line_no);
    if (!next()) throw ParseError("field: missing dof count", line_no);
    std::istringstream ss(line);
    std::string word;
    long n = -1;
    if (!(ss >> word >> n) || word != "dofs" || n < 0)
        throw ParseError("field: expected 'dofs N'", line_no);
    Field f;
    f.kind = kind;
    f.coef.reserve(n);
    for (long i = 0; i < n; ++i) {
        if (!next()) throw ParseError("field: truncated coefficient list", line_no);
        char* end = nullptr;
        const double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str()) throw ParseError("field: bad coefficient '" + line + "'", line_no);
        f.coef.push_back(v);
    }
    return f;
}

}  // namespace blm
