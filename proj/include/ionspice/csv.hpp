#pragma once

// CSV export: header row, '.' decimal separator, LF line endings.

#include "ionspice/engine.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ionspice {

/// First column "time", then one column per signal (all recorded when empty).
void write_transient_csv(std::ostream& out, const TransientResult& tr, const std::vector<std::string>& signals = {});

/// First column named after the swept source, then one column per signal.
void write_sweep_csv(std::ostream& out, const std::string& source, std::span<const double> values,
                     std::span<const DcSolution> sols, const std::vector<std::string>& signals);

/// Fixed-format number used by every CSV writer.
[[nodiscard]] std::string csv_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column index by header name; throws DomainError if absent.
    [[nodiscard]] std::size_t column(const std::string& name) const;
    [[nodiscard]] std::vector<double> column_values(const std::string& name) const;
};

/// Numeric CSV with a header row. Blank lines and '#' comments are skipped.
[[nodiscard]] CsvTable read_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv_file(const std::string& path);

}  // namespace ionspice
