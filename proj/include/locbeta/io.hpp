#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "locbeta/loclik.hpp"

namespace locbeta {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// Strict decimal parse; throws DataError on junk or trailing characters.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Comma-separated table with a header row. No quoting: fields never
/// contain commas.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column, or -1.
    int column(std::string_view name) const;
    /// Index of a column; DataError when missing.
    std::size_t require(std::string_view name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const CsvTable& table);

void write_text_file(const std::string& path, const std::string& contents);

struct ObservationRecord {
    std::int64_t id = 0;
    std::int64_t day = 0;
    double t = 0.0;
    double y = 0.0;
};

/// Time values are divided by `time_scale` on input and multiplied on output
/// (24 for hours on a day clock, 1 otherwise).
///
/// Reads `t,y`, `day,t,y` or `id,day,t,y` (missing columns default to 0).
std::vector<ObservationRecord> read_observations(const CsvTable& table, double time_scale);

Dataset dataset_from_records(const std::vector<ObservationRecord>& records);

CsvTable dataset_table(const Dataset& data, double time_scale);

/// `t,alpha,beta` (extra columns ignored on input).
BetaCurve read_curve(const CsvTable& table, double time_scale);
CsvTable curve_table(const BetaCurve& curve, double time_scale);

}  // namespace locbeta
