#include "locbeta/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "locbeta/error.hpp"

namespace locbeta {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (first != last && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || text.empty()) {
        throw DataError("not a number: '" + std::string(text) + "'");
    }
    return v;
}

long long parse_integer(std::string_view text) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty()) {
        throw DataError("not an integer: '" + std::string(text) + "'");
    }
    return v;
}

int CsvTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

std::size_t CsvTable::require(std::string_view name) const {
    const int c = column(name);
    if (c < 0) throw DataError("missing CSV column '" + std::string(name) + "'");
    return static_cast<std::size_t>(c);
}

namespace {

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string f = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        fields.push_back(b == std::string::npos ? std::string() : f.substr(b, e - b + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw DataError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw DataError(source + ": missing header row");
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_csv(in, path);
}

void write_csv(std::ostream& out, const CsvTable& table) {
    auto emit = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out << ',';
            out << fields[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << contents;
    if (!f) throw DataError("write to '" + path + "' failed");
}

std::vector<ObservationRecord> read_observations(const CsvTable& table, double time_scale) {
    const std::size_t ct = table.require("t");
    const std::size_t cy = table.require("y");
    const int cday = table.column("day");
    const int cid = table.column("id");
    std::vector<ObservationRecord> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        ObservationRecord r;
        r.t = parse_double(row[ct]) / time_scale;
        r.y = parse_double(row[cy]);
        if (cday >= 0) r.day = parse_integer(row[static_cast<std::size_t>(cday)]);
        if (cid >= 0) r.id = parse_integer(row[static_cast<std::size_t>(cid)]);
        out.push_back(r);
    }
    return out;
}

Dataset dataset_from_records(const std::vector<ObservationRecord>& records) {
    std::vector<double> t;
    std::vector<double> y;
    for (const auto& r : records) {
        t.push_back(r.t);
        y.push_back(r.y);
    }
    return Dataset(std::move(t), std::move(y));
}

CsvTable dataset_table(const Dataset& data, double time_scale) {
    CsvTable t;
    t.header = {"t", "y"};
    for (std::size_t j = 0; j < data.size(); ++j) {
        t.rows.push_back({format_double(data.times()[j] * time_scale), format_double(data.values()[j])});
    }
    return t;
}

BetaCurve read_curve(const CsvTable& table, double time_scale) {
    const std::size_t ct = table.require("t");
    const std::size_t ca = table.require("alpha");
    const std::size_t cb = table.require("beta");
    BetaCurve c;
    for (const auto& row : table.rows) {
        c.grid.push_back(parse_double(row[ct]) / time_scale);
        c.alpha.push_back(parse_double(row[ca]));
        c.beta.push_back(parse_double(row[cb]));
    }
    c.validate();
    return c;
}

CsvTable curve_table(const BetaCurve& curve, double time_scale) {
    CsvTable t;
    t.header = {"t", "alpha", "beta"};
    for (std::size_t v = 0; v < curve.grid.size(); ++v) {
        t.rows.push_back({format_double(curve.grid[v] * time_scale), format_double(curve.alpha[v]),
                          format_double(curve.beta[v])});
    }
    return t;
}

}  // namespace locbeta
