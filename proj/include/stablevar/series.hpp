#pragma once

// Date-aligned series frames and the CSV surface: `date,value` ingestion,
// inner joins, log returns, and writers/readers for every file the pipeline
// emits.  Dates are ISO-8601 strings (validated), which order correctly
// under plain string comparison.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stablevar/common.hpp"

namespace stablevar::io {

// --- dates -----------------------------------------------------------------

inline bool valid_date(const std::string& d) {
    if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(d[i]))) return false;
    const int m = (d[5] - '0') * 10 + (d[6] - '0');
    const int day = (d[8] - '0') * 10 + (d[9] - '0');
    return m >= 1 && m <= 12 && day >= 1 && day <= 31;
}

// days since 1970-01-01 (proleptic Gregorian)
inline long days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long>(doe) - 719468;
}

inline std::string civil_from_days(long z) {
    z += 719468;
    const long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long y = static_cast<long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04ld-%02u-%02u", y + (m <= 2), m, d);
    return buf;
}

inline std::string add_days(const std::string& date, long days) {
    const int y = std::stoi(date.substr(0, 4));
    const unsigned m = static_cast<unsigned>(std::stoi(date.substr(5, 2)));
    const unsigned d = static_cast<unsigned>(std::stoi(date.substr(8, 2)));
    return civil_from_days(days_from_civil(y, m, d) + days);
}

// --- frames ------------------------------------------------------------------

enum class Kind { prices, log_returns };

struct SeriesFrame {
    std::vector<std::string> dates;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns; // column-major, same length as dates
    Kind kind = Kind::prices;
    std::string frequency = "weekly";

    std::size_t rows() const { return dates.size(); }

    const std::vector<double>& col(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return columns[i];
        throw input_error("frame: no column named '" + name + "'");
    }

    void check() const {
        for (const auto& c : columns)
            if (c.size() != dates.size()) throw input_error("frame: ragged columns");
        for (std::size_t i = 1; i < dates.size(); ++i)
            if (!(dates[i - 1] < dates[i]))
                throw input_error("frame: dates not strictly increasing at " + dates[i]);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s, const std::string& ctx) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw input_error("");
        return v;
    } catch (...) {
        throw input_error("unparsable number '" + s + "' " + ctx);
    }
}

} // namespace detail

struct ReadReport {
    SeriesFrame frame;
    bool was_unsorted = false;
};

// Single-asset `date,value` CSV.  Rejects duplicate dates and nonpositive
// prices; unsorted input is sorted with a flag.
inline ReadReport read_series_csv(const std::string& path, const std::string& name,
                                  Kind kind = Kind::prices) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    {
        const auto head = detail::split_csv_line(line);
        if (head.size() != 2 || head[0] != "date" || head[1] != "value")
            throw input_error(path + ": expected header 'date,value'");
    }
    std::vector<std::pair<std::string, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() != 2)
            throw input_error(path + ":" + std::to_string(lineno) + ": expected 2 fields");
        if (!valid_date(f[0]))
            throw input_error(path + ":" + std::to_string(lineno) + ": bad date '" +
                              f[0] + "'");
        const double v = detail::parse_double(
            f[1], "at " + path + ":" + std::to_string(lineno));
        if (kind == Kind::prices && !(v > 0.0))
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": nonpositive price " + f[1]);
        rows.emplace_back(f[0], v);
    }
    if (rows.empty()) throw input_error(path + ": no data rows");

    ReadReport rep;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first < rows[i - 1].first) {
            rep.was_unsorted = true;
            break;
        }
    if (rep.was_unsorted)
        std::stable_sort(rows.begin(), rows.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].first == rows[i - 1].first)
            throw input_error(path + ": duplicate date " + rows[i].first);

    rep.frame.kind = kind;
    rep.frame.names = {name};
    rep.frame.columns.resize(1);
    for (auto& [d, v] : rows) {
        rep.frame.dates.push_back(d);
        rep.frame.columns[0].push_back(v);
    }
    return rep;
}

struct JoinResult {
    SeriesFrame frame;
    std::size_t dropped_left = 0, dropped_right = 0;
};

// Inner join on dates; non-overlapping dates are dropped and counted.
inline JoinResult inner_join(const SeriesFrame& a, const SeriesFrame& b) {
    if (a.kind != b.kind) throw input_error("join: mixed frame kinds");
    JoinResult jr;
    jr.frame.kind = a.kind;
    jr.frame.names = a.names;
    jr.frame.names.insert(jr.frame.names.end(), b.names.begin(), b.names.end());
    jr.frame.columns.resize(a.columns.size() + b.columns.size());
    std::size_t i = 0, j = 0;
    while (i < a.rows() && j < b.rows()) {
        if (a.dates[i] == b.dates[j]) {
            jr.frame.dates.push_back(a.dates[i]);
            for (std::size_t c = 0; c < a.columns.size(); ++c)
                jr.frame.columns[c].push_back(a.columns[c][i]);
            for (std::size_t c = 0; c < b.columns.size(); ++c)
                jr.frame.columns[a.columns.size() + c].push_back(b.columns[c][j]);
            ++i;
            ++j;
        } else if (a.dates[i] < b.dates[j]) {
            ++i;
            ++jr.dropped_left;
        } else {
            ++j;
            ++jr.dropped_right;
        }
    }
    jr.dropped_left += a.rows() - i;
    jr.dropped_right += b.rows() - j;
    if (jr.frame.rows() == 0) throw input_error("join: empty date intersection");
    return jr;
}

// r(t) = ln(P(t) / P(t-1)); one fewer row, kind becomes log_returns.
inline SeriesFrame log_returns(const SeriesFrame& prices) {
    if (prices.kind != Kind::prices)
        throw input_error("log_returns: input frame must hold prices");
    if (prices.rows() < 2) throw input_error("log_returns: need at least 2 rows");
    SeriesFrame out;
    out.kind = Kind::log_returns;
    out.names = prices.names;
    out.frequency = prices.frequency;
    out.columns.resize(prices.columns.size());
    for (std::size_t r = 1; r < prices.rows(); ++r) out.dates.push_back(prices.dates[r]);
    for (std::size_t c = 0; c < prices.columns.size(); ++c) {
        const auto& p = prices.columns[c];
        out.columns[c].reserve(p.size() - 1);
        for (std::size_t r = 1; r < p.size(); ++r) {
            if (!(p[r] > 0.0) || !(p[r - 1] > 0.0))
                throw input_error("log_returns: nonpositive price in column " +
                                  prices.names[c]);
            out.columns[c].push_back(std::log(p[r] / p[r - 1]));
        }
    }
    return out;
}

// --- writers / readers -------------------------------------------------------

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_frame_csv(const SeriesFrame& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write file: " + path);
    out << "date";
    for (const auto& n : f.names) out << "," << n;
    out << "\n";
    for (std::size_t r = 0; r < f.rows(); ++r) {
        out << f.dates[r];
        for (const auto& c : f.columns) out << "," << format_value(c[r]);
        out << "\n";
    }
}

inline SeriesFrame read_frame_csv(const std::string& path, Kind kind) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file");
    auto head = detail::split_csv_line(line);
    if (head.size() < 2 || head[0] != "date")
        throw input_error(path + ": expected 'date,<name>...' header");
    SeriesFrame f;
    f.kind = kind;
    f.names.assign(head.begin() + 1, head.end());
    f.columns.resize(f.names.size());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != head.size())
            throw input_error(path + ":" + std::to_string(lineno) + ": field count");
        if (!valid_date(fields[0]))
            throw input_error(path + ":" + std::to_string(lineno) + ": bad date");
        f.dates.push_back(fields[0]);
        for (std::size_t c = 0; c < f.columns.size(); ++c)
            f.columns[c].push_back(detail::parse_double(
                fields[c + 1], "at " + path + ":" + std::to_string(lineno)));
    }
    f.check();
    return f;
}

inline void write_series_csv(const std::string& path,
                             std::span<const std::string> dates,
                             std::span<const double> values) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write file: " + path);
    out << "date,value\n";
    for (std::size_t i = 0; i < dates.size(); ++i)
        out << dates[i] << "," << format_value(values[i]) << "\n";
}

inline std::size_t count_data_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open file: " + path);
    std::string line;
    std::size_t n = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            continue;
        }
        if (!detail::trim(line).empty()) ++n;
    }
    return n;
}

} // namespace stablevar::io
