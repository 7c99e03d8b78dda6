#ifndef TECHSPACE_CSV_HPP
#define TECHSPACE_CSV_HPP

#include <iosfwd>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace techspace {

// Streaming reader for delimiter-separated text with RFC-4180 style quoting
// (fields may be wrapped in double quotes; "" escapes a quote; quoted fields
// may contain the delimiter and newlines). Works for ',' and '\t'.
class CsvReader {
public:
    CsvReader(std::istream& in, char delimiter);

    // Reads one logical row into `fields`. Returns false at end of input.
    // line() reports the 1-based physical line the row started on.
    bool next(std::vector<std::string>& fields);
    long line() const { return row_start_line_; }

    // Picks '\t' when the header line contains a tab, ',' otherwise.
    static char detect_delimiter(const std::string& header_line);

private:
    std::istream& in_;
    char delim_;
    long cur_line_ = 1;
    long row_start_line_ = 1;
};

// Writes one CSV row, quoting fields that contain the delimiter, quotes or
// newlines. Terminates with '\n'.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields,
                   char delimiter = ',');

// Shortest round-trip decimal form of v (std::to_chars); "" for NaN, used as
// the explicit missing value in tabular output.
std::string format_value(double v);

// Strict parse helpers; nullopt on malformed input.
std::optional<long> parse_int(const std::string& s);
std::optional<double> parse_double(const std::string& s);

// Splits a multi-valued cell on `sep`, trims ASCII whitespace, drops empties.
std::vector<std::string> split_multi(const std::string& cell, char sep = '|');

std::string trim(const std::string& s);
std::string to_lower(std::string s);

} // namespace techspace

#endif
