#include "techspace/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ostream>

namespace techspace {

CsvReader::CsvReader(std::istream& in, char delimiter)
    : in_(in), delim_(delimiter) {}

char CsvReader::detect_delimiter(const std::string& header_line) {
    return header_line.find('\t') != std::string::npos ? '\t' : ',';
}

bool CsvReader::next(std::vector<std::string>& fields) {
    fields.clear();
    row_start_line_ = cur_line_;

    int c = in_.get();
    // skip a blank line (but not EOF)
    while (c == '\n' || c == '\r') {
        if (c == '\n') ++cur_line_;
        row_start_line_ = cur_line_;
        c = in_.get();
    }
    if (c == std::char_traits<char>::eof()) return false;

    std::string field;
    bool in_quotes = false;
    bool row_done = false;
    while (!row_done) {
        if (c == std::char_traits<char>::eof()) {
            row_done = true;
            break;
        }
        char ch = static_cast<char>(c);
        if (in_quotes) {
            if (ch == '"') {
                int peek = in_.peek();
                if (peek == '"') {
                    field.push_back('"');
                    in_.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++cur_line_;
                field.push_back(ch);
            }
        } else if (ch == '"' && field.empty()) {
            in_quotes = true;
        } else if (ch == delim_) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r') {
            // swallow; handled with the following '\n' (or alone)
        } else if (ch == '\n') {
            ++cur_line_;
            row_done = true;
            break;
        } else {
            field.push_back(ch);
        }
        if (!row_done) c = in_.get();
    }
    fields.push_back(std::move(field));
    return true;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields,
                   char delimiter) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(delimiter);
        const std::string& f = fields[i];
        bool needs_quote = f.find(delimiter) != std::string::npos ||
                           f.find('"') != std::string::npos ||
                           f.find('\n') != std::string::npos ||
                           f.find('\r') != std::string::npos;
        if (needs_quote) {
            out.put('"');
            for (char ch : f) {
                if (ch == '"') out.put('"');
                out.put(ch);
            }
            out.put('"');
        } else {
            out << f;
        }
    }
    out.put('\n');
}

std::string format_value(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::optional<long> parse_int(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    long value = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_double(const std::string& s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double value = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), value);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) return std::nullopt;
    return value;
}

std::vector<std::string> split_multi(const std::string& cell, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= cell.size()) {
        size_t end = cell.find(sep, start);
        if (end == std::string::npos) end = cell.size();
        std::string piece = trim(cell.substr(start, end - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        start = end + 1;
        if (end == cell.size()) break;
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

} // namespace techspace
