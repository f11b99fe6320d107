#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace advisor {

/// Minimal RFC 4180 reader: quoted cells, doubled quotes, CRLF, embedded newlines.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Reads the next record into `cells`. Returns false at end of input.
    bool next(std::vector<std::string>& cells) {
        cells.clear();
        if (in_.peek() == std::char_traits<char>::eof()) return false;
        ++line_;
        start_ = line_;
        std::string cell;
        bool quoted = false;
        bool any = false;
        char c;
        while (in_.get(c)) {
            any = true;
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get(c);
                        cell.push_back('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    if (c == '\n') ++line_;
                    cell.push_back(c);
                }
                continue;
            }
            if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                cells.push_back(std::move(cell));
                cell.clear();
            } else if (c == '\r') {
                // swallowed; '\n' ends the record
            } else if (c == '\n') {
                break;
            } else {
                cell.push_back(c);
            }
        }
        if (!any) return false;
        cells.push_back(std::move(cell));
        return true;
    }

    /// 1-based line on which the last record started (counting embedded newlines).
    std::size_t line() const { return start_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t start_ = 0;
};

inline std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(cells[i]);
    }
    out << '\n';
}

}  // namespace advisor
