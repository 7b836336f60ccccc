#include "pirsense/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pirsense/errors.hpp"

namespace pirsense {

namespace {

// One CSV record, honoring quoted fields (embedded commas, doubled quotes,
// embedded newlines).
bool read_record(std::istream& in, std::vector<std::string>& fields, long& line_no) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line_no;
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!any) return false;
    fields.push_back(std::move(field));
    if (fields.size() == 1 && fields[0].empty()) return read_record(in, fields, line_no);
    return true;
}

double parse_cell(const std::string& text, long row, std::size_t col,
                  const std::string& origin) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw NonNumericColumn(origin + ": non-numeric cell at row " + std::to_string(row) +
                               ", column " + std::to_string(col + 1) + ": '" + text + "'");
    return value;
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& origin) {
    Dataset data;
    std::vector<std::string> fields;
    long line_no = 1;
    if (!read_record(in, fields, line_no))
        throw ParseError(origin + ": empty input, expected a header row");
    data.names = fields;
    const std::size_t width = data.names.size();

    std::vector<double> cells;
    long rows = 0;
    while (read_record(in, fields, line_no)) {
        ++rows;
        if (fields.size() != width)
            throw ParseError(origin + ": row " + std::to_string(rows) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(width));
        for (std::size_t c = 0; c < width; ++c)
            cells.push_back(parse_cell(fields[c], rows, c, origin));
    }
    if (rows < 2) throw ParseError(origin + ": need at least 2 data rows");

    data.rows.resize(rows, static_cast<int>(width));
    for (long r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < width; ++c)
            data.rows(r, static_cast<int>(c)) = cells[r * width + c];
    return data;
}

Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return read_csv(in, path);
}

void write_csv(const Dataset& data, std::ostream& os) {
    for (std::size_t j = 0; j < data.names.size(); ++j) {
        if (j) os << ',';
        os << data.names[j];
    }
    os << '\n';
    std::ostringstream buf;
    buf.precision(17);
    for (long i = 0; i < data.n(); ++i) {
        buf.str("");
        for (int j = 0; j < data.p(); ++j) {
            if (j) buf << ',';
            buf << data.rows(i, j);
        }
        buf << '\n';
        os << buf.str();
    }
}

std::pair<std::vector<std::string>, Matrix> read_covariance_csv(const std::string& path) {
    const Dataset raw = read_csv_file(path);
    const int p = raw.p();
    if (raw.n() != p)
        throw ParseError(path + ": covariance matrix must be square (got " +
                         std::to_string(raw.n()) + "x" + std::to_string(p) + ")");
    return {raw.names, raw.rows};
}

}  // namespace pirsense
