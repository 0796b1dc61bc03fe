#include "blunderfit/csv.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <utility>
#include <vector>

#include "blunderfit/errors.hpp"

namespace blunderfit {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

[[noreturn]] void fail(const std::string& source, std::size_t line_no, const std::string& what) {
    throw ParseError(source + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& field, const std::string& source, std::size_t line_no,
                    const std::string& column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || field.empty())
        fail(source, line_no, "cannot parse '" + field + "' as a number in column " + column);
    return value;
}

void check_header(const std::vector<std::string>& fields, const std::string& source,
                  std::size_t line_no, std::optional<int> poly_degree) {
    const bool base_ok = fields.size() >= 3 && fields[0] == "id" && fields[1] == "y" &&
                         fields[2] == "sigma";
    if (poly_degree) {
        if (!base_ok || fields.size() != 4 || fields[3] != "x")
            fail(source, line_no, "expected header 'id,y,sigma,x' for polynomial input");
        return;
    }
    if (!base_ok || fields.size() < 4)
        fail(source, line_no, "expected header 'id,y,sigma,x1,...,xp'");
    for (std::size_t j = 3; j < fields.size(); ++j) {
        if (fields[j] != "x" + std::to_string(j - 2))
            fail(source, line_no,
                 "expected design column 'x" + std::to_string(j - 2) + "', found '" + fields[j] +
                     "'");
    }
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& source, std::optional<int> poly_degree) {
    if (poly_degree && *poly_degree < 0)
        throw std::invalid_argument("polynomial degree must be non-negative");

    std::vector<Measurement> rows;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    std::size_t expected_columns = 0;
    std::size_t param_count = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;

        const std::vector<std::string> fields = split_fields(line);
        if (!have_header) {
            check_header(fields, source, line_no, poly_degree);
            expected_columns = fields.size();
            param_count = poly_degree ? static_cast<std::size_t>(*poly_degree) + 1
                                      : fields.size() - 3;
            have_header = true;
            continue;
        }

        const std::string id = fields[0];
        if (id.empty()) fail(source, line_no, "empty id");
        if (fields.size() != expected_columns)
            fail(source, line_no,
                 "row '" + id + "' has " + std::to_string(fields.size()) + " columns, expected " +
                     std::to_string(expected_columns));

        Measurement m;
        m.id = id;
        m.observed = parse_double(fields[1], source, line_no, "y");
        m.sigma = parse_double(fields[2], source, line_no, "sigma");
        if (poly_degree) {
            const double x = parse_double(fields[3], source, line_no, "x");
            m.design_row.resize(param_count);
            double xk = 1.0;
            for (std::size_t j = 0; j < param_count; ++j) {
                m.design_row[j] = xk;
                xk *= x;
            }
        } else {
            m.design_row.reserve(param_count);
            for (std::size_t j = 3; j < fields.size(); ++j)
                m.design_row.push_back(
                    parse_double(fields[j], source, line_no, "x" + std::to_string(j - 2)));
        }
        rows.push_back(std::move(m));
    }

    if (!have_header) throw ParseError(source + ": no header row found");
    if (rows.empty()) throw ParseError(source + ": no data rows");
    return Dataset(std::move(rows), param_count);
}

Dataset read_csv_file(const std::string& path, std::optional<int> poly_degree) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_csv(in, path, poly_degree);
}

}  // namespace blunderfit
