#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kslab/detail/number_format.hpp"
#include "kslab/error.hpp"

namespace kslab {

struct CityRecord {
    std::string province_code;
    std::string city_name;
    double value = 0.0;
};

/// Values grouped by key. Groups are ordered by key so every downstream
/// iteration is deterministic; within a group rows keep file order.
struct GroupedDataset {
    std::map<std::string, std::vector<double>> groups;
    std::string value_label;

    /// Kurtosis of groups this small is degenerate; they are kept here and
    /// the moments module decides whether to drop them.
    static constexpr std::size_t small_group_threshold = 4;

    [[nodiscard]] std::size_t group_count() const { return groups.size(); }

    [[nodiscard]] std::size_t row_count() const
    {
        std::size_t n = 0;
        for (const auto& [key, values] : groups) n += values.size();
        return n;
    }

    [[nodiscard]] std::vector<std::string> small_groups() const
    {
        std::vector<std::string> keys;
        for (const auto& [key, values] : groups)
            if (values.size() < small_group_threshold) keys.push_back(key);
        return keys;
    }
};

struct ProvinceSummaryRow {
    std::string province_code;
    double ati_total = 0.0;  // EUR
    long long n_inhab = 0;
    long long n_cities = 0;
};

/// Column names bound to the roles the parser understands. An empty
/// `city` means the file carries no label column.
struct ColumnMap {
    std::string group = "province";
    std::string city = "city";
    std::string value = "value";
};

namespace detail {

/// One delimited line into fields. Double-quoted fields may contain the
/// delimiter; "" inside quotes is a literal quote.
inline std::vector<std::string> split_delimited(std::string_view line, char delim)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    for (auto& f : fields) f = std::string(trim(f));
    return fields;
}

inline char detect_delimiter(std::string_view header)
{
    if (header.find(',') == std::string_view::npos && header.find('\t') != std::string_view::npos)
        return '\t';
    return ',';
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based, parallel to rows
    char delimiter = ',';

    [[nodiscard]] std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        fail(ErrorKind::schema, "missing column '" + name + "'");
    }

    [[nodiscard]] bool has_column(const std::string& name) const
    {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

inline Table read_table(std::istream& in, const std::string& source)
{
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
            line.erase(0, 3);
        if (trim(line).empty()) continue;
        if (!have_header) {
            t.delimiter = detect_delimiter(line);
            t.header = split_delimited(line, t.delimiter);
            have_header = true;
            continue;
        }
        auto fields = split_delimited(line, t.delimiter);
        if (fields.size() != t.header.size())
            fail(ErrorKind::parse, source + ":" + std::to_string(line_no) + ": expected "
                                       + std::to_string(t.header.size()) + " fields, found "
                                       + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(line_no);
    }
    if (!have_header) fail(ErrorKind::empty_input, source + ": empty input");
    return t;
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path + "'");
    return in;
}

inline double cell_number(const Table& t, std::size_t row, std::size_t col, const std::string& source)
{
    auto v = parse_double(t.rows[row][col]);
    if (!v)
        fail(ErrorKind::parse, source + ":" + std::to_string(t.line_numbers[row]) + ": non-numeric value '"
                                   + t.rows[row][col] + "' in column '" + t.header[col] + "'");
    return *v;
}

} // namespace detail

/// Parses city-level rows in file order.
inline std::vector<CityRecord> parse_city_records(std::istream& in, const ColumnMap& columns = {},
                                                  const std::string& source = "<stream>")
{
    const auto table = detail::read_table(in, source);
    const std::size_t gcol = table.column(columns.group);
    const std::size_t vcol = table.column(columns.value);
    const bool with_city = !columns.city.empty();
    const std::size_t ccol = with_city ? table.column(columns.city) : 0;

    std::vector<CityRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        CityRecord rec;
        rec.province_code = table.rows[r][gcol];
        if (rec.province_code.empty())
            fail(ErrorKind::parse, source + ":" + std::to_string(table.line_numbers[r]) + ": empty group key");
        if (with_city) rec.city_name = table.rows[r][ccol];
        rec.value = detail::cell_number(table, r, vcol, source);
        if (!(rec.value >= 0.0))
            fail(ErrorKind::parse, source + ":" + std::to_string(table.line_numbers[r])
                                       + ": value must be nonnegative");
        records.push_back(std::move(rec));
    }
    if (records.empty()) fail(ErrorKind::empty_input, source + ": no data rows");
    return records;
}

inline GroupedDataset group_records(const std::vector<CityRecord>& records, std::string value_label)
{
    GroupedDataset data;
    data.value_label = std::move(value_label);
    for (const auto& rec : records) data.groups[rec.province_code].push_back(rec.value);
    return data;
}

/// Parses city-level rows and groups them by the group column.
inline GroupedDataset parse_city_csv(std::istream& in, const ColumnMap& columns = {},
                                     const std::string& source = "<stream>")
{
    return group_records(parse_city_records(in, columns, source), columns.value);
}

inline GroupedDataset parse_city_csv(const std::string& path, const ColumnMap& columns = {})
{
    auto in = detail::open_input(path);
    return parse_city_csv(in, columns, path);
}

/// Writes `group,value` rows in group-key order. Values use the shortest
/// round-trip representation so re-parsing reproduces them exactly.
inline void write_grouped_csv(std::ostream& out, const GroupedDataset& data, const ColumnMap& columns = {})
{
    out << columns.group << ',' << columns.value << '\n';
    for (const auto& [key, values] : data.groups)
        for (double v : values) out << key << ',' << detail::format_full(v) << '\n';
}

inline std::vector<ProvinceSummaryRow> load_province_summary(std::istream& in, bool strict = true,
                                                             const std::string& source = "<stream>")
{
    const auto table = detail::read_table(in, source);
    const std::size_t pcol = table.column("province");
    const std::size_t acol = table.column("ati_eur");
    const std::size_t ncol = table.column("population");
    const std::size_t ccol = table.column("n_cities");

    auto integer_cell = [&](std::size_t r, std::size_t c) {
        auto v = detail::parse_integer(table.rows[r][c]);
        if (!v)
            fail(ErrorKind::parse, source + ":" + std::to_string(table.line_numbers[r])
                                       + ": expected integer in column '" + table.header[c] + "'");
        return *v;
    };

    std::vector<ProvinceSummaryRow> rows;
    rows.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ProvinceSummaryRow row;
        row.province_code = table.rows[r][pcol];
        row.ati_total = detail::cell_number(table, r, acol, source);
        row.n_inhab = integer_cell(r, ncol);
        row.n_cities = integer_cell(r, ccol);
        if (row.province_code.empty() || row.n_inhab < 1 || row.n_cities < 1 || row.ati_total < 0)
            fail(ErrorKind::integrity, source + ":" + std::to_string(table.line_numbers[r]) + ": invalid row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(ErrorKind::empty_input, source + ": no data rows");
    if (strict && rows.size() != 110)
        fail(ErrorKind::integrity, source + ": expected 110 province rows, found " + std::to_string(rows.size()));
    return rows;
}

inline std::vector<ProvinceSummaryRow> load_province_summary(const std::string& path, bool strict = true)
{
    auto in = detail::open_input(path);
    return load_province_summary(in, strict, path);
}

} // namespace kslab
