#include "cmpslab/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "cmpslab/errors.hpp"

namespace cmpslab {

namespace fs = std::filesystem;

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw CsvError("csv: no column named '" + name + "'");
}

void CsvTable::add_row(std::vector<std::string> row) {
    if (row.size() != header.size()) {
        std::ostringstream msg;
        msg << "csv: row has " << row.size() << " fields, header has " << header.size();
        throw CsvError(msg.str());
    }
    rows.push_back(std::move(row));
}

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

bool needs_quotes(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
    if (!needs_quotes(field)) {
        out += field;
        return;
    }
    out += '"';
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
}

void append_record(std::string& out, const std::vector<std::string>& record) {
    for (std::size_t i = 0; i < record.size(); ++i) {
        if (i) out += ',';
        append_field(out, record[i]);
    }
    out += "\r\n";
}

bool parses_as(const std::string& cell, CsvType type) {
    switch (type) {
        case CsvType::Text:
            return true;
        case CsvType::Bool:
            return cell == "true" || cell == "false";
        case CsvType::Integer: {
            long long v{};
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            return ec == std::errc{} && p == cell.data() + cell.size();
        }
        case CsvType::Real: {
            if (cell == "nan" || cell == "inf" || cell == "-inf") return true;
            double v{};
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            return ec == std::errc{} && p == cell.data() + cell.size();
        }
    }
    return false;
}

const char* type_name(CsvType type) {
    switch (type) {
        case CsvType::Real: return "real";
        case CsvType::Integer: return "integer";
        case CsvType::Bool: return "bool";
        case CsvType::Text: return "text";
    }
    return "?";
}

}  // namespace

std::string to_csv(const CsvTable& table) {
    if (table.header.empty()) {
        throw CsvError("csv: header row is mandatory");
    }
    std::string out;
    append_record(out, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw CsvError("csv: row width differs from header");
        }
        append_record(out, row);
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started) {
                    throw CsvError("csv: stray quote on line " + std::to_string(line));
                }
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                [[fallthrough]];
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field += ch;
                field_started = true;
        }
    }
    if (quoted) {
        throw CsvError("csv: unterminated quoted field");
    }
    if (field_started || !record.empty()) {
        end_record();
    }
    if (records.empty()) {
        throw CsvError("csv: missing header row");
    }
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size()) {
            std::ostringstream msg;
            msg << "csv: record " << r + 1 << " has " << records[r].size() << " fields, header has "
                << table.header.size();
            throw CsvError(msg.str());
        }
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

void validate_csv(const CsvTable& table, const std::vector<CsvColumn>& schema) {
    if (table.header.size() != schema.size()) {
        std::ostringstream msg;
        msg << "csv: header has " << table.header.size() << " columns, schema has " << schema.size();
        throw CsvError(msg.str());
    }
    for (std::size_t c = 0; c < schema.size(); ++c) {
        if (table.header[c] != schema[c].name) {
            throw CsvError("csv: column " + std::to_string(c + 1) + " is '" + table.header[c] +
                           "', expected '" + schema[c].name + "'");
        }
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < schema.size(); ++c) {
            if (!parses_as(table.rows[r][c], schema[c].type)) {
                std::ostringstream msg;
                msg << "csv: row " << r + 1 << ", column '" << schema[c].name << "': '"
                    << table.rows[r][c] << "' is not " << type_name(schema[c].type);
                throw CsvError(msg.str());
            }
        }
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw CsvError("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw CsvError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw CsvError("cannot rename into " + path.string() + ": " + ec.message());
    }
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path)); }

void write_csv(const fs::path& path, const CsvTable& table) {
    write_file_atomic(path, to_csv(table));
}

}  // namespace cmpslab
