#include "lifebench/core/csv.hpp"

namespace lifebench {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_join(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(fields[i]);
    }
    return out;
}

std::optional<std::vector<std::string>> csv_read_record(std::istream& in, int& line_no) {
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    ++line_no;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    size_t i = 0;
    while (true) {
        if (i >= line.size()) {
            if (quoted) {
                // Embedded newline inside a quoted field.
                if (!std::getline(in, line)) break;
                ++line_no;
                cur += '\n';
                i = 0;
                continue;
            }
            break;
        }
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // trailing CR from CRLF
        } else {
            cur += c;
        }
        ++i;
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace lifebench
