#include "breachcat/csv.hpp"

#include <algorithm>
#include <cctype>

namespace breachcat::csv {

std::vector<std::string> split_row(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
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
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool read_header(std::istream& in, std::map<std::string, std::size_t>& columns)
{
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        auto fields = split_row(line);
        columns.clear();
        for (std::size_t i = 0; i < fields.size(); ++i) columns.emplace(lower(trim(fields[i])), i);
        return true;
    }
    return false;
}

bool next_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no)
{
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        fields = split_row(line);
        for (auto& f : fields) f = trim(f);
        return true;
    }
    return false;
}

} // namespace breachcat::csv
