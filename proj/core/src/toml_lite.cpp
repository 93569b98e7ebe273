#include "pnsim/toml_lite.hpp"

#include "pnsim/errors.hpp"

#include <cctype>
#include <sstream>

namespace pnsim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(int line, const std::string& what) {
    throw ParamError("TOML line " + std::to_string(line) + ": " + what);
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Remove a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        else if (s[i] == '#' && !in_string) return s.substr(0, i);
    }
    return s;
}

bool valid_bare_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
            return false;
    return true;
}

json parse_string(const std::string& v, int line) {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        if (v[i] == '\\') {
            if (i + 2 >= v.size()) fail(line, "dangling escape");
            ++i;
            switch (v[i]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                default: fail(line, "unsupported escape");
            }
        } else if (v[i] == '"') {
            fail(line, "unexpected quote inside string");
        } else {
            out.push_back(v[i]);
        }
    }
    return json(out);
}

json parse_value(const std::string& raw, int line);

json parse_array(const std::string& v, int line) {
    if (v.back() != ']') fail(line, "unterminated array");
    json arr = json::array();
    std::string body = v.substr(1, v.size() - 2);
    int depth = 0;
    bool in_string = false;
    std::string cur;
    auto flush = [&] {
        const std::string item = strip(cur);
        if (!item.empty()) arr.push_back(parse_value(item, line));
        else if (!arr.empty()) fail(line, "empty array element");
        cur.clear();
    };
    for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (!in_string) {
            if (c == '[') ++depth;
            if (c == ']') --depth;
            if (c == ',' && depth == 0) {
                flush();
                continue;
            }
        }
        cur.push_back(c);
    }
    flush();
    return arr;
}

json parse_value(const std::string& raw, int line) {
    const std::string v = strip(raw);
    if (v.empty()) fail(line, "missing value");
    if (v.front() == '"') return parse_string(v, line);
    if (v.front() == '[') return parse_array(v, line);
    if (v == "true") return json(true);
    if (v == "false") return json(false);

    // TOML permits underscores between digits; JSON numbers do not.
    std::string num;
    num.reserve(v.size());
    for (char c : v)
        if (c != '_') num.push_back(c);
    try {
        std::size_t used = 0;
        if (num.find_first_of(".eE") == std::string::npos &&
            num.find("inf") == std::string::npos && num.find("nan") == std::string::npos) {
            const long long i = std::stoll(num, &used);
            if (used == num.size()) return json(i);
        }
        const double d = std::stod(num, &used);
        if (used == num.size()) return json(d);
    } catch (const std::exception&) {
        // fall through
    }
    fail(line, "unrecognized value: " + v);
}

} // namespace

json parse_toml_lite(const std::string& text) {
    json root = json::object();
    json* table = &root;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated table header");
            const std::string path = strip(line.substr(1, line.size() - 2));
            if (path.empty()) fail(line_no, "empty table name");
            table = &root;
            std::size_t pos = 0;
            while (pos <= path.size()) {
                const std::size_t dot = path.find('.', pos);
                const std::string part =
                    strip(path.substr(pos, dot == std::string::npos ? dot : dot - pos));
                if (!valid_bare_key(part)) fail(line_no, "bad table name: " + path);
                table = &(*table)[part];
                if (!table->is_object() && !table->is_null())
                    fail(line_no, "table redefines a value: " + part);
                if (table->is_null()) *table = json::object();
                if (dot == std::string::npos) break;
                pos = dot + 1;
            }
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = strip(line.substr(0, eq));
        if (!valid_bare_key(key)) fail(line_no, "bad key: " + key);
        if (table->contains(key)) fail(line_no, "duplicate key: " + key);
        (*table)[key] = parse_value(line.substr(eq + 1), line_no);
    }
    return root;
}

} // namespace pnsim
