#include "kbie/config.hpp"

#include "kbie/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kbie {

namespace {

const char* type_name(ConfigValue::Type t) {
    switch (t) {
        case ConfigValue::Type::boolean: return "boolean";
        case ConfigValue::Type::integer: return "integer";
        case ConfigValue::Type::real: return "real";
        case ConfigValue::Type::string: return "string";
        case ConfigValue::Type::array: return "array";
    }
    return "value";
}

[[noreturn]] void wrong_type(const ConfigValue& v, const std::string& what, const char* expected) {
    throw ConfigError(v.line, what + ": expected " + expected + ", found " + type_name(v.type));
}

bool is_bare_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

/// Recursive-descent parser over one (possibly multi-line) value.
class ValueParser {
public:
    ValueParser(const std::string& text, int line) : s_(text), line_(line) {}

    ConfigValue parse_all() {
        ConfigValue v = value();
        skip_space();
        if (pos_ != s_.size()) fail("unexpected trailing characters '" + s_.substr(pos_) + "'");
        return v;
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(line_, what); }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ConfigValue value() {
        skip_space();
        if (pos_ >= s_.size()) fail("missing value");
        const char c = s_[pos_];
        if (c == '[') return array();
        if (c == '"') return basic_string();
        if (c == '\'') return literal_string();
        if (c == '{') fail("inline tables are not supported");
        return scalar();
    }

    ConfigValue array() {
        ConfigValue v;
        v.type = ConfigValue::Type::array;
        v.line = line_;
        ++pos_;
        while (true) {
            skip_space();
            if (pos_ >= s_.size()) fail("unterminated array");
            if (s_[pos_] == ']') {
                ++pos_;
                return v;
            }
            v.items.push_back(value());
            skip_space();
            if (pos_ < s_.size() && s_[pos_] == ',') {
                ++pos_;
            } else if (pos_ < s_.size() && s_[pos_] == ']') {
                continue;
            } else {
                fail("expected ',' or ']' in array");
            }
        }
    }

    ConfigValue basic_string() {
        ConfigValue v;
        v.type = ConfigValue::Type::string;
        v.line = line_;
        ++pos_;
        while (true) {
            if (pos_ >= s_.size() || s_[pos_] == '\n') fail("unterminated string");
            const char c = s_[pos_++];
            if (c == '"') return v;
            if (c != '\\') {
                v.string += c;
                continue;
            }
            if (pos_ >= s_.size()) fail("unterminated escape");
            const char e = s_[pos_++];
            switch (e) {
                case '"': v.string += '"'; break;
                case '\\': v.string += '\\'; break;
                case 'n': v.string += '\n'; break;
                case 't': v.string += '\t'; break;
                case 'r': v.string += '\r'; break;
                default: fail(std::string("unsupported escape '\\") + e + "'");
            }
        }
    }

    ConfigValue literal_string() {
        ConfigValue v;
        v.type = ConfigValue::Type::string;
        v.line = line_;
        const auto end = s_.find('\'', pos_ + 1);
        if (end == std::string::npos || s_.find('\n', pos_) < end) fail("unterminated string");
        v.string = s_.substr(pos_ + 1, end - pos_ - 1);
        pos_ = end + 1;
        return v;
    }

    ConfigValue scalar() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != ',' &&
               s_[pos_] != ']')
            ++pos_;
        std::string tok = s_.substr(start, pos_ - start);
        ConfigValue v;
        v.line = line_;
        if (tok == "true" || tok == "false") {
            v.type = ConfigValue::Type::boolean;
            v.boolean = tok == "true";
            return v;
        }
        std::string body = tok;
        body.erase(std::remove(body.begin(), body.end(), '_'), body.end());
        std::string unsigned_body = body;
        double sign = 1.0;
        if (!unsigned_body.empty() && (unsigned_body[0] == '+' || unsigned_body[0] == '-')) {
            sign = unsigned_body[0] == '-' ? -1.0 : 1.0;
            unsigned_body.erase(0, 1);
        }
        if (unsigned_body == "inf" || unsigned_body == "nan") {
            v.type = ConfigValue::Type::real;
            v.real = unsigned_body == "inf" ? sign * std::numeric_limits<double>::infinity()
                                            : std::numeric_limits<double>::quiet_NaN();
            return v;
        }
        if (body.empty()) fail("missing value");
        const bool floating = body.find_first_of(".eE") != std::string::npos;
        const char* first = body.data() + (body[0] == '+' ? 1 : 0);
        const char* last = body.data() + body.size();
        if (floating) {
            v.type = ConfigValue::Type::real;
            auto [p, ec] = std::from_chars(first, last, v.real);
            if (ec != std::errc() || p != last) fail("invalid number '" + tok + "'");
        } else {
            v.type = ConfigValue::Type::integer;
            auto [p, ec] = std::from_chars(first, last, v.integer);
            if (ec != std::errc() || p != last) fail("invalid value '" + tok + "'");
        }
        return v;
    }
};

/// Drop a `#` comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\' && quote == '"') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

int bracket_balance(const std::string& text) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quote) {
            if (c == '\\' && quote == '"') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            --depth;
        }
    }
    return depth;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

double ConfigValue::as_real(const std::string& what) const {
    if (type == Type::real) return real;
    if (type == Type::integer) return static_cast<double>(integer);
    wrong_type(*this, what, "number");
}

long long ConfigValue::as_integer(const std::string& what) const {
    if (type != Type::integer) wrong_type(*this, what, "integer");
    return integer;
}

bool ConfigValue::as_bool(const std::string& what) const {
    if (type != Type::boolean) wrong_type(*this, what, "boolean");
    return boolean;
}

const std::string& ConfigValue::as_string(const std::string& what) const {
    if (type != Type::string) wrong_type(*this, what, "string");
    return string;
}

const std::vector<ConfigValue>& ConfigValue::as_array(const std::string& what) const {
    if (type != Type::array) wrong_type(*this, what, "array");
    return items;
}

std::vector<double> ConfigValue::as_reals(const std::string& what) const {
    std::vector<double> out;
    for (const auto& v : as_array(what)) out.push_back(v.as_real(what));
    return out;
}

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    doc.sections_[""].line = 0;
    std::string current;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.size() < 3 || line.back() != ']' || line[1] == '[')
                throw ConfigError(lineno, "malformed section header '" + line + "'");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) { return is_bare_key_char(c) || c == '.'; }))
                throw ConfigError(lineno, "invalid section name '" + name + "'");
            if (doc.sections_.count(name)) throw ConfigError(lineno, "duplicate section [" + name + "]");
            doc.sections_[name].line = lineno;
            current = name;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty() || !std::all_of(key.begin(), key.end(), is_bare_key_char))
            throw ConfigError(lineno, "invalid key '" + key + "'");
        std::string value_text = line.substr(eq + 1);
        const int start_line = lineno;
        while (bracket_balance(value_text) > 0) {
            if (!std::getline(in, raw)) throw ConfigError(start_line, "unterminated array for key '" + key + "'");
            ++lineno;
            value_text += '\n' + strip_comment(raw);
        }
        auto& values = doc.sections_[current].values;
        if (values.count(key)) throw ConfigError(start_line, "duplicate key '" + key + "'");
        values.emplace(key, ValueParser(value_text, start_line).parse_all());
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool ConfigDocument::has_section(const std::string& section) const { return sections_.count(section) > 0; }

int ConfigDocument::section_line(const std::string& section) const {
    const auto it = sections_.find(section);
    return it == sections_.end() ? 0 : it->second.line;
}

const ConfigValue* ConfigDocument::find(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    const auto jt = it->second.values.find(key);
    return jt == it->second.values.end() ? nullptr : &jt->second;
}

const ConfigValue& ConfigDocument::require(const std::string& section, const std::string& key) const {
    if (const ConfigValue* v = find(section, key)) return *v;
    const std::string where = section.empty() ? key : section + "." + key;
    throw ConfigError(section_line(section), "missing required key '" + where + "'");
}

double ConfigDocument::real(const std::string& section, const std::string& key, double fallback) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_real(key) : fallback;
}

long long ConfigDocument::integer(const std::string& section, const std::string& key, long long fallback) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_integer(key) : fallback;
}

bool ConfigDocument::boolean(const std::string& section, const std::string& key, bool fallback) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_bool(key) : fallback;
}

std::string ConfigDocument::string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_string(key) : fallback;
}

void ConfigDocument::expect_sections(std::initializer_list<const char*> sections) const {
    for (const auto& [name, sec] : sections_) {
        if (name.empty()) continue;
        if (std::none_of(sections.begin(), sections.end(), [&](const char* s) { return name == s; }))
            throw ConfigError(sec.line, "unknown section [" + name + "]");
    }
}

void ConfigDocument::expect_keys(const std::string& section, std::initializer_list<const char*> keys) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return;
    for (const auto& [key, value] : it->second.values)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
            throw ConfigError(value.line, "unknown key '" + key + "'" +
                                              (section.empty() ? std::string() : " in [" + section + "]"));
}

}  // namespace kbie
