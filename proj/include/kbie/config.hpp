#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kbie {

/// One value of a TOML-style document: boolean, integer, real, string, or array.
struct ConfigValue {
    enum class Type { boolean, integer, real, string, array };

    Type type = Type::integer;
    bool boolean = false;
    long long integer = 0;
    double real = 0.0;
    std::string string;
    std::vector<ConfigValue> items;
    int line = 0;

    /// Integers promote to reals; anything else is a ConfigError naming `what`.
    double as_real(const std::string& what) const;
    long long as_integer(const std::string& what) const;
    bool as_bool(const std::string& what) const;
    const std::string& as_string(const std::string& what) const;
    const std::vector<ConfigValue>& as_array(const std::string& what) const;
    std::vector<double> as_reals(const std::string& what) const;
};

/// Subset of TOML: `[section]` headers, `key = value` pairs, `#` comments,
/// basic and literal strings, integers, floats (incl. inf/nan), booleans and
/// (nested, possibly multi-line) arrays. Top-level keys live in section "".
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);
    static ConfigDocument load(const std::filesystem::path& path);

    bool has_section(const std::string& section) const;
    int section_line(const std::string& section) const;
    const ConfigValue* find(const std::string& section, const std::string& key) const;
    /// Throws ConfigError (line of the section header, or 0) when missing.
    const ConfigValue& require(const std::string& section, const std::string& key) const;

    double real(const std::string& section, const std::string& key, double fallback) const;
    long long integer(const std::string& section, const std::string& key, long long fallback) const;
    bool boolean(const std::string& section, const std::string& key, bool fallback) const;
    std::string string(const std::string& section, const std::string& key, const std::string& fallback) const;

    /// ConfigError for any section outside `sections`.
    void expect_sections(std::initializer_list<const char*> sections) const;
    /// ConfigError for any key of `section` outside `keys`.
    void expect_keys(const std::string& section, std::initializer_list<const char*> keys) const;

private:
    struct Section {
        int line = 0;
        std::map<std::string, ConfigValue> values;
    };
    std::map<std::string, Section> sections_;
};

}  // namespace kbie
