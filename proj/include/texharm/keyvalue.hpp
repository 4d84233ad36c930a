#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace texharm {

/// Flat `key = value` text. Blank lines and anything after '#' are ignored;
/// keys are [A-Za-z0-9_.-]+ and may appear once. Lists are comma separated.
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& source = "<text>");
    static KeyValues load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return entries_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

    std::optional<double> get_double(const std::string& key) const;
    std::optional<std::int64_t> get_int(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<double>> get_doubles(const std::string& key) const;
    std::optional<std::vector<std::int64_t>> get_ints(const std::string& key) const;

    /// ErrorKind::Config naming the first key not in `known`.
    void reject_unknown(const std::vector<std::string>& known) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    std::string source_;
};

double parse_double(const std::string& text, const std::string& what);
std::int64_t parse_int(const std::string& text, const std::string& what);
std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& what);

/// Shortest text that parses back to the same double.
std::string format_exact(double v);

}  // namespace texharm
