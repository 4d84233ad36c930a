#include "texharm/keyvalue.hpp"

#include "texharm/errors.hpp"
#include "texharm/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace texharm {

namespace {

constexpr const char* kModule = "config";

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool valid_key(const std::string& key) {
    return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    });
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        parts.push_back(trim(text.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return parts;
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    if (!t.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        fail(ErrorKind::Config, kModule, what + ": expected a finite number, got '" + text + "'");
    }
    return v;
}

std::int64_t parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        fail(ErrorKind::Config, kModule, what + ": expected an integer, got '" + text + "'");
    }
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : split_commas(text)) out.push_back(parse_double(part, what));
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<std::int64_t> out;
    for (const auto& part : split_commas(text)) out.push_back(parse_int(part, what));
    return out;
}

std::string format_exact(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
    KeyValues kv;
    kv.source_ = source;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        ++line_no;
        start = nl == std::string::npos ? text.size() + 1 : nl + 1;

        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            fail(ErrorKind::Config, kModule, where + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) fail(ErrorKind::Config, kModule, where + ": invalid key '" + key + "'");
        if (value.empty()) fail(ErrorKind::Config, kModule, where + ": empty value for '" + key + "'");
        if (!kv.entries_.emplace(key, value).second) {
            fail(ErrorKind::Config, kModule, where + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const Error&) {
        fail(ErrorKind::Config, kModule, "cannot read config file " + path.string());
    }
    return parse(text, path.string());
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> KeyValues::get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_double(*v, key);
}

std::optional<std::int64_t> KeyValues::get_int(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_int(*v, key);
}

std::optional<bool> KeyValues::get_bool(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    fail(ErrorKind::Config, kModule, key + ": expected true/false, got '" + *v + "'");
}

std::optional<std::vector<double>> KeyValues::get_doubles(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_double_list(*v, key);
}

std::optional<std::vector<std::int64_t>> KeyValues::get_ints(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_int_list(*v, key);
}

void KeyValues::reject_unknown(const std::vector<std::string>& known) const {
    for (const auto& [key, value] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            fail(ErrorKind::Config, kModule, source_ + ": unknown key '" + key + "'");
        }
    }
}

}  // namespace texharm
