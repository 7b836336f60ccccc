#include "pirsense/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pirsense/errors.hpp"

namespace pirsense {

namespace {

// Just enough TOML for this tool's config schema: [section] / [[section]]
// headers, scalar and single-line array values, # comments.

struct TomlValue {
    enum class Kind { string, integer, floating, boolean, array } kind;
    std::string str;
    std::int64_t integer = 0;
    double floating = 0.0;
    bool boolean = false;
    std::vector<TomlValue> items;
};

using TomlTable = std::map<std::string, TomlValue>;

struct TomlDoc {
    std::map<std::string, TomlTable> singles;
    std::map<std::string, std::vector<TomlTable>> arrays;
};

[[noreturn]] void fail(const std::string& origin, long line, const std::string& message) {
    throw ParseError(origin + ":" + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    return text;
}

std::string parse_basic_string(std::string_view text, const std::string& origin, long line,
                               std::size_t& pos) {
    std::string out;
    ++pos;  // opening quote
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == '"') {
            ++pos;
            return out;
        }
        if (c == '\\') {
            ++pos;
            if (pos >= text.size()) fail(origin, line, "dangling escape");
            switch (text[pos]) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: fail(origin, line, "unsupported escape sequence");
            }
            ++pos;
        } else {
            out.push_back(c);
            ++pos;
        }
    }
    fail(origin, line, "unterminated string");
}

TomlValue parse_value(std::string_view text, const std::string& origin, long line,
                      std::size_t& pos);

TomlValue parse_array(std::string_view text, const std::string& origin, long line,
                      std::size_t& pos) {
    TomlValue out;
    out.kind = TomlValue::Kind::array;
    ++pos;  // opening bracket
    while (true) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        if (pos >= text.size()) fail(origin, line, "unterminated array");
        if (text[pos] == ']') {
            ++pos;
            return out;
        }
        out.items.push_back(parse_value(text, origin, line, pos));
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        if (pos < text.size() && text[pos] == ',') {
            ++pos;
        } else if (pos < text.size() && text[pos] == ']') {
            ++pos;
            return out;
        } else {
            fail(origin, line, "expected ',' or ']' in array");
        }
    }
}

TomlValue parse_value(std::string_view text, const std::string& origin, long line,
                      std::size_t& pos) {
    TomlValue out;
    if (text[pos] == '"') {
        out.kind = TomlValue::Kind::string;
        out.str = parse_basic_string(text, origin, line, pos);
        return out;
    }
    if (text[pos] == '[') return parse_array(text, origin, line, pos);

    std::size_t end = pos;
    while (end < text.size() && text[end] != ',' && text[end] != ']' && text[end] != ' ' &&
           text[end] != '\t' && text[end] != '#')
        ++end;
    const std::string token(text.substr(pos, end - pos));
    pos = end;

    if (token == "true" || token == "false") {
        out.kind = TomlValue::Kind::boolean;
        out.boolean = token == "true";
        return out;
    }
    if (token.find_first_of(".eE") == std::string::npos ||
        (token.size() > 1 && (token[0] == '0' && token[1] == 'x'))) {
        std::int64_t value = 0;
        const auto [ptr, ec] =
            std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec == std::errc() && ptr == token.data() + token.size()) {
            out.kind = TomlValue::Kind::integer;
            out.integer = value;
            return out;
        }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(origin, line, "cannot parse value '" + token + "'");
    out.kind = TomlValue::Kind::floating;
    out.floating = value;
    return out;
}

TomlDoc parse_toml(const std::string& text, const std::string& origin) {
    TomlDoc doc;
    TomlTable* current = nullptr;
    std::istringstream in(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        if (line.front() == '[') {
            const bool is_array = line.size() > 1 && line[1] == '[';
            const auto close = line.find(is_array ? "]]" : "]");
            if (close == std::string_view::npos) fail(origin, line_no, "unterminated header");
            const std::string name(trim(line.substr(is_array ? 2 : 1, close - (is_array ? 2 : 1))));
            if (name.empty()) fail(origin, line_no, "empty section name");
            if (is_array) {
                doc.arrays[name].emplace_back();
                current = &doc.arrays[name].back();
            } else {
                if (doc.singles.count(name)) fail(origin, line_no, "duplicate section " + name);
                current = &doc.singles[name];
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(origin, line_no, "expected key = value");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) fail(origin, line_no, "empty key");
        if (current == nullptr) fail(origin, line_no, "key outside any section");

        std::string_view rest = trim(line.substr(eq + 1));
        if (rest.empty()) fail(origin, line_no, "missing value for " + key);
        std::size_t pos = 0;
        const TomlValue value = parse_value(rest, origin, line_no, pos);
        const std::string_view tail = trim(rest.substr(pos));
        if (!tail.empty() && tail.front() != '#')
            fail(origin, line_no, "trailing content after value");
        if (current->count(key)) fail(origin, line_no, "duplicate key " + key);
        (*current)[key] = value;
    }
    return doc;
}

// -- schema mapping ---------------------------------------------------------

class TableReader {
public:
    TableReader(const TomlTable& table, std::string where, std::string origin)
        : table_(table), where_(std::move(where)), origin_(std::move(origin)) {}

    ~TableReader() = default;

    std::string take_string(const std::string& key, const std::string& fallback) {
        const TomlValue* value = find(key);
        if (!value) return fallback;
        if (value->kind != TomlValue::Kind::string) bad_type(key, "string");
        return value->str;
    }

    double take_number(const std::string& key, double fallback) {
        const TomlValue* value = find(key);
        if (!value) return fallback;
        if (value->kind == TomlValue::Kind::integer)
            return static_cast<double>(value->integer);
        if (value->kind == TomlValue::Kind::floating) return value->floating;
        bad_type(key, "number");
    }

    std::int64_t take_integer(const std::string& key, std::int64_t fallback) {
        const TomlValue* value = find(key);
        if (!value) return fallback;
        if (value->kind != TomlValue::Kind::integer) bad_type(key, "integer");
        return value->integer;
    }

    std::vector<std::string> take_string_list(const std::string& key) {
        const TomlValue* value = find(key);
        if (!value) return {};
        if (value->kind != TomlValue::Kind::array) bad_type(key, "array of strings");
        std::vector<std::string> out;
        for (const TomlValue& item : value->items) {
            if (item.kind != TomlValue::Kind::string) bad_type(key, "array of strings");
            out.push_back(item.str);
        }
        return out;
    }

    bool has(const std::string& key) const { return table_.count(key) != 0; }

    void check_consumed() const {
        for (const auto& [key, value] : table_)
            if (!consumed_.count(key))
                throw ParseError(origin_ + ": unknown key '" + key + "' in " + where_);
    }

private:
    const TomlValue* find(const std::string& key) {
        consumed_.insert(key);
        const auto it = table_.find(key);
        return it == table_.end() ? nullptr : &it->second;
    }

    [[noreturn]] void bad_type(const std::string& key, const char* expected) {
        throw ParseError(origin_ + ": key '" + key + "' in " + where_ + " must be a " +
                         expected);
    }

    const TomlTable& table_;
    std::string where_;
    std::string origin_;
    std::set<std::string> consumed_;
};

}  // namespace

AnalysisConfig parse_config(const std::string& text, const std::string& origin) {
    const TomlDoc doc = parse_toml(text, origin);
    AnalysisConfig config;

    for (const auto& [name, table] : doc.singles)
        if (name != "data" && name != "roles" && name != "grid" && name != "bootstrap" &&
            name != "output")
            throw ParseError(origin + ": unknown section [" + name + "]");
    for (const auto& [name, tables] : doc.arrays)
        if (name != "bounds") throw ParseError(origin + ": unknown section [[" + name + "]]");

    if (const auto it = doc.singles.find("data"); it != doc.singles.end()) {
        TableReader reader(it->second, "[data]", origin);
        config.csv_path = reader.take_string("csv", "");
        config.cov_path = reader.take_string("covariance", "");
        config.cov_n = reader.take_integer("n", 0);
        reader.check_consumed();
    }
    if (const auto it = doc.singles.find("roles"); it != doc.singles.end()) {
        TableReader reader(it->second, "[roles]", origin);
        config.outcome = reader.take_string("outcome", "");
        config.treatment = reader.take_string("treatment", "");
        config.instrument = reader.take_string("instrument", "");
        config.xdot = reader.take_string_list("xdot");
        config.xtilde = reader.take_string_list("xtilde");
        reader.check_consumed();
    }
    if (const auto it = doc.arrays.find("bounds"); it != doc.arrays.end()) {
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            TableReader reader(it->second[i], "[[bounds]] #" + std::to_string(i + 1), origin);
            BoundConfig bound;
            bound.kind = reader.take_string("kind", "");
            if (bound.kind.empty())
                throw ParseError(origin + ": [[bounds]] entry needs a kind");
            bound.lower = reader.take_number("lower", 0.0);
            bound.upper = reader.take_number("upper", 0.0);
            bound.b = reader.take_number("b", 0.0);
            bound.compare = reader.take_string_list("compare");
            bound.given_extra = reader.take_string_list("given_extra");
            bound.axis = static_cast<int>(reader.take_integer("axis", 0));
            bound.axis_min = reader.take_number("axis_min", 0.0);
            bound.axis_max = reader.take_number("axis_max", -1.0);
            reader.check_consumed();
            config.bounds.push_back(std::move(bound));
        }
    }
    if (const auto it = doc.singles.find("grid"); it != doc.singles.end()) {
        TableReader reader(it->second, "[grid]", origin);
        config.grid.n_a = static_cast<int>(reader.take_integer("n_a", config.grid.n_a));
        config.grid.n_b = static_cast<int>(reader.take_integer("n_b", config.grid.n_b));
        config.grid.n_g = static_cast<int>(reader.take_integer("n_g", config.grid.n_g));
        reader.check_consumed();
    }
    if (const auto it = doc.singles.find("bootstrap"); it != doc.singles.end()) {
        TableReader reader(it->second, "[bootstrap]", origin);
        config.boot.n_boot = static_cast<int>(reader.take_integer("n_boot", config.boot.n_boot));
        config.boot.level = reader.take_number("level", config.boot.level);
        const std::string method = reader.take_string("method", "percentile");
        const auto parsed = interval_method_from_string(method);
        if (!parsed) throw ParseError(origin + ": unknown bootstrap method '" + method + "'");
        config.boot.method = *parsed;
        config.boot.seed = static_cast<std::uint64_t>(reader.take_integer("seed", 0));
        reader.check_consumed();
    }
    if (const auto it = doc.singles.find("output"); it != doc.singles.end()) {
        TableReader reader(it->second, "[output]", origin);
        config.out_path = reader.take_string("path", "");
        config.out_format = reader.take_string("format", "json");
        reader.check_consumed();
    }

    if (config.csv_path.empty() && config.cov_path.empty())
        throw ParseError(origin + ": [data] must name a csv or covariance source");
    if (!config.csv_path.empty() && !config.cov_path.empty())
        throw ParseError(origin + ": [data] cannot name both csv and covariance");
    if (!config.cov_path.empty() && config.cov_n < 2)
        throw ParseError(origin + ": covariance input needs the sample size n");
    if (config.outcome.empty() || config.treatment.empty())
        throw ParseError(origin + ": [roles] must name outcome and treatment");
    return config;
}

AnalysisConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

}  // namespace pirsense
