#include "levymfg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mfg {

namespace {

std::string trim(const std::string& s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto begin = std::find_if_not(s.begin(), s.end(), is_space);
    auto end = std::find_if_not(s.rbegin(), s.rend(), is_space).base();
    return begin < end ? std::string(begin, end) : std::string();
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// strips a trailing comment introduced by whitespace + '#' or ';'
std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') &&
            (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))))
            return line.substr(0, i);
    }
    return line;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ConfigError("malformed section header at line " +
                                  std::to_string(line_no));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name at line " + std::to_string(line_no));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("empty key at line " + std::to_string(line_no));
        if (section.empty())
            throw ConfigError("key '" + key + "' before any [section] at line " +
                              std::to_string(line_no));
        cfg.entries_[section + "." + key] = value;
    }
    return cfg;
}

void Config::apply_override(const std::string& dotted_key, const std::string& value) {
    if (trim(dotted_key).empty()) throw ConfigError("override key is empty");
    entries_[trim(dotted_key)] = trim(value);
}

bool Config::has(const std::string& dotted_key) const {
    return entries_.count(dotted_key) > 0;
}

std::string Config::get_string(const std::string& dotted_key) const {
    const auto it = entries_.find(dotted_key);
    if (it == entries_.end()) throw ConfigError("missing config key: " + dotted_key);
    return it->second;
}

std::string Config::get_string(const std::string& dotted_key,
                               const std::string& fallback) const {
    const auto it = entries_.find(dotted_key);
    return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& dotted_key) const {
    const std::string raw = get_string(dotted_key);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("not a number: " + dotted_key + " = " + raw);
    return v;
}

double Config::get_double(const std::string& dotted_key, double fallback) const {
    return has(dotted_key) ? get_double(dotted_key) : fallback;
}

long long Config::get_int(const std::string& dotted_key) const {
    const std::string raw = get_string(dotted_key);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(raw.c_str(), &end, 10);
    if (end == raw.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("not an integer: " + dotted_key + " = " + raw);
    return v;
}

long long Config::get_int(const std::string& dotted_key, long long fallback) const {
    return has(dotted_key) ? get_int(dotted_key) : fallback;
}

bool Config::get_bool(const std::string& dotted_key, bool fallback) const {
    if (!has(dotted_key)) return fallback;
    const std::string v = lower(get_string(dotted_key));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("not a boolean: " + dotted_key + " = " + v);
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

std::string Config::hash() const {
    // FNV-1a, 64-bit
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : canonical()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

LevyModel model_from_config(const Config& cfg) {
    const std::string family = lower(cfg.get_string("model.family"));
    LevyModel model;
    if (family == "compound_poisson") {
        model = CompoundPoissonTwoExp{
            cfg.get_double("model.lambda1"), cfg.get_double("model.alpha1"),
            cfg.get_double("model.lambda2"), cfg.get_double("model.alpha2")};
    } else if (family == "stable") {
        model = StrictlyStable{cfg.get_double("model.alpha"), cfg.get_double("model.c_plus"),
                               cfg.get_double("model.c_minus")};
    } else if (family == "brownian") {
        model = BrownianDrift{cfg.get_double("model.mu", 0.0),
                              cfg.get_double("model.sigma", 1.0)};
    } else {
        throw ConfigError("unknown model family: " + family);
    }
    try {
        validate(model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
    return model;
}

CostSpec cost_from_config(const Config& cfg) {
    CostSpec cost;
    const std::string g = lower(cfg.get_string("cost.g", "quadratic"));
    if (g != "quadratic") throw ConfigError("unknown state cost: " + g);
    cost.g = StateCost::Quadratic;
    try {
        cost.h = field_weight_from_name(lower(cfg.get_string("cost.h", "one")));
        cost.f = field_function_from_name(lower(cfg.get_string("cost.f", "identity")));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const double q = cfg.get_double("cost.q", 0.5);
    cost.q_u = cfg.get_double("cost.q_u", q);
    cost.q_d = cfg.get_double("cost.q_d", q);
    if (cost.q_u < 0 || cost.q_d < 0) throw ConfigError("barrier costs must be nonnegative");
    return cost;
}

ConstantsMode mode_from_config(const Config& cfg) {
    return cfg.get_bool("solver.legacy_constants", false) ? ConstantsMode::LegacyTables
                                                          : ConstantsMode::Consistent;
}

McSettings mc_from_config(const Config& cfg) {
    McSettings mc;
    mc.seed = static_cast<std::uint64_t>(cfg.get_int("mc.seed", 1));
    const long long n = cfg.get_int("mc.n_paths", 10000);
    if (n < 1) throw ConfigError("mc.n_paths must be positive");
    mc.n_paths = static_cast<std::size_t>(n);
    mc.horizon = cfg.get_double("mc.horizon", 1e4);
    if (mc.horizon <= 0) throw ConfigError("mc.horizon must be positive");
    mc.grid_step = cfg.get_double("mc.grid_step", 1e-3);
    if (mc.grid_step <= 0) throw ConfigError("mc.grid_step must be positive");
    const long long w = cfg.get_int("mc.workers", 1);
    if (w < 1) throw ConfigError("mc.workers must be positive");
    mc.workers = static_cast<int>(w);
    return mc;
}

}  // namespace mfg
