#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levymfg/errors.hpp"
#include "levymfg/models.hpp"
#include "levymfg/solver.hpp"

namespace mfg {

// Flat view of an INI-style config: "[section]" headers, "key = value" lines,
// '#' or ';' comments.  Keys are stored as "section.key".
class Config {
  public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void apply_override(const std::string& dotted_key, const std::string& value);

    bool has(const std::string& dotted_key) const;
    std::string get_string(const std::string& dotted_key) const;
    std::string get_string(const std::string& dotted_key, const std::string& fallback) const;
    double get_double(const std::string& dotted_key) const;
    double get_double(const std::string& dotted_key, double fallback) const;
    long long get_int(const std::string& dotted_key) const;
    long long get_int(const std::string& dotted_key, long long fallback) const;
    bool get_bool(const std::string& dotted_key, bool fallback) const;

    // canonical serialization (sorted keys) and its FNV-1a hash, which every
    // output artifact embeds for reproducibility
    std::string canonical() const;
    std::string hash() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

// [model] section -> model object.  Keys: family = compound_poisson |
// stable | brownian; lambda1, alpha1, lambda2, alpha2; alpha, c_plus, c_minus;
// mu, sigma.
LevyModel model_from_config(const Config& cfg);

// [cost] section -> cost spec.  Keys: g (quadratic), h (one | exp_cos |
// one_plus_abs), f (identity | abs | square), q_u, q_d (or q for both).
CostSpec cost_from_config(const Config& cfg);

ConstantsMode mode_from_config(const Config& cfg);  // solver.legacy_constants

struct McSettings {
    std::uint64_t seed = 1;
    std::size_t n_paths = 10000;
    double horizon = 1e4;
    double grid_step = 1e-3;
    int workers = 1;
};
McSettings mc_from_config(const Config& cfg);

}  // namespace mfg
