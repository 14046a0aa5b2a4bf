#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace nbiot::sim {

/// Flat key-value scenario file with [section] headers; keys are exposed
/// as "section.key". Values may be comma-separated lists.
class Scenario {
  public:
    static Scenario parse_file(const std::string& path);
    static Scenario parse_text(const std::string& text);

    bool has(const std::string& key) const { return values_.contains(key); }
    std::string get_string(const std::string& key, const std::string& fallback = "") const;
    long get_int(const std::string& key, long fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback = {}) const;

    std::string name() const { return get_string("scenario.name", "unnamed"); }
    std::string kind() const { return get_string("scenario.kind"); }
    int trials() const { return static_cast<int>(get_int("scenario.trials", 100)); }
    std::uint64_t seed_base() const;

  private:
    std::map<std::string, std::string> values_;
};

/// Runs the scenario, writing trials.csv and summary.csv into out_dir.
/// Returns 0 on success; throws on configuration errors.
int run_scenario(const Scenario& scenario, const std::string& out_dir, std::ostream& log);

/// Deterministic parallel trial loop: results keyed by index.
void parallel_trials(int count, const std::function<void(int)>& body);

}  // namespace nbiot::sim
