#ifndef BALANS_CONFIG_HPP
#define BALANS_CONFIG_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "balans/problem.hpp"

namespace balans {

/// Flat TOML subset: [table] headers, key = value lines, values are quoted
/// strings, numbers, booleans or single-line arrays of numbers. '#' starts
/// a comment.
class TomlDoc {
public:
  static TomlDoc parse_file(const std::string& path);
  static TomlDoc parse_text(const std::string& text);

  bool has(const std::string& table, const std::string& key) const;
  std::string get_string(const std::string& table, const std::string& key) const;
  double get_number(const std::string& table, const std::string& key) const;
  bool get_bool(const std::string& table, const std::string& key) const;
  std::vector<double> get_array(const std::string& table, const std::string& key) const;

  /// Throws ConfigError when a table holds a key outside `allowed`.
  void check_keys(const std::string& table, const std::vector<std::string>& allowed) const;

private:
  struct Value {
    enum class Kind { string, number, boolean, array } kind;
    std::string str;
    double num = 0.0;
    bool flag = false;
    std::vector<double> arr;
  };
  const Value& lookup(const std::string& table, const std::string& key) const;
  std::map<std::string, std::map<std::string, Value>> tables_;
};

struct RunConfig {
  // [problem]
  std::string catalog;             // empty when fully inline
  std::string f = "0", g = "0";
  std::string u_o = "0", u_a = "0", u_b = "0";
  double a = 0.0, b = 1.0, T = 1.0;
  // [grid]
  int N = 100;
  std::optional<double> alpha;
  double cfl_fraction = 1.0;
  int quad_points = 3;
  bool allow_unsafe_cfl = false;
  // [outputs]
  std::vector<double> snapshot_times;
  bool dump = false;
  std::string out_dir = "out";
  // [audits]
  bool audit_bounds_on = true;
  bool audit_entropy_on = true;
  int k_count = 21;
  bool audit_bln_on = true;
};

RunConfig load_config(const std::string& path);
RunConfig config_from_text(const std::string& text);

/// Builds the problem instance from a config: catalog entry fields first,
/// then any inline overrides.
Ibvp problem_from_config(const RunConfig& cfg);
Grid grid_from_config(const Ibvp& p, const RunConfig& cfg);

} // namespace balans

#endif
