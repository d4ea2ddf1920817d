#pragma once
#include <map>
#include <string>
#include <vector>

#include "core/simulate.hpp"
#include "core/types.hpp"

namespace vumac {

// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
// comments. Lookups throw VumacError naming the offending section/key.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& section, const std::string& key,
                                       const std::vector<std::string>& fallback) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::string origin_;
};

struct ProblemConfig {
  SystemParams params;
  StochasticModel model;
  ExperimentSpec experiment;  // includes grids, training and offline settings
};

// Reads the whole problem description; every field has the documented
// default, so an empty file yields the reference two-user setup.
ProblemConfig load_problem_config(const std::string& path);
ProblemConfig problem_config_from_ini(const IniFile& ini);

}  // namespace vumac
