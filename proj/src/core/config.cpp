#include "core/config.hpp"

#include <fstream>
#include <sstream>

#include "core/util.hpp"

namespace vumac {

namespace {
std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}
}  // namespace

IniFile IniFile::parse_string(const std::string& text, const std::string& origin) {
  IniFile ini;
  ini.origin_ = origin;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw VumacError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw VumacError(origin + ":" + std::to_string(lineno) + ": empty section name");
      ini.data_[section];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw VumacError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw VumacError(origin + ":" + std::to_string(lineno) + ": empty key");
    ini.data_[section][key] = trim(line.substr(eq + 1));
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw VumacError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::string IniFile::get_string(const std::string& section, const std::string& key) const {
  auto s = data_.find(section);
  if (s == data_.end() || !s->second.count(key))
    throw VumacError("missing config key [" + section + "] " + key);
  return s->second.at(key);
}

std::string IniFile::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw VumacError("invalid number for [" + section + "] " + key + ": '" + v + "'");
  }
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int IniFile::get_int(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    std::size_t pos = 0;
    long val = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(val);
  } catch (const std::exception&) {
    throw VumacError("invalid integer for [" + section + "] " + key + ": '" + v + "'");
  }
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> IniFile::get_doubles(const std::string& section,
                                         const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get_string(section, key))) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw VumacError("invalid number list for [" + section + "] " + key + ": '" + item + "'");
    }
  }
  if (out.empty()) throw VumacError("empty list for [" + section + "] " + key);
  return out;
}

std::vector<double> IniFile::get_doubles(const std::string& section, const std::string& key,
                                         const std::vector<double>& fallback) const {
  return has(section, key) ? get_doubles(section, key) : fallback;
}

std::vector<std::string> IniFile::get_strings(const std::string& section, const std::string& key,
                                              const std::vector<std::string>& fallback) const {
  if (!has(section, key)) return fallback;
  auto out = split_list(get_string(section, key));
  if (out.empty()) throw VumacError("empty list for [" + section + "] " + key);
  return out;
}

ProblemConfig problem_config_from_ini(const IniFile& ini) {
  ProblemConfig cfg;
  cfg.params.num_users = ini.get_int("system", "num_users", 2);
  cfg.params.horizon = ini.get_int("system", "horizon", 10);
  cfg.params.r_max = ini.get_double("system", "r_max", 4.0);
  cfg.params.b_max = ini.get_double("system", "b_max", 4.0);
  cfg.params.cost_fn =
      make_cost_fn(ini.get_string("system", "cost_fn", "exp-distortion"), cfg.params.r_max);
  cfg.params.rate_fn = make_rate_fn(ini.get_string("system", "rate_fn", "log-rate"));
  cfg.params.validate();

  const int M = cfg.params.num_users;
  DiscreteDist energy{ini.get_doubles("stochastic", "energy_support", {0.0, 1.0}),
                      ini.get_doubles("stochastic", "energy_probs", {0.6, 0.4})};
  DiscreteDist channel{ini.get_doubles("stochastic", "channel_support", {0.1, 1.0}),
                       ini.get_doubles("stochastic", "channel_probs", {0.4, 0.6})};
  DiscreteDist weight{ini.get_doubles("stochastic", "weight_support", {1.0, 2.0}),
                      ini.get_doubles("stochastic", "weight_probs", {0.6, 0.4})};
  double arrival = ini.get_double("stochastic", "arrival_prob", 0.4);
  cfg.model.energy.assign(M, energy);
  cfg.model.channel.assign(M, channel);
  cfg.model.arrival_prob.assign(M, arrival);
  cfg.model.weight = weight;
  cfg.model.validate(cfg.params);

  auto& ex = cfg.experiment;
  ex.disc.battery_grid = ini.get_doubles("mdp", "battery_grid", {0, 1, 2, 3, 4});
  ex.disc.bits_grid = ini.get_doubles("mdp", "bits_grid", {0, 1, 2, 3, 4});
  ex.disc.power_grid = ini.get_doubles("mdp", "power_grid", {0, 1, 2, 3, 4});
  ex.disc.rate_grid = ini.get_doubles("mdp", "rate_grid", {0, 1, 2, 3, 4});

  ex.offline_paths = ini.get_int("offline", "num_paths", 2000);
  ex.offline_ktol = ini.get_double("offline", "ktol", 1e-8);
  if (ex.offline_paths < 2) throw VumacError("[offline] num_paths must be >= 2");
  if (ex.offline_ktol <= 0) throw VumacError("[offline] ktol must be > 0");

  auto hidden = ini.get_doubles("nn", "hidden", {64, 64});
  ex.train.hidden.clear();
  for (double h : hidden) {
    if (h < 1 || h != static_cast<int>(h))
      throw VumacError("invalid hidden layer sizes in [nn] hidden");
    ex.train.hidden.push_back(static_cast<int>(h));
  }
  ex.train.learning_rate = ini.get_double("nn", "learning_rate", 1e-3);
  ex.train.momentum = ini.get_double("nn", "momentum", 0.9);
  ex.train.batch_size = ini.get_int("nn", "batch_size", 64);
  ex.train.max_epochs = ini.get_int("nn", "max_epochs", 200);
  ex.train.patience = ini.get_int("nn", "patience", 20);
  ex.train.val_fraction = ini.get_double("nn", "val_fraction", 0.1);

  ex.sweep_param = ini.get_string("experiment", "sweep", "version_prob");
  ex.sweep_values = ini.get_doubles("experiment", "sweep_values", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
  ex.policies = ini.get_strings("experiment", "policies", {"offline", "nn", "mdp", "greedy"});
  ex.episodes = ini.get_int("experiment", "episodes", 10000);
  double seed = ini.get_double("experiment", "seed", 1.0);
  if (seed < 0 || seed != static_cast<std::uint64_t>(seed))
    throw VumacError("invalid value for [experiment] seed");
  ex.seed = static_cast<std::uint64_t>(seed);
  return cfg;
}

ProblemConfig load_problem_config(const std::string& path) {
  return problem_config_from_ini(IniFile::parse_file(path));
}

}  // namespace vumac
