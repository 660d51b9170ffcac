#include "audiofp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace audiofp {

namespace pt = boost::property_tree;

namespace {

pt::ptree read_ini(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return tree;
}

template <typename T>
T get(const pt::ptree& section, const std::string& where, const std::string& key) {
  try {
    return section.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ConfigError(where + "." + key + ": invalid value '" + section.get<std::string>(key, "") +
                      "'");
  }
}

template <typename T>
void assign(const pt::ptree& section, const std::string& where, const std::string& key, T& out) {
  if (section.find(key) == section.not_found()) return;
  try {
    out = section.get<T>(key);
  } catch (const pt::ptree_error&) {
    throw ConfigError(where + "." + key + ": invalid value '" + section.get<std::string>(key, "") +
                      "'");
  }
}

void only_keys(const pt::ptree& section, const std::string& where,
               std::initializer_list<std::string_view> keys) {
  for (const auto& [key, value] : section) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError("unknown key " + where + "." + key);
    }
  }
}

std::vector<double> parse_list(const std::string& where, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(where + ": bad number '" + item + "'");
    }
  }
  return out;
}

std::array<double, kVectorCount> parse_scale(const pt::ptree& section, const std::string& where,
                                             std::array<double, kVectorCount> scale) {
  for (const auto& [key, value] : section) {
    const auto v = parse_vector(key);
    if (!v) throw ConfigError("unknown vector " + where + "." + key);
    scale[vector_index(*v)] = get<double>(section, where, key);
  }
  return scale;
}

template <typename F>
auto wrap_validation(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

DeviceFile parse_device_file(std::istream& in) {
  const pt::ptree tree = read_ini(in);
  DeviceFile file;
  for (const auto& [name, section] : tree) {
    if (name == "device") {
      only_keys(section, name,
                {"class_id", "perturb_seed", "variant_count", "fickleness_p", "fickle_scale"});
      DeviceProfile& d = file.device;
      assign(section, name, "class_id", d.class_id);
      assign(section, name, "perturb_seed", d.perturb_seed);
      assign(section, name, "variant_count", d.variant_count);
      assign(section, name, "fickleness_p", d.fickleness_p);
      if (auto s = section.get_optional<std::string>("fickle_scale")) {
        const auto values = parse_list(name + ".fickle_scale", *s);
        if (values.size() != kVectorCount) {
          throw ConfigError("device.fickle_scale: expected 7 comma-separated values");
        }
        std::copy(values.begin(), values.end(), d.fickle_scale.begin());
      }
    } else if (name == "record") {
      only_keys(section, name,
                {"user_id", "ip_address", "ip_salt", "ua", "sample_rate", "max_channel_count",
                 "base_latency", "canvas", "fonts", "country", "timestamp"});
      assign(section, name, "user_id", file.user_id);
      assign(section, name, "ip_address", file.ip_address);
      assign(section, name, "ip_salt", file.ip_salt);
      assign(section, name, "ua", file.ua);
      assign(section, name, "sample_rate", file.audio_config.sample_rate);
      assign(section, name, "max_channel_count", file.audio_config.max_channel_count);
      assign(section, name, "base_latency", file.audio_config.base_latency);
      assign(section, name, "canvas", file.canvas);
      assign(section, name, "fonts", file.fonts);
      if (auto c = section.get_optional<std::string>("country"); c && !c->empty()) file.country = *c;
      assign(section, name, "timestamp", file.timestamp);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  if (file.user_id.empty()) throw ConfigError("record.user_id must not be empty");
  wrap_validation([&] { file.device.validate(); });
  return file;
}

DeviceFile load_device_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_device_file(in);
}

PopulationConfig parse_population_config(std::istream& in) {
  const pt::ptree tree = read_ini(in);
  PopulationConfig cfg;
  bool mix_given = false;
  std::map<std::string, FamilyFickleness> families;
  for (const auto& [name, section] : tree) {
    if (name == "population") {
      only_keys(section, name,
                {"num_users", "num_classes", "zipf_exponent", "class_weights", "iterations", "seed",
                 "ip_salt"});
      assign(section, name, "num_users", cfg.num_users);
      assign(section, name, "num_classes", cfg.num_classes);
      assign(section, name, "zipf_exponent", cfg.zipf_exponent);
      assign(section, name, "iterations", cfg.iterations);
      assign(section, name, "seed", cfg.seed);
      assign(section, name, "ip_salt", cfg.ip_salt);
      if (auto w = section.get_optional<std::string>("class_weights"); w && !w->empty()) {
        cfg.class_weights = parse_list(name + ".class_weights", *w);
      }
    } else if (name == "browser_mix") {
      if (!mix_given) cfg.browser_mix.clear();
      mix_given = true;
      for (const auto& [family, value] : section) {
        cfg.browser_mix[family] = get<double>(section, name, family);
      }
    } else if (name.starts_with("family.")) {
      only_keys(section, name, {"variant_count", "fickleness_p"});
      FamilyFickleness f;
      assign(section, name, "variant_count", f.variant_count);
      assign(section, name, "fickleness_p", f.fickleness_p);
      families[name.substr(7)] = f;
    } else if (name == "vector_fickle_scale") {
      cfg.vector_fickle_scale = parse_scale(section, name, cfg.vector_fickle_scale);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  for (auto& [family, f] : families) cfg.family_fickleness[family] = f;
  wrap_validation([&] { cfg.validate(); });
  return cfg;
}

PopulationConfig load_population_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_population_config(in);
}

}  // namespace audiofp
