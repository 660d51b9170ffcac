#include "audiofp/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string_view>

#include "audiofp/digest.hpp"
#include "audiofp/rng.hpp"

namespace audiofp {
namespace {

constexpr std::int64_t kStudyStart = 1614556800;  // 2021-03-01T00:00:00Z
constexpr std::int64_t kStudyDays = 76;

struct Weighted {
  std::string_view name;
  double weight;
};

constexpr std::array<Weighted, 4> kOsMix = {{
    {"Windows", 0.785}, {"MacOS", 0.094}, {"Android", 0.069}, {"Linux", 0.052}}};
constexpr std::array<Weighted, 5> kSampleRates = {{
    {"48000", 0.768}, {"44100", 0.227}, {"96000", 0.002}, {"192000", 0.002}, {"16000", 0.001}}};
constexpr std::array<Weighted, 6> kChannelCounts = {{
    {"2", 0.86}, {"6", 0.06}, {"8", 0.05}, {"1", 0.015}, {"4", 0.01}, {"32", 0.005}}};
constexpr std::array<Weighted, 8> kCountries = {{
    {"US", 0.40}, {"IN", 0.20}, {"BR", 0.08}, {"IT", 0.06},
    {"GB", 0.06}, {"DE", 0.05}, {"CA", 0.05}, {"FR", 0.10}}};
constexpr std::array<std::string_view, 12> kAndroidModels = {
    "SM-G975F", "SM-A515F", "Pixel 4a", "Pixel 5",  "Redmi Note 8", "M2007J20CG",
    "SM-N986B", "moto g(8)", "CPH2127", "SM-G991B", "ONEPLUS A6013", "LM-K410"};

template <std::size_t N>
std::string_view pick(const std::array<Weighted, N>& table, double u) {
  double acc = 0.0;
  for (const auto& w : table) {
    acc += w.weight;
    if (u < acc) return w.name;
  }
  return table.back().name;
}

std::size_t pick_index(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string make_ua(std::string_view family, std::string_view os, SplitMix64& rng) {
  const bool gecko = family == "Firefox";
  if (gecko) {
    const int v = 86 + static_cast<int>(rng.below(3));
    if (os == "Windows") {
      return format("Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:%d.0) Gecko/20100101 Firefox/%d.0",
                    v, v);
    }
    if (os == "MacOS") {
      return format(
          "Mozilla/5.0 (Macintosh; Intel Mac OS X 10.%d; rv:%d.0) Gecko/20100101 Firefox/%d.0",
          14 + static_cast<int>(rng.below(2)), v, v);
    }
    if (os == "Linux") {
      return format("Mozilla/5.0 (X11; Ubuntu; Linux x86_64; rv:%d.0) Gecko/20100101 Firefox/%d.0",
                    v, v);
    }
    return format("Mozilla/5.0 (Android %d; Mobile; rv:%d.0) Gecko/%d.0 Firefox/%d.0",
                  9 + static_cast<int>(rng.below(3)), v, v, v);
  }
  const int major = 88 + static_cast<int>(rng.below(4));
  static constexpr std::array<int, 4> kBuilds = {4324, 4389, 4430, 4472};
  const int build = kBuilds[static_cast<std::size_t>(major - 88)];
  const int patch = 50 + static_cast<int>(rng.below(8)) * 10 + static_cast<int>(rng.below(4));
  std::string platform;
  std::string mobile;
  if (os == "Windows") {
    platform = "Windows NT 10.0; Win64; x64";
  } else if (os == "MacOS") {
    platform = format("Macintosh; Intel Mac OS X 10_%d_%d", 14 + static_cast<int>(rng.below(2)),
                      static_cast<int>(rng.below(8)));
  } else if (os == "Linux") {
    platform = "X11; Linux x86_64";
  } else {
    platform = format("Linux; Android %d; %s", 9 + static_cast<int>(rng.below(3)),
                      std::string(kAndroidModels[rng.below(kAndroidModels.size())]).c_str());
    mobile = "Mobile ";
  }
  std::string ua = format(
      "Mozilla/5.0 (%s) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/%d.0.%d.%d %sSafari/537.36",
      platform.c_str(), major, build, patch, mobile.c_str());
  if (family == "Edge") ua += format(" Edg/%d.0.%d.%d", major, build - 100, patch);
  if (family == "Opera") ua += format(" OPR/%d.0.%d.%d", major - 14, build + 100, patch);
  return ua;
}

// Zipf-like bucket in [0, n).
std::size_t zipf_bucket(SplitMix64& rng, std::size_t n, double exponent) {
  const double u = rng.uniform();
  // Inverse-CDF of the continuous power law on [1, n + 1).
  const double a = 1.0 - exponent;
  const double top = std::pow(static_cast<double>(n) + 1.0, a);
  const double x = std::pow(1.0 + u * (top - 1.0), 1.0 / a);
  return std::min(n - 1, static_cast<std::size_t>(x) - 1);
}

UserRecord make_user(const PopulationConfig& cfg, const Engine& engine, std::size_t index) {
  const SimulatedUser user = draw_user(cfg, index);
  SplitMix64 rng(combine(combine(cfg.seed, 0x05E7), index));

  UserRecord r;
  r.user_id = format("u%06zu", index + 1);
  r.ua = make_ua(user.family, user.os, rng);
  r.audio_config.sample_rate = std::stod(std::string(pick(kSampleRates, rng.uniform())));
  r.audio_config.max_channel_count = std::stoi(std::string(pick(kChannelCounts, rng.uniform())));
  {
    static constexpr std::array<double, 8> kLatencies = {0.01, 0.005, 0.0, 0.02,
                                                         0.04, 0.08, 0.16, 0.003};
    r.audio_config.base_latency =
        rng.uniform() < 0.6 ? 0.01 : kLatencies[rng.below(kLatencies.size())];
  }
  r.canvas = md5_hex(format("canvas|%s|%s|%zu", user.family.c_str(), user.os.c_str(),
                            zipf_bucket(rng, 400, 1.1)));
  r.fonts = md5_hex(format("fonts|%s|%zu", user.os.c_str(), zipf_bucket(rng, 1500, 0.9)));
  r.country = std::string(pick(kCountries, rng.uniform()));
  r.timestamp = kStudyStart + static_cast<std::int64_t>(rng.below(kStudyDays * 86400));
  r.ip_digest = ip_digest(format("10.%d.%d.%d", static_cast<int>(rng.below(256)),
                                 static_cast<int>(rng.below(256)),
                                 static_cast<int>(rng.below(256))),
                          cfg.ip_salt);

  VectorRuns runs = engine.run_all(user.device, cfg.iterations);
  for (VectorId v : kAllVectors) {
    // Wall time of a memoized lookup says nothing; zero keeps datasets reproducible.
    for (IterationResult& it : runs[vector_index(v)]) it.elapsed = Milliseconds(0.0);
    r.per_vector.emplace(v, std::move(runs[vector_index(v)]));
  }
  return r;
}

}  // namespace

void PopulationConfig::validate() const {
  if (num_classes < 1) throw std::invalid_argument("population needs at least one class");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!class_weights.empty()) {
    if (class_weights.size() != num_classes) {
      throw std::invalid_argument("classWeights length must equal numClasses");
    }
    double sum = 0.0;
    for (double w : class_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("class weights must be finite and >= 0");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("class weights must sum to 1");
  } else if (!(zipf_exponent >= 0.0) || !std::isfinite(zipf_exponent)) {
    throw std::invalid_argument("zipf exponent must be finite and >= 0");
  }
  if (browser_mix.empty()) throw std::invalid_argument("browser mix must not be empty");
  double mix = 0.0;
  for (const auto& [family, fraction] : browser_mix) {
    if (!(fraction >= 0.0)) throw std::invalid_argument("browser mix fractions must be >= 0");
    mix += fraction;
    auto it = family_fickleness.find(family);
    if (it == family_fickleness.end()) {
      throw std::invalid_argument("no fickleness entry for browser family " + family);
    }
    if (it->second.variant_count < 1 || !(it->second.fickleness_p >= 0.0) ||
        it->second.fickleness_p > 1.0) {
      throw std::invalid_argument("invalid fickleness for browser family " + family);
    }
  }
  if (std::abs(mix - 1.0) > 1e-9) throw std::invalid_argument("browser mix must sum to 1");
  for (double s : vector_fickle_scale) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("vector fickleness scales must be finite and >= 0");
    }
  }
}

std::vector<double> PopulationConfig::weights() const {
  std::vector<double> w = class_weights;
  if (w.empty()) {
    w.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      w[c] = std::pow(static_cast<double>(c + 1), -zipf_exponent);
    }
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= sum;
  return w;
}

PopulationConfig field_study_config() { return PopulationConfig{}; }

std::string class_id_for(std::size_t class_index) { return format("class-%03zu", class_index); }

std::map<std::string, std::vector<std::size_t>> family_classes(const PopulationConfig& cfg) {
  std::vector<std::pair<std::string, double>> families(cfg.browser_mix.begin(),
                                                       cfg.browser_mix.end());
  std::stable_sort(families.begin(), families.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<std::string, std::vector<std::size_t>> out;
  const std::size_t n = cfg.num_classes;
  if (n < families.size()) {
    for (const auto& [family, fraction] : families) {
      for (std::size_t c = 0; c < n; ++c) out[family].push_back(c);
    }
    return out;
  }
  std::size_t next = 0;
  for (std::size_t f = 0; f < families.size(); ++f) {
    const std::size_t remaining_families = families.size() - f - 1;
    std::size_t take = f + 1 == families.size()
                           ? n - next
                           : static_cast<std::size_t>(
                                 std::llround(families[f].second * static_cast<double>(n)));
    take = std::clamp<std::size_t>(take, 1, n - next - remaining_families);
    for (std::size_t c = next; c < next + take; ++c) out[families[f].first].push_back(c);
    next += take;
  }
  return out;
}

SimulatedUser draw_user(const PopulationConfig& cfg, std::size_t user_index) {
  SplitMix64 rng(combine(cfg.seed, user_index));
  SimulatedUser user;

  double u = rng.uniform();
  double acc = 0.0;
  user.family = cfg.browser_mix.rbegin()->first;
  for (const auto& [family, fraction] : cfg.browser_mix) {
    acc += fraction;
    if (u < acc) {
      user.family = family;
      break;
    }
  }

  const auto classes = family_classes(cfg).at(user.family);
  const std::vector<double> weights = cfg.weights();
  std::vector<double> cumulative;
  cumulative.reserve(classes.size());
  double total = 0.0;
  for (std::size_t c : classes) cumulative.push_back(total += weights[c]);
  for (double& c : cumulative) c /= total;
  const std::size_t class_index = classes[pick_index(cumulative, rng.uniform())];

  const FamilyFickleness& fk = cfg.family_fickleness.at(user.family);
  user.device.class_id = class_id_for(class_index);
  user.device.perturb_seed = rng.next();
  user.device.variant_count = fk.variant_count;
  user.device.fickleness_p = std::min(1.0, fk.fickleness_p * 2.0 * rng.uniform());
  user.device.fickle_scale = cfg.vector_fickle_scale;
  user.os = std::string(pick(kOsMix, rng.uniform()));
  return user;
}

std::vector<UserRecord> generate_population(const PopulationConfig& cfg, const Engine& engine) {
  cfg.validate();
  std::vector<UserRecord> out(cfg.num_users);
  const auto n = static_cast<std::int64_t>(cfg.num_users);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = make_user(cfg, engine, static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<UserRecord> generate_population_serial(const PopulationConfig& cfg,
                                                   const Engine& engine) {
  cfg.validate();
  std::vector<UserRecord> out;
  out.reserve(cfg.num_users);
  for (std::size_t i = 0; i < cfg.num_users; ++i) out.push_back(make_user(cfg, engine, i));
  return out;
}

}  // namespace audiofp
