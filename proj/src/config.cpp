#include "gachaos/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace gachaos {

namespace {

namespace pt = boost::property_tree;

// Keys the parser knows, with defaults; an empty default marks a key that is
// optional without a value.
const std::map<std::string, std::string>& default_table() {
  static const std::map<std::string, std::string> table{
      {"fitness.f_lo", "1"},          {"fitness.f_hi", "2"},          {"fitness.width", "1"},
      {"fitness.center", ""},         {"fitness.value", "1"},         {"model.sigma", "0"},
      {"model.init", "normal"},       {"model.init_center", "0"},     {"model.init_spread", "1"},
      {"experiment.replicas", "10"},  {"experiment.reference", ""},   {"experiment.grid_cells", "2048"},
      {"experiment.ensemble_factor", "100"}, {"experiment.tau_list", ""}, {"experiment.tau_ref", "0"},
      {"experiment.trace_n", "0"},    {"experiment.trace_cells", "512"}, {"experiment.moment_q", "2"},
      {"experiment.seed", "0"},       {"experiment.threads", "0"},
  };
  return table;
}

const std::set<std::string>& required_keys() {
  static const std::set<std::string> keys{"fitness.kind", "model.dim", "model.tau", "model.T", "experiment.n_list"};
  return keys;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::size_t to_count(const std::string& key, const std::string& v, long long min) {
  const auto x = to_integer(key, v);
  if (x < min) throw ConfigError(key + ": must be >= " + std::to_string(min));
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  if (boost::algorithm::trim_copy(v).empty()) return parts;
  boost::algorithm::split(parts, v, boost::algorithm::is_any_of(", "), boost::algorithm::token_compress_on);
  std::erase_if(parts, [](const std::string& s) { return s.empty(); });
  return parts;
}

ExperimentConfig build(const std::map<std::string, std::string>& v) {
  auto get = [&](const std::string& k) { return v.at(k); };
  ExperimentConfig c;
  c.dim = static_cast<int>(to_count("model.dim", get("model.dim"), 1));
  c.sigma = to_real("model.sigma", get("model.sigma"));
  if (!(c.sigma >= 0.0)) throw ConfigError("model.sigma: must be >= 0");
  c.tau = to_real("model.tau", get("model.tau"));
  if (!(c.tau > 0.0 && c.tau <= 1.0)) throw ConfigError("model.tau: must lie in (0, 1], got " + get("model.tau"));
  c.horizon = to_real("model.T", get("model.T"));
  if (!(c.horizon > 0.0)) throw ConfigError("model.T: must be > 0");
  try {
    c.initial.kind = parse_initial_kind(get("model.init"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model.init: ") + e.what());
  }
  c.initial.center = to_real("model.init_center", get("model.init_center"));
  c.initial.spread = to_real("model.init_spread", get("model.init_spread"));
  if (c.initial.kind != InitialLaw::Kind::kDirac && !(c.initial.spread > 0.0))
    throw ConfigError("model.init_spread: must be > 0");

  const auto kind = get("fitness.kind");
  try {
    switch (parse_fitness_kind(kind)) {
      case FitnessKind::kConstant: c.fitness = FitnessSpec::constant(to_real("fitness.value", get("fitness.value"))); break;
      case FitnessKind::kGaussianBump: {
        Eigen::VectorXd center;
        const auto parts = split_list(get("fitness.center"));
        if (!parts.empty()) {
          center.resize(static_cast<Eigen::Index>(parts.size()));
          for (std::size_t k = 0; k < parts.size(); ++k) center(static_cast<Eigen::Index>(k)) = to_real("fitness.center", parts[k]);
        }
        c.fitness = FitnessSpec::gaussian_bump(to_real("fitness.f_lo", get("fitness.f_lo")),
                                               to_real("fitness.f_hi", get("fitness.f_hi")),
                                               to_real("fitness.width", get("fitness.width")), center);
        break;
      }
      case FitnessKind::kReciprocalRastrigin:
        c.fitness = FitnessSpec::reciprocal_rastrigin(to_real("fitness.f_lo", get("fitness.f_lo")), c.dim);
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("fitness: ") + e.what());
  }

  std::set<std::size_t> seen;
  for (const auto& s : split_list(get("experiment.n_list"))) {
    const auto n = to_count("experiment.n_list", s, 1);
    if (!seen.insert(n).second) throw ConfigError("experiment.n_list: duplicate entry " + s);
    if (!c.n_list.empty() && n < c.n_list.back()) throw ConfigError("experiment.n_list: must be strictly increasing");
    c.n_list.push_back(n);
  }
  if (c.n_list.empty()) throw ConfigError("experiment.n_list: must not be empty");
  c.replicas = to_count("experiment.replicas", get("experiment.replicas"), 1);
  try {
    c.reference = parse_reference_kind(get("experiment.reference"));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("experiment.reference: ") + e.what());
  }
  c.grid_cells = to_count("experiment.grid_cells", get("experiment.grid_cells"), 2);
  c.ensemble_factor = to_count("experiment.ensemble_factor", get("experiment.ensemble_factor"), 1);
  for (const auto& s : split_list(get("experiment.tau_list"))) c.tau_list.push_back(to_real("experiment.tau_list", s));
  c.tau_ref = to_real("experiment.tau_ref", get("experiment.tau_ref"));
  c.trace_n = to_count("experiment.trace_n", get("experiment.trace_n"), 0);
  c.trace_cells = to_count("experiment.trace_cells", get("experiment.trace_cells"), 2);
  c.moment_q = to_real("experiment.moment_q", get("experiment.moment_q"));
  const auto seed = get("experiment.seed");
  try {
    std::size_t used = 0;
    c.seed = std::stoull(seed, &used);
    if (used != seed.size() || seed.front() == '-') throw std::invalid_argument(seed);
  } catch (const std::exception&) {
    throw ConfigError("experiment.seed: expected an unsigned integer, got '" + seed + "'");
  }
  c.threads = static_cast<unsigned>(to_count("experiment.threads", get("experiment.threads"), 0));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

}  // namespace

LoadedConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  LoadedConfig out;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const auto full = section + "." + key;
      if (!default_table().count(full) && !required_keys().count(full))
        throw ConfigError(full + ": unknown key");
      out.values[full] = boost::algorithm::trim_copy(value.data());
    }
  }
  for (const auto& k : required_keys())
    if (!out.values.count(k) || out.values[k].empty()) throw ConfigError(k + ": required key missing");
  for (const auto& [k, v] : default_table()) {
    if (out.values.count(k)) continue;
    std::string value = v;
    if (k == "experiment.reference") value = out.values["model.dim"] == "1" ? "grid" : "ensemble";
    out.values[k] = value;
    out.defaulted.push_back(k);
  }
  out.config = build(out.values);
  out.hash = config_hash(out.values);
  return out;
}

LoadedConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string config_hash(const std::map<std::string, std::string>& values) {
  std::string canonical;
  for (const auto& [k, v] : values) canonical += k + "=" + v + "\n";
  return sha256_hex(canonical);
}

nlohmann::json make_manifest(const LoadedConfig* config, std::uint64_t seed, const std::string& command,
                             const std::vector<std::filesystem::path>& files) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &utc);
  nlohmann::json j;
  j["artifact_version"] = kArtifactVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["timestamp"] = stamp;
  j["config_hash"] = config ? nlohmann::json(config->hash) : nlohmann::json(nullptr);
  if (config) {
    j["config"] = config->values;
    j["defaulted"] = config->defaulted;
  }
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.filename().string());
  j["files"] = names;
  return j;
}

}  // namespace gachaos
