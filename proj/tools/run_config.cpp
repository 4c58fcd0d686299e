#include "run_config.hpp"

#include <stdexcept>

#include "toml.hpp"

namespace kadlab::cli {

SystemProfile RunConfig::profile(const std::string& name) const {
  SystemProfile p = profile_by_name(name);
  if (alpha > 0) p.alpha = alpha;
  if (beta > 0) p.beta = beta;
  return p;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.n = n;
  e.churn = churn;
  e.lookups = lookups;
  e.runs = runs;
  e.seed = seed;
  e.mode = mode;
  e.threads = threads;
  return e;
}

LawFormula parse_law(std::string_view name) {
  if (name == "exact") return LawFormula::Exact;
  if (name == "printed") return LawFormula::Printed;
  throw std::invalid_argument("unknown law formula: " + std::string(name));
}

LookupMode parse_mode(std::string_view name) {
  if (name == "strict") return LookupMode::Strict;
  if (name == "loose") return LookupMode::Loose;
  throw std::invalid_argument("unknown lookup mode: " + std::string(name));
}

std::vector<std::string> expand_profiles(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& name : names) {
    if (name == "all") {
      out.insert(out.end(), {"mdht", "imdht", "kad"});
    } else {
      profile_by_name(name);
      out.push_back(name);
    }
  }
  return out;
}

void load_toml(const std::filesystem::path& path, RunConfig& config) {
  if (!std::filesystem::exists(path)) throw std::invalid_argument("config file not found: " + path.string());
  const toml::table doc = toml::parse_file(path.string());

  if (const auto* arr = doc["profile"].as_array()) {
    config.profiles.clear();
    for (const auto& v : *arr) config.profiles.push_back(v.value_or(std::string{}));
  } else if (auto v = doc["profile"].value<std::string>()) {
    config.profiles = {*v};
  }
  if (auto v = doc["n"].value<std::int64_t>()) config.n = *v;
  if (const auto* arr = doc["scheme"].as_array()) {
    config.schemes.clear();
    for (const auto& v : *arr) config.schemes.push_back(parse_scheme(v.value_or(std::string{})));
  } else if (auto v = doc["scheme"].value<std::string>()) {
    config.schemes = {parse_scheme(*v)};
  }
  if (auto v = doc["compare"].value<bool>()) config.compare = *v;
  if (auto v = doc["lookups"].value<int>()) config.lookups = *v;
  if (auto v = doc["runs"].value<int>()) config.runs = *v;
  if (auto v = doc["seed"].value<std::int64_t>()) config.seed = static_cast<std::uint64_t>(*v);
  if (auto v = doc["h_max"].value<int>()) config.h_max = *v;
  if (auto v = doc["alpha"].value<int>()) config.alpha = *v;
  if (auto v = doc["beta"].value<int>()) config.beta = *v;
  if (auto v = doc["law"].value<std::string>()) config.law = parse_law(*v);
  if (auto v = doc["mode"].value<std::string>()) config.mode = parse_mode(*v);
  if (auto v = doc["out"].value<std::string>()) config.out = *v;

  if (const auto* churn = doc["churn"].as_table()) {
    auto& c = config.churn;
    c.enabled = (*churn)["enabled"].value_or(true);
    if (auto v = (*churn)["mean_session"].value<double>()) c.mean_session = *v;
    c.mean_deadtime = (*churn)["mean_deadtime"].value_or(c.mean_session);
    if (auto v = (*churn)["lifetime"].value<std::string>()) {
      if (*v == "exponential") {
        c.lifetime = LifetimeDistribution::Exponential;
      } else if (*v == "pareto") {
        c.lifetime = LifetimeDistribution::Pareto;
      } else {
        throw std::invalid_argument("unknown lifetime distribution: " + *v);
      }
    }
    if (auto v = (*churn)["pareto_shape"].value<double>()) c.pareto_shape = *v;
    if (auto v = (*churn)["warmup_sessions"].value<double>()) c.warmup_sessions = *v;
    if (auto v = (*churn)["lookup_spacing"].value<double>()) c.lookup_spacing = *v;
  }
  if (const auto* bounds = doc["bounds"].as_table()) {
    if (auto v = (*bounds)["n_min"].value<double>()) config.n_min = *v;
    if (auto v = (*bounds)["n_max"].value<double>()) config.n_max = *v;
    if (auto v = (*bounds)["points"].value<int>()) config.points = *v;
  }
}

}  // namespace kadlab::cli
