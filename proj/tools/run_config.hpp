#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kadlab/closest_law.hpp"
#include "kadlab/lookup.hpp"
#include "kadlab/profile.hpp"
#include "kadlab/simulator.hpp"

namespace kadlab::cli {

struct RunConfig {
  std::vector<std::string> profiles{"kad"};
  std::int64_t n = 10000;
  std::vector<Scheme> schemes{Scheme::Standard};
  bool compare = false;
  ChurnSpec churn;
  int lookups = 500;
  int runs = 10;
  std::uint64_t seed = 42;
  int h_max = 16;
  int alpha = 0;  // 0 keeps the profile value
  int beta = 0;
  LawFormula law = LawFormula::Exact;
  LookupMode mode = LookupMode::Strict;
  std::filesystem::path out = ".";
  int threads = 0;

  double n_min = 1e3;
  double n_max = 4e6;
  int points = 60;
  std::vector<std::int64_t> n_list;

  int l_min = 0;
  int l_max = 8;
  std::vector<int> k_list{2, 4, 8, 10, 16, 32, 64, 128};

  std::optional<std::filesystem::path> sim_cdf;
  std::optional<std::filesystem::path> model_cdf;

  SystemProfile profile(const std::string& name) const;
  ExperimentConfig experiment() const;
};

// Reads the keys present in a TOML file over the defaults.
void load_toml(const std::filesystem::path& path, RunConfig& config);

LawFormula parse_law(std::string_view name);
LookupMode parse_mode(std::string_view name);
std::vector<std::string> expand_profiles(const std::vector<std::string>& names);

}  // namespace kadlab::cli
