#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "commands.hpp"
#include "kadlab/errors.hpp"

namespace {

using kadlab::cli::RunConfig;

struct Overrides {
  std::optional<std::string> config;
  std::vector<std::string> profiles;
  std::optional<std::int64_t> n;
  std::vector<std::string> schemes;
  bool compare = false;
  std::optional<double> churn;
  std::optional<std::string> lifetime;
  std::optional<int> lookups;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> h_max;
  std::optional<int> alpha;
  std::optional<int> beta;
  std::optional<std::string> law;
  std::optional<std::string> mode;
  std::optional<std::string> out;
  std::optional<double> n_min;
  std::optional<double> n_max;
  std::optional<int> points;
  std::vector<std::int64_t> n_list;
  std::optional<int> l_min;
  std::optional<int> l_max;
  std::vector<int> k_list;
  std::optional<std::string> sim;
  std::optional<std::string> model;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "TOML run configuration");
  cmd.add_option("--profile", o.profiles, "mdht, imdht, kad or all")
      ->check(CLI::IsMember({"mdht", "imdht", "kad", "all"}));
  cmd.add_option("--n", o.n, "network size")->check(CLI::PositiveNumber);
  cmd.add_option("--scheme", o.schemes, "standard or diverse")->check(CLI::IsMember({"standard", "diverse"}));
  cmd.add_flag("--compare", o.compare, "run both schemes and report the gain");
  cmd.add_option("--alpha", o.alpha, "parallel queries per round")->check(CLI::Range(1, 7));
  cmd.add_option("--beta", o.beta, "contacts returned per query")->check(CLI::Range(1, 7));
  cmd.add_option("--out", o.out, "output directory");
}

void add_simulation(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--churn", o.churn, "mean session length in seconds, 0 disables churn")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--lifetime", o.lifetime, "session distribution")->check(CLI::IsMember({"exponential", "pareto"}));
  cmd.add_option("--lookups", o.lookups, "lookups per run")->check(CLI::PositiveNumber);
  cmd.add_option("--runs", o.runs, "independent runs, seeds seed..seed+runs-1")->check(CLI::Range(1, 1000));
  cmd.add_option("--seed", o.seed, "first seed");
  cmd.add_option("--mode", o.mode, "lookup parallelism")->check(CLI::IsMember({"strict", "loose"}));
}

void add_model(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--h-max", o.h_max, "largest hop count tabulated")->check(CLI::PositiveNumber);
  cmd.add_option("--law", o.law, "closest-contact law")->check(CLI::IsMember({"exact", "printed"}));
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (o.config) kadlab::cli::load_toml(*o.config, c);
  if (!o.profiles.empty()) c.profiles = o.profiles;
  if (o.n) c.n = *o.n;
  if (!o.schemes.empty()) {
    c.schemes.clear();
    for (const auto& s : o.schemes) c.schemes.push_back(kadlab::parse_scheme(s));
  }
  if (o.compare) c.compare = true;
  if (o.churn) {
    c.churn.enabled = *o.churn > 0.0;
    if (c.churn.enabled) c.churn.mean_session = c.churn.mean_deadtime = *o.churn;
  }
  if (o.lifetime) {
    c.churn.lifetime = *o.lifetime == "pareto" ? kadlab::LifetimeDistribution::Pareto
                                                : kadlab::LifetimeDistribution::Exponential;
  }
  if (o.lookups) c.lookups = *o.lookups;
  if (o.runs) c.runs = *o.runs;
  if (o.seed) c.seed = *o.seed;
  if (o.h_max) c.h_max = *o.h_max;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.beta) c.beta = *o.beta;
  if (o.law) c.law = kadlab::cli::parse_law(*o.law);
  if (o.mode) c.mode = kadlab::cli::parse_mode(*o.mode);
  if (o.out) c.out = *o.out;
  if (o.n_min) c.n_min = *o.n_min;
  if (o.n_max) c.n_max = *o.n_max;
  if (o.points) c.points = *o.points;
  if (!o.n_list.empty()) c.n_list = o.n_list;
  if (o.l_min) c.l_min = *o.l_min;
  if (o.l_max) c.l_max = *o.l_max;
  if (!o.k_list.empty()) c.k_list = o.k_list;
  if (o.sim) c.sim_cdf = *o.sim;
  if (o.model) c.model_cdf = *o.model;
  if (const char* env = std::getenv("KADLAB_THREADS")) c.threads = std::max(0, std::atoi(env));
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kadlab: Kademlia routing laboratory"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "simulate lookups and write summary.csv and cdf.csv");
  add_common(*simulate, o);
  add_simulation(*simulate, o);

  auto* model = app.add_subcommand("model", "evaluate the hop-count model, write model_summary.csv and model_cdf.csv");
  add_common(*model, o);
  add_model(*model, o);

  auto* bounds = app.add_subcommand("bounds", "empty-bucket error bound over network sizes, write bounds.csv");
  add_common(*bounds, o);
  bounds->add_option("--n-min", o.n_min, "smallest size of the log grid")->check(CLI::PositiveNumber);
  bounds->add_option("--n-max", o.n_max, "largest size of the log grid")->check(CLI::PositiveNumber);
  bounds->add_option("--points", o.points, "grid points");
  bounds->add_option("--sizes", o.n_list, "explicit sizes instead of the grid");

  auto* compare = app.add_subcommand("compare", "join simulated and modelled CDFs, write model_vs_sim.csv");
  add_common(*compare, o);
  add_simulation(*compare, o);
  add_model(*compare, o);
  compare->add_option("--sim", o.sim, "simulated cdf.csv");
  compare->add_option("--model", o.model, "model_cdf.csv");

  auto* bitgain = app.add_subcommand("bitgain", "expected bit gain of both selection schemes, write bitgain.csv");
  bitgain->add_option("--out", o.out, "output directory");
  bitgain->add_option("--l-min", o.l_min, "smallest guaranteed gain")->check(CLI::NonNegativeNumber);
  bitgain->add_option("--l-max", o.l_max, "largest guaranteed gain")->check(CLI::NonNegativeNumber);
  bitgain->add_option("--k", o.k_list, "bucket sizes")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig config = resolve(o);
    if (simulate->parsed()) return kadlab::cli::cmd_simulate(config, std::cout);
    if (model->parsed()) return kadlab::cli::cmd_model(config, std::cout);
    if (bounds->parsed()) return kadlab::cli::cmd_bounds(config, std::cout);
    if (compare->parsed()) return kadlab::cli::cmd_compare(config, std::cout);
    if (bitgain->parsed()) return kadlab::cli::cmd_bitgain(config, std::cout);
  } catch (const kadlab::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
