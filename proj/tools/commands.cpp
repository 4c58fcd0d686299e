#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "kadlab/bitgain.hpp"
#include "kadlab/bounds.hpp"
#include "kadlab/markov.hpp"

namespace kadlab::cli {

namespace {

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out);
  std::ofstream file(config.out / name);
  if (!file) throw std::runtime_error("cannot write " + (config.out / name).string());
  return file;
}

std::vector<Scheme> schemes_of(const RunConfig& config) {
  if (config.compare) return {Scheme::Standard, Scheme::DiversityMax};
  return config.schemes;
}

std::string churn_label(const ChurnSpec& churn) { return churn.enabled ? num(churn.mean_session, 0) : "0"; }

nlohmann::json report_json(const ExperimentReport& r) {
  nlohmann::json j;
  j["profile"] = r.profile;
  j["scheme"] = std::string(scheme_name(r.scheme));
  j["n"] = r.n;
  j["churn"] = r.churn.enabled ? r.churn.mean_session : 0.0;
  j["mean"] = r.mean;
  j["ci95"] = r.ci95;
  j["median"] = r.median;
  j["cdf"] = r.cdf;
  j["mean_top_level_degree"] = r.mean_degree;
  j["top_level_degree_cdf"] = r.degree_cdf;
  auto& runs = j["runs"] = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json rj;
    rj["seed"] = run.seed;
    rj["mean"] = run.mean;
    rj["aborted"] = run.aborted;
    rj["lookups"] = run.hops.size();
    for (const auto& [t, count] : run.terminations) rj["terminations"][std::string(termination_name(t))] = count;
    runs.push_back(std::move(rj));
  }
  return j;
}

double mean_from_cdf(const std::vector<double>& cdf) {
  double mean = 0.0;
  double previous = 0.0;
  for (std::size_t h = 0; h < cdf.size(); ++h) {
    mean += static_cast<double>(h + 1) * (cdf[h] - previous);
    previous = cdf[h];
  }
  return mean + static_cast<double>(cdf.size() + 1) * std::max(0.0, 1.0 - previous);
}

using CdfTable = std::map<std::pair<std::string, std::string>, std::vector<double>>;

CdfTable read_cdf_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(file, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) header.push_back(cell);
  }
  const auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::runtime_error(path.string() + " lacks column " + name);
  };
  const auto c_profile = column("profile");
  const auto c_scheme = column("scheme");
  const auto c_hops = column("hops");
  const auto c_value = column("cumulative_fraction");
  CdfTable table;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    auto& cdf = table[{cells.at(c_profile), cells.at(c_scheme)}];
    const auto h = static_cast<std::size_t>(std::stoi(cells.at(c_hops)));
    if (h == 0) continue;
    if (cdf.size() < h) cdf.resize(h, cdf.empty() ? 0.0 : cdf.back());
    cdf[h - 1] = std::stod(cells.at(c_value));
  }
  return table;
}

void write_cdf_rows(std::ostream& csv, const std::string& prefix, const std::vector<double>& cdf) {
  for (std::size_t h = 0; h < cdf.size(); ++h) csv << prefix << (h + 1) << ',' << num(cdf[h], 9) << '\n';
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::ostream& out) {
  const auto profiles = expand_profiles(config.profiles);
  auto summary = open_output(config, "summary.csv");
  auto cdf_csv = open_output(config, "cdf.csv");
  summary << "profile,scheme,n,churn,mean,ci95,median,gain_pct,gain_min,gain_max,gain_point\n";
  cdf_csv << "profile,scheme,n,churn,hops,cumulative_fraction\n";
  nlohmann::json doc = nlohmann::json::array();
  const auto experiment = config.experiment();

  for (const auto& name : profiles) {
    const SystemProfile profile = config.profile(name);
    std::vector<ExperimentReport> reports;
    for (const auto scheme : schemes_of(config)) reports.push_back(run_experiment(profile, scheme, experiment));
    std::optional<Gain> gain;
    const ExperimentReport* standard = nullptr;
    const ExperimentReport* diverse = nullptr;
    for (const auto& r : reports) {
      (r.scheme == Scheme::Standard ? standard : diverse) = &r;
    }
    if (standard != nullptr && diverse != nullptr) gain = hop_gain(*standard, *diverse);

    out << name << " n=" << config.n << " churn=" << churn_label(config.churn) << '\n';
    for (const auto& r : reports) {
      const std::string scheme(scheme_name(r.scheme));
      out << "  " << scheme << ": mean " << num(r.mean, 5) << " +- " << num(r.ci95, 5) << "  median "
          << num(r.median, 5) << '\n';
      summary << name << ',' << scheme << ',' << config.n << ',' << churn_label(config.churn) << ','
              << num(r.mean) << ',' << num(r.ci95) << ',' << num(r.median);
      if (gain && r.scheme == Scheme::DiversityMax) {
        summary << ',' << num(gain->conservative, 4) << ',' << num(gain->min, 4) << ',' << num(gain->max, 4) << ','
                << num(gain->point, 4) << '\n';
      } else {
        summary << ",,,,\n";
      }
      write_cdf_rows(cdf_csv, name + ',' + scheme + ',' + std::to_string(config.n) + ',' +
                                  churn_label(config.churn) + ',',
                     r.cdf);
      doc.push_back(report_json(r));
    }
    if (gain) {
      out << "  + (%): " << num(gain->conservative, 5) << " [" << num(gain->min, 5) << " , " << num(gain->max, 5)
          << "]  point " << num(gain->point, 5) << '\n';
    }
  }
  open_output(config, "report.json") << doc.dump(2) << '\n';
  return 0;
}

int cmd_model(const RunConfig& config, std::ostream& out) {
  if (config.h_max < 1) throw std::invalid_argument("--h-max must be at least 1");
  const auto profiles = expand_profiles(config.profiles);
  auto summary = open_output(config, "model_summary.csv");
  auto cdf_csv = open_output(config, "model_cdf.csv");
  summary << "profile,scheme,n,law,mean,residual_mass,truncation_loss\n";
  cdf_csv << "profile,scheme,hops,cumulative_fraction\n";
  ModelOptions options;
  options.formula = config.law;
  for (const auto& name : profiles) {
    const SystemProfile profile = config.profile(name);
    for (const auto scheme : schemes_of(config)) {
      const std::string scheme_label(scheme_name(scheme));
      const auto result = hop_count_cdf(profile, config.n, scheme, config.h_max, options);
      const std::string law = config.law == LawFormula::Exact ? "exact" : "printed";
      summary << name << ',' << scheme_label << ',' << config.n << ',' << law << ',' << num(result.mean) << ','
              << sci(result.residual_mass) << ',' << sci(result.truncation_loss) << '\n';
      write_cdf_rows(cdf_csv, name + ',' + scheme_label + ',', result.cdf);
      out << name << ' ' << scheme_label << ": mean " << num(result.mean, 5);
      if (result.residual_warning) out << " (residual mass " << sci(result.residual_mass) << " beyond h-max)";
      out << '\n';
    }
  }
  return 0;
}

int cmd_bounds(const RunConfig& config, std::ostream& out) {
  const auto profiles = expand_profiles(config.profiles);
  std::vector<std::int64_t> grid = config.n_list;
  if (grid.empty()) {
    if (config.points < 1) throw std::invalid_argument("empty size grid");
    grid = log_spaced_grid(config.n_min, config.n_max, config.points);
  }
  auto csv = open_output(config, "bounds.csv");
  csv << "profile,n,bound\n";
  for (const auto& name : profiles) {
    const auto curve = bound_curve(config.profile(name), grid);
    double worst = 0.0;
    for (const auto& p : curve.points) {
      csv << name << ',' << p.n << ',' << sci(p.bound) << '\n';
      worst = std::max(worst, p.bound);
    }
    out << name << ": max bound " << sci(worst) << " over " << grid.size() << " sizes\n";
  }
  return 0;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
  CdfTable sim;
  CdfTable model;
  if (config.sim_cdf || config.model_cdf) {
    if (!config.sim_cdf || !config.model_cdf) throw std::invalid_argument("--sim and --model must be given together");
    for (const auto& path : {*config.sim_cdf, *config.model_cdf}) {
      if (!std::filesystem::exists(path)) throw std::runtime_error("input file not found: " + path.string());
    }
    sim = read_cdf_csv(*config.sim_cdf);
    model = read_cdf_csv(*config.model_cdf);
  } else {
    ModelOptions options;
    options.formula = config.law;
    for (const auto& name : expand_profiles(config.profiles)) {
      const SystemProfile profile = config.profile(name);
      for (const auto scheme : schemes_of(config)) {
        const std::string label(scheme_name(scheme));
        sim[{name, label}] = run_experiment(profile, scheme, config.experiment()).cdf;
        model[{name, label}] = hop_count_cdf(profile, config.n, scheme, config.h_max, options).cdf;
      }
    }
  }
  auto csv = open_output(config, "model_vs_sim.csv");
  csv << "profile,scheme,sim_mean,model_mean,relative_mean_gap,max_cdf_gap\n";
  for (const auto& [key, sim_cdf] : sim) {
    const auto it = model.find(key);
    if (it == model.end()) continue;
    const auto& model_cdf = it->second;
    double gap = 0.0;
    const std::size_t hops = std::max(sim_cdf.size(), model_cdf.size());
    for (std::size_t h = 0; h < hops; ++h) {
      const double s = h < sim_cdf.size() ? sim_cdf[h] : 1.0;
      const double m = h < model_cdf.size() ? model_cdf[h] : model_cdf.back();
      gap = std::max(gap, std::abs(s - m));
    }
    const double sim_mean = mean_from_cdf(sim_cdf);
    const double model_mean = mean_from_cdf(model_cdf);
    const double relative = sim_mean > 0.0 ? std::abs(sim_mean - model_mean) / sim_mean : 0.0;
    csv << key.first << ',' << key.second << ',' << num(sim_mean) << ',' << num(model_mean) << ','
        << num(relative, 6) << ',' << num(gap, 6) << '\n';
    out << key.first << ' ' << key.second << ": sim " << num(sim_mean, 5) << " model " << num(model_mean, 5)
        << " relative gap " << num(100.0 * relative, 3) << "% max cdf gap " << num(gap, 4) << '\n';
  }
  return 0;
}

int cmd_bitgain(const RunConfig& config, std::ostream& out) {
  if (config.l_min < 0 || config.l_max < config.l_min || config.k_list.empty()) {
    throw std::invalid_argument("invalid l range or empty k set");
  }
  auto csv = open_output(config, "bitgain.csv");
  csv << "l,k,standard,diverse,dominates\n";
  bool all = true;
  for (int l = config.l_min; l <= config.l_max; ++l) {
    for (const int k : config.k_list) {
      if (k < 1) throw std::invalid_argument("bucket sizes must be positive");
      const double standard = bitgain_standard(l, k);
      const double diverse = bitgain_diverse(l, k);
      const bool dominates = diverse >= standard - 1e-12;
      all = all && dominates;
      csv << l << ',' << k << ',' << num(standard, 9) << ',' << num(diverse, 9) << ','
          << (dominates ? "true" : "false") << '\n';
    }
  }
  out << "diverse bit gain dominates on every point: " << (all ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace kadlab::cli
