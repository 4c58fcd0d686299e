#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "kadlab/errors.hpp"
#include "kadlab/simulator.hpp"

namespace kadlab {

double student_t_halfwidth(const std::vector<double>& values, double confidence) {
  if (values.size() < 2) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
  return t * sd / std::sqrt(n);
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<double> hop_cdf(const std::vector<int>& hops) {
  if (hops.empty()) return {};
  const int top = *std::max_element(hops.begin(), hops.end());
  std::vector<double> counts(static_cast<std::size_t>(std::max(top, 1)), 0.0);
  for (const int h : hops) counts[static_cast<std::size_t>(std::max(h, 1) - 1)] += 1.0;
  double running = 0.0;
  for (auto& c : counts) {
    running += c;
    c = running / static_cast<double>(hops.size());
  }
  return counts;
}

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KADLAB_THREADS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

namespace {

// Degree statistics of the full top-level buckets.
void summarize_degrees(const std::vector<const RoutingTable*>& tables, const SystemProfile& profile,
                       RunResult& run) {
  const int prefix_len = profile.levels(profile.b).front().digits;
  const auto cdf = diversity_cdf(tables, prefix_len);
  const int capacity = profile.capacity(profile.b);
  const auto it = cdf.by_fill.find(capacity);
  if (it == cdf.by_fill.end()) return;
  run.degree_cdf = it->second;
  run.degree_buckets = cdf.bucket_count.at(capacity);
  double previous = 0.0;
  for (std::size_t m = 0; m < it->second.size(); ++m) {
    run.mean_degree += static_cast<double>(m + 1) * (it->second[m] - previous);
    previous = it->second[m];
  }
}

}  // namespace

RunResult run_once(const SystemProfile& profile, Scheme scheme, const ExperimentConfig& config, std::uint64_t seed) {
  require(config.lookups >= 1, "at least one lookup per run");
  const auto shared = std::make_shared<const SystemProfile>(profile);
  RunResult run;
  run.seed = seed;
  std::mt19937_64 rng(derive_seed(seed, 0x100000001ULL));
  LookupConfig lookup_config;
  lookup_config.alpha = profile.alpha;
  lookup_config.beta = profile.beta;
  lookup_config.mode = config.mode;

  const auto record = [&](const LookupResult& r) {
    run.hops.push_back(r.hops);
    ++run.terminations[r.terminated_by];
  };

  if (!config.churn.enabled) {
    StaticNetwork net(shared, config.n, scheme, seed);
    std::uniform_int_distribution<std::size_t> pick(0, net.size() - 1);
    for (int i = 0; i < config.lookups; ++i) {
      const std::size_t origin = pick(rng);
      const NodeId target = NodeId::random(profile.b, rng);
      record(lookup(net.table(origin), target, net, lookup_config));
    }
    std::vector<const RoutingTable*> tables;
    const std::size_t sample = std::min<std::size_t>(net.size(), 1000);
    for (std::size_t i = 0; i < sample; ++i) tables.push_back(&net.table(i));
    summarize_degrees(tables, profile, run);
  } else {
    ChurnNetwork net(shared, config.n, scheme, config.churn, seed);
    const SimTime start = config.churn.warmup_sessions * config.churn.mean_session;
    for (int i = 0; i < config.lookups; ++i) {
      net.advance_to(start + i * config.churn.lookup_spacing);
      if (net.online_count() == 0) {
        run.aborted = true;
        break;
      }
      const PeerHandle origin = net.random_online(rng);
      const NodeId target = NodeId::random(profile.b, rng);
      record(lookup(net.table(origin), target, net, lookup_config));
    }
    if (!run.aborted) summarize_degrees(net.online_tables(), profile, run);
  }
  if (!run.hops.empty()) {
    run.mean = std::accumulate(run.hops.begin(), run.hops.end(), 0.0) / static_cast<double>(run.hops.size());
  }
  return run;
}

ExperimentReport run_experiment(const SystemProfile& profile, Scheme scheme, const ExperimentConfig& config) {
  require(config.runs >= 1, "at least one run");
  ExperimentReport report;
  report.profile = profile.name;
  report.scheme = scheme;
  report.n = config.n;
  report.churn = config.churn;
  report.runs.resize(static_cast<std::size_t>(config.runs));

  std::atomic<int> next{0};
  const auto work = [&] {
    for (int r = next++; r < config.runs; r = next++) {
      report.runs[static_cast<std::size_t>(r)] =
          run_once(profile, scheme, config, config.seed + static_cast<std::uint64_t>(r));
    }
  };
  const int workers = std::min(worker_count(config.threads), config.runs);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  std::vector<double> means;
  std::vector<int> pooled;
  std::vector<double> degree_sum;
  double degree_weight = 0.0;
  for (const auto& run : report.runs) {
    if (run.aborted || run.hops.empty()) continue;
    means.push_back(run.mean);
    pooled.insert(pooled.end(), run.hops.begin(), run.hops.end());
    if (run.degree_buckets > 0) {
      const double w = run.degree_buckets;
      if (degree_sum.size() < run.degree_cdf.size()) degree_sum.resize(run.degree_cdf.size(), 0.0);
      for (std::size_t m = 0; m < run.degree_cdf.size(); ++m) degree_sum[m] += w * run.degree_cdf[m];
      report.mean_degree += w * run.mean_degree;
      degree_weight += w;
    }
  }
  if (!pooled.empty()) {
    report.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());
  }
  report.ci95 = student_t_halfwidth(means);
  report.median = median_of(means);
  report.cdf = hop_cdf(pooled);
  if (degree_weight > 0.0) {
    report.mean_degree /= degree_weight;
    for (auto& v : degree_sum) v /= degree_weight;
    report.degree_cdf = std::move(degree_sum);
  }
  return report;
}

Gain hop_gain(const ExperimentReport& standard, const ExperimentReport& diverse) {
  Gain gain;
  const double low = standard.mean - standard.ci95;
  const double high = diverse.mean + diverse.ci95;
  if (low > 0.0) gain.conservative = 100.0 * (low - high) / low;
  if (standard.mean > 0.0) gain.point = 100.0 * (standard.mean - diverse.mean) / standard.mean;
  bool first = true;
  const std::size_t runs = std::min(standard.runs.size(), diverse.runs.size());
  for (std::size_t r = 0; r < runs; ++r) {
    const auto& s = standard.runs[r];
    const auto& d = diverse.runs[r];
    if (s.aborted || d.aborted || s.mean <= 0.0) continue;
    const double g = 100.0 * (s.mean - d.mean) / s.mean;
    gain.min = first ? g : std::min(gain.min, g);
    gain.max = first ? g : std::max(gain.max, g);
    first = false;
  }
  return gain;
}

ComparisonReport compare_schemes(const SystemProfile& profile, const ExperimentConfig& config) {
  ComparisonReport report;
  report.standard = run_experiment(profile, Scheme::Standard, config);
  report.diverse = run_experiment(profile, Scheme::DiversityMax, config);
  report.gain = hop_gain(report.standard, report.diverse);
  return report;
}

}  // namespace kadlab
