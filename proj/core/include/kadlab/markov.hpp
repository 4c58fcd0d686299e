#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kadlab/closest_law.hpp"
#include "kadlab/profile.hpp"

namespace kadlab {

struct MarkovState {
  bool terminal = false;
  DistanceTuple distances;  // ascending

  friend bool operator==(const MarkovState&, const MarkovState&) = default;
};

// Probability over sorted alpha-tuples of bit distances in a window
// [lo, b], plus the absorbing terminal state.
class StateDistribution {
 public:
  StateDistribution() = default;
  StateDistribution(int alpha, int lo, int hi);

  int alpha() const { return alpha_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }

  double terminal() const { return terminal_; }
  double truncation_loss() const { return truncation_loss_; }
  double probability(const MarkovState& state) const;
  // Sum of all state masses, terminal included.
  double total() const;
  std::vector<std::pair<MarkovState, double>> states() const;
  std::size_t size() const { return mass_.size(); }

  void add(const MarkovState& state, double p);
  void add_terminal(double p) { terminal_ += p; }
  void add_truncation(double p) { truncation_loss_ += p; }

  // Dense-key access used by the transition operator.
  std::uint64_t encode(const DistanceTuple& distances) const;
  DistanceTuple decode(std::uint64_t key) const;
  const std::unordered_map<std::uint64_t, double>& raw() const { return mass_; }
  void add_raw(std::uint64_t key, double p) { mass_[key] += p; }

 private:
  int alpha_ = 0;
  int lo_ = 0;
  int hi_ = 0;
  double terminal_ = 0.0;
  double truncation_loss_ = 0.0;
  std::unordered_map<std::uint64_t, double> mass_;
};

struct ModelOptions {
  LawFormula formula = LawFormula::Exact;
  int window_extra = 16;        // D_max = ceil(log2 n) + window_extra
  double law_cutoff = 1e-20;
  double state_cutoff = 1e-18;  // transitions out of lighter states are dropped
  double max_truncation = 1e-9;
};

struct HopCountResult {
  std::vector<double> cdf;  // cdf[h-1] = P(success within h hops)
  double mean = 0.0;
  double residual_mass = 0.0;
  double truncation_loss = 0.0;
  bool residual_warning = false;
};

// The hop-count Markov chain for one (profile, n, scheme).
class HopCountModel {
 public:
  HopCountModel(SystemProfile profile, std::int64_t n, Scheme scheme, ModelOptions options = {});
  ~HopCountModel();
  HopCountModel(HopCountModel&&) noexcept;
  HopCountModel& operator=(HopCountModel&&) noexcept;

  const SystemProfile& profile() const { return profile_; }
  int window_lo() const { return lo_; }

  // P(C = . | D = d) mixed over the levels of row d.
  const ClosestContactLaw& node_law(int d, int gamma);

  StateDistribution initial_distribution();
  StateDistribution transition_apply(const StateDistribution& dist);
  HopCountResult hop_count_cdf(int h_max);

 private:
  struct Outcome;
  const Outcome& outcome(std::uint64_t key, const StateDistribution& shape);

  SystemProfile profile_;
  std::int64_t n_;
  Scheme scheme_;
  ModelOptions options_;
  int lo_;
  std::unordered_map<std::int64_t, std::unique_ptr<ClosestContactLaw>> laws_;
  std::unordered_map<std::uint64_t, std::unique_ptr<Outcome>> outcomes_;
};

StateDistribution initial_distribution(const SystemProfile& profile, std::int64_t n, Scheme scheme);
StateDistribution transition_apply(const StateDistribution& dist, const SystemProfile& profile, std::int64_t n,
                                   Scheme scheme);
HopCountResult hop_count_cdf(const SystemProfile& profile, std::int64_t n, Scheme scheme, int h_max = 16,
                             ModelOptions options = {});

}  // namespace kadlab
