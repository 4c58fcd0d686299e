#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kadlab {

enum class Scheme { Standard, DiversityMax };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct LevelWeight {
  int digits = 0;
  double weight = 0.0;
};

// How identifiers at bit distance d < b are split into buckets.
enum class BucketLayout {
  // One bucket per level, resolved by the digits of the L-row point mass.
  Uniform,
  // Three 3-digit buckets plus the quarter next to the owner split with 4 digits.
  QuarterSplit,
};

struct SystemProfile {
  std::string name;
  int b = 0;
  std::vector<int> k;                    // k[d], d = 0..b
  std::vector<std::vector<double>> L;    // L[d][l], rows sum to 1
  int alpha = 3;
  int beta = 2;

  int capacity(int d) const { return k.at(static_cast<std::size_t>(d)); }
  // floor(log2 k[d])
  int q(int d) const;
  // Non-zero entries of row d.
  std::vector<LevelWeight> levels(int d) const;
  BucketLayout layout(int d) const;
  void validate() const;
};

SystemProfile mdht_profile(int alpha = 3, int beta = 2);
SystemProfile imdht_profile(int alpha = 3, int beta = 2);
SystemProfile kad_profile(int alpha = 3, int beta = 2);
SystemProfile profile_by_name(std::string_view name);

// A profile with b bits, constant bucket size and one digit per level.
SystemProfile uniform_profile(std::string name, int b, int bucket_size, int alpha, int beta);

int floor_log2(int value);

}  // namespace kadlab
