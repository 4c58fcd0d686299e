#include "kadlab/profile.hpp"

#include <bit>
#include <cmath>

#include "kadlab/errors.hpp"

namespace kadlab {

std::string_view scheme_name(Scheme scheme) {
  return scheme == Scheme::Standard ? "standard" : "diverse";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "standard") return Scheme::Standard;
  if (name == "diverse" || name == "modified") return Scheme::DiversityMax;
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

int floor_log2(int value) {
  require(value >= 1, "floor_log2 of non-positive value");
  return std::bit_width(static_cast<unsigned>(value)) - 1;
}

int SystemProfile::q(int d) const { return floor_log2(capacity(d)); }

std::vector<LevelWeight> SystemProfile::levels(int d) const {
  std::vector<LevelWeight> out;
  const auto& row = L.at(static_cast<std::size_t>(d));
  for (std::size_t l = 0; l < row.size(); ++l) {
    if (row[l] > 0.0) out.push_back({static_cast<int>(l), row[l]});
  }
  return out;
}

BucketLayout SystemProfile::layout(int d) const {
  const auto row = levels(d);
  if (row.size() == 1) return BucketLayout::Uniform;
  if (row.size() == 2 && row[0].digits == 3 && row[1].digits == 4 &&
      std::abs(row[0].weight - 0.75) < 1e-12 && std::abs(row[1].weight - 0.25) < 1e-12) {
    return BucketLayout::QuarterSplit;
  }
  throw UnsupportedParameter("routing tables support point-mass rows or the 3/4-digit quarter split");
}

void SystemProfile::validate() const {
  require(b >= 1 && b <= 192, "profile width out of range");
  require(static_cast<int>(k.size()) == b + 1, "bucket-size vector must have b+1 entries");
  require(static_cast<int>(L.size()) == b + 1, "level matrix must have b+1 rows");
  for (int d = 1; d <= b; ++d) require(k[static_cast<std::size_t>(d)] >= 1, "bucket size must be positive");
  for (const auto& row : L) {
    require(static_cast<int>(row.size()) == b + 1, "level matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      require(v >= 0.0, "negative level weight");
      sum += v;
    }
    require(std::abs(sum - 1.0) < 1e-12, "level matrix row does not sum to 1");
  }
  require(alpha >= 1 && beta >= 1, "alpha and beta must be positive");
}

namespace {

std::vector<std::vector<double>> point_rows(int b, int digits) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(b + 1),
                                        std::vector<double>(static_cast<std::size_t>(b + 1), 0.0));
  for (auto& row : rows) row[static_cast<std::size_t>(digits)] = 1.0;
  return rows;
}

}  // namespace

SystemProfile uniform_profile(std::string name, int b, int bucket_size, int alpha, int beta) {
  SystemProfile p;
  p.name = std::move(name);
  p.b = b;
  p.k.assign(static_cast<std::size_t>(b + 1), bucket_size);
  p.L = point_rows(b, 1);
  p.alpha = alpha;
  p.beta = beta;
  p.validate();
  return p;
}

SystemProfile mdht_profile(int alpha, int beta) { return uniform_profile("mdht", 160, 8, alpha, beta); }

SystemProfile imdht_profile(int alpha, int beta) {
  SystemProfile p = uniform_profile("imdht", 160, 8, alpha, beta);
  p.k[160] = 128;
  p.k[159] = 64;
  p.k[158] = 32;
  p.k[157] = 16;
  return p;
}

SystemProfile kad_profile(int alpha, int beta) {
  SystemProfile p;
  p.name = "kad";
  p.b = 128;
  p.k.assign(129, 10);
  p.L = point_rows(128, 3);
  for (int d = 0; d < 128; ++d) {
    p.L[static_cast<std::size_t>(d)][3] = 0.75;
    p.L[static_cast<std::size_t>(d)][4] = 0.25;
  }
  p.L[128][3] = 0.0;
  p.L[128][4] = 1.0;
  p.alpha = alpha;
  p.beta = beta;
  p.validate();
  return p;
}

SystemProfile profile_by_name(std::string_view name) {
  if (name == "mdht") return mdht_profile();
  if (name == "imdht") return imdht_profile();
  if (name == "kad") return kad_profile();
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

}  // namespace kadlab
