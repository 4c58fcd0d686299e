#include <random>

#include "doctest.h"
#include "kadlab/closest_law.hpp"
#include "kadlab/combinatorics.hpp"
#include "kadlab/errors.hpp"
#include "oracles.hpp"

using namespace kadlab;
using kadlab::testing::chi_square_fit;
using kadlab::testing::law_distribution;
using kadlab::testing::sample_closest;

namespace {

LawQuery make_query(int b, std::int64_t n, int d, int l, int k, int gamma) {
  LawQuery q;
  q.b = b;
  q.n = n;
  q.d = d;
  q.l = l;
  q.k = k;
  q.gamma = gamma;
  return q;
}

void check_against_sampling(Scheme scheme, const LawQuery& query, std::uint64_t seed) {
  const auto law = scheme == Scheme::Standard ? closest_law_standard(query) : closest_law_diverse(query);
  CHECK(law.total() == doctest::Approx(1.0).epsilon(1e-9));
  std::mt19937_64 rng(seed);
  const std::int64_t samples = 100000;
  const auto fit = chi_square_fit(law_distribution(law), sample_closest(scheme, query, samples, rng), samples);
  INFO("d=" << query.d << " l=" << query.l << " k=" << query.k << " gamma=" << query.gamma << " chi2="
            << fit.chi_square << " df=" << fit.degrees_of_freedom);
  CHECK(fit.z <= 3.0);
}

}  // namespace

TEST_CASE("standard closest-contact law agrees with sampled buckets") {
  std::uint64_t seed = 1;
  for (const int k : {2, 8}) {
    for (const int gamma : {1, 2}) {
      for (const int d : {12, 16, 20}) {
        if (gamma > k) continue;
        check_against_sampling(Scheme::Standard, make_query(20, 400, d, 1, k, gamma), seed++);
      }
    }
  }
  check_against_sampling(Scheme::Standard, make_query(20, 400, 18, 3, 10, 3), seed++);
  check_against_sampling(Scheme::Standard, make_query(20, 400, 18, 4, 10, 2), seed++);
}

TEST_CASE("diverse closest-contact law agrees with sampled buckets") {
  std::uint64_t seed = 100;
  for (const int k : {2, 8, 10}) {
    for (const int gamma : {1, 2, 3}) {
      for (const int d : {13, 17, 20}) {
        if (gamma > k) continue;
        check_against_sampling(Scheme::DiversityMax, make_query(20, 400, d, 1, k, gamma), seed++);
      }
    }
  }
  check_against_sampling(Scheme::DiversityMax, make_query(20, 400, 19, 3, 10, 3), seed++);
  check_against_sampling(Scheme::DiversityMax, make_query(20, 400, 18, 4, 10, 2), seed++);
  check_against_sampling(Scheme::DiversityMax, make_query(20, 400, 20, 1, 16, 3), seed++);
}

TEST_CASE("success probability matches the terminal mass of the law") {
  for (const auto scheme : {Scheme::Standard, Scheme::DiversityMax}) {
    for (const int d : {10, 15, 20}) {
      const auto q = make_query(20, 400, d, 1, 8, 2);
      const auto law = closest_law(scheme, LawFormula::Exact, q);
      CHECK(success_prob(scheme, d, 1, 400, 8, 3, 20) == doctest::Approx(law.terminal).epsilon(1e-9));
    }
  }
}

TEST_CASE("a region that cannot overflow the bucket always yields the responsible node") {
  const auto q = make_query(32, 50, 8, 1, 8, 2);
  for (const auto scheme : {Scheme::Standard, Scheme::DiversityMax}) {
    const auto law = closest_law(scheme, LawFormula::Exact, q);
    CHECK(law.terminal == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("the printed diverse forms cover gamma two and three only") {
  auto q = make_query(20, 400, 18, 1, 8, 2);
  CHECK_NOTHROW(closest_law_diverse_printed(q));
  q.gamma = 1;
  CHECK_THROWS_AS(closest_law_diverse_printed(q), UnsupportedParameter);
}

TEST_CASE("mixing over levels preserves normalization") {
  const auto a = closest_law_standard(make_query(20, 400, 18, 3, 10, 2));
  const auto b = closest_law_standard(make_query(20, 400, 18, 4, 10, 2));
  const auto mixed = mix_over_levels({{0.75, a}, {0.25, b}});
  CHECK(mixed.total() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mixed.terminal == doctest::Approx(0.75 * a.terminal + 0.25 * b.terminal));
}
