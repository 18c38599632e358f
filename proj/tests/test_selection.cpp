#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "mrcp/selection.hpp"
#include "oracles.hpp"
#include "support.hpp"

using mrcp::FeatureMatrix;
using mrcp::Matrix;
using testing::oracle_bins;
using testing::oracle_mi;
using testing::oracle_rank;

namespace {

double entropy(const std::vector<int>& x) {
  std::map<int, double> p;
  for (int v : x) p[v] += 1.0;
  double h = 0.0;
  for (const auto& [k, c] : p) {
    const double q = c / static_cast<double>(x.size());
    h -= q * std::log(q);
  }
  return h;
}

std::vector<double> column(const Matrix& m, Eigen::Index c) {
  return {m.col(c).data(), m.col(c).data() + m.rows()};
}

FeatureMatrix noisy_features(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FeatureMatrix F;
  F.values = testing::random_matrix(rows, cols, seed);
  for (int r = 0; r < rows; ++r) F.labels.push_back(static_cast<int>(rng() % 3));
  // Give a few columns some label signal of different strength.
  for (int c = 0; c < cols; c += 2) {
    for (int r = 0; r < rows; ++r) F.values(r, c) += 0.3 * (c + 1) * F.labels[static_cast<std::size_t>(r)];
  }
  for (int c = 0; c < cols; ++c) F.tags.push_back({1 + c / 6, c % 3, static_cast<mrcp::RhoType>(1 + c % 3)});
  return F;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("eight distinct values into two bins") {
  const std::vector<double> x{5, 1, 7, 3, 8, 2, 6, 4};
  const auto b = mrcp::discretize(x, 2);
  CHECK(std::count(b.begin(), b.end(), 0) == 4);
  CHECK(std::count(b.begin(), b.end(), 1) == 4);
  CHECK(b[1] == 0);
  CHECK(b[4] == 1);
}

TEST_CASE("constant column discretizes to zeros") {
  const std::vector<double> x(17, 2.5);
  const auto b = mrcp::discretize(x, 8);
  CHECK(std::all_of(b.begin(), b.end(), [](int v) { return v == 0; }));
}

TEST_CASE("ties share the lowest bin") {
  const std::vector<double> x{1, 2, 2, 2, 3, 4};
  const auto b = mrcp::discretize(x, 3);
  CHECK(b == std::vector<int>{0, 0, 0, 0, 2, 2});
  CHECK(b == oracle_bins(x, 3));
}

TEST_CASE("normal sample into four bins has quartile counts") {
  const auto x = column(testing::random_matrix(1000, 1, 42), 0);
  const auto b = mrcp::discretize(x, 4);
  for (int k = 0; k < 4; ++k) {
    const auto n = std::count(b.begin(), b.end(), k);
    CHECK(std::abs(n - 250) <= 1);
  }
  CHECK(b == oracle_bins(x, 4));
}

TEST_CASE("discretize rejects fewer than two bins") {
  const std::vector<double> x{1, 2};
  CHECK_THROWS_AS(mrcp::discretize(x, 1), std::invalid_argument);
}

TEST_CASE("mutual information of a variable with itself is its entropy") {
  std::vector<int> x;
  for (int i = 0; i < 400; ++i) x.push_back(i % 4);
  CHECK(mrcp::mutual_information(x, x) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> y;
    for (int i = 0; i < 137; ++i) y.push_back(static_cast<int>(rng() % 6));
    CHECK(std::abs(mrcp::mutual_information(y, y) - entropy(y)) < 1e-12);
  }
}

TEST_CASE("two by two joint table") {
  // 40/10/10/40 counts.
  std::vector<int> x, y;
  const int counts[2][2] = {{40, 10}, {10, 40}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int i = 0; i < counts[a][b]; ++i) {
        x.push_back(a);
        y.push_back(b);
      }
  const double direct = 0.4 * std::log(0.4 / 0.25) * 2 + 0.1 * std::log(0.1 / 0.25) * 2;
  CHECK(direct == doctest::Approx(0.1927).epsilon(1e-3));
  CHECK(mrcp::mutual_information(x, y) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("mutual information is non-negative and vanishes for independent draws") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> x, y;
    for (int i = 0; i < 50; ++i) {
      x.push_back(static_cast<int>(rng() % 5));
      y.push_back(static_cast<int>(rng() % 3));
    }
    const double mi = mrcp::mutual_information(x, y);
    CHECK(mi >= 0.0);
    CHECK(mi == doctest::Approx(oracle_mi(x, y)).epsilon(1e-12));
  }
  std::vector<int> x, y;
  for (int i = 0; i < 200000; ++i) {
    x.push_back(static_cast<int>(rng() % 4));
    y.push_back(static_cast<int>(rng() % 4));
  }
  CHECK(mrcp::mutual_information(x, y) < 1e-3);
}

TEST_CASE("mutual information rejects length mismatch") {
  const std::vector<int> x{0, 1, 0};
  const std::vector<int> y{0, 1};
  CHECK_THROWS_AS(mrcp::mutual_information(x, y), std::invalid_argument);
}

TEST_CASE("feature equal to the label ranks first") {
  FeatureMatrix F = noisy_features(90, 6, 5);
  for (int r = 0; r < 90; ++r) F.values(r, 4) = F.labels[static_cast<std::size_t>(r)];
  const auto ranking = mrcp::mrmr_rank(F);
  CHECK(ranking.order.front() == 4);
}

TEST_CASE("greedy ranking matches the per-step argmax oracle") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const int cols = 2 + static_cast<int>(seed % 7);
    const auto F = noisy_features(60 + static_cast<int>(seed), cols, seed);
    const auto ranking = mrcp::mrmr_rank(F);
    CAPTURE(seed);
    CHECK(ranking.order == oracle_rank(F, mrcp::kDefaultBins));
    CHECK(ranking.scores.size() == static_cast<std::size_t>(cols));
  }
}

TEST_CASE("exact duplicate of the top feature is demoted") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const int cols = 3 + static_cast<int>(seed % 5);
    auto F = noisy_features(80, cols, seed + 500);
    const auto base = mrcp::mrmr_rank(F);
    const int top = base.order.front();
    F.values.conservativeResize(Eigen::NoChange, cols + 1);
    F.values.col(cols) = F.values.col(top);
    F.tags.push_back(F.tags[static_cast<std::size_t>(top)]);
    const auto ranking = mrcp::mrmr_rank(F);
    CAPTURE(seed);
    CHECK(ranking.order == oracle_rank(F, mrcp::kDefaultBins));
    // By relevance alone the duplicate would sit right behind the original.
    const auto pos = std::find(ranking.order.begin(), ranking.order.end(), cols) - ranking.order.begin();
    CHECK(ranking.order.front() == top);
    CHECK(pos > 1);
  }
}

TEST_CASE("label-correlated feature beats noise more often as n grows") {
  std::vector<double> wins;
  for (int n : {20, 100, 1000}) {
    int won = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      std::mt19937_64 rng(rep * 31 + static_cast<std::uint64_t>(n));
      std::normal_distribution<double> g;
      FeatureMatrix F;
      F.values.resize(n, 2);
      for (int r = 0; r < n; ++r) {
        const int label = static_cast<int>(rng() % 2);
        F.labels.push_back(label);
        F.values(r, 0) = g(rng);
        F.values(r, 1) = 0.5 * label + g(rng);
      }
      won += mrcp::mrmr_rank(F).order.front() == 1 ? 1 : 0;
    }
    wins.push_back(won / 100.0);
  }
  CHECK(wins[0] <= wins[1]);
  CHECK(wins[1] <= wins[2]);
  CHECK(wins[2] >= 0.99);
}

TEST_CASE("ranking is a permutation and stable under row shuffles") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto F = noisy_features(70, 9, seed + 900);
    const auto ranking = mrcp::mrmr_rank(F);
    auto sorted = ranking.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(9);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(sorted == expected);

    std::vector<int> perm(70);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    FeatureMatrix G = F;
    for (int r = 0; r < 70; ++r) {
      G.values.row(r) = F.values.row(perm[static_cast<std::size_t>(r)]);
      G.labels[static_cast<std::size_t>(r)] = F.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(r)])];
    }
    CHECK(mrcp::mrmr_rank(G).order == ranking.order);
  }
}

TEST_CASE("top-k keeps ranking order and provenance") {
  const auto F = noisy_features(50, 60, 77);
  const auto ranking = mrcp::mrmr_rank(F);

  const auto all = mrcp::select_top_k(F, ranking, 60);
  CHECK(all.cols() == 60);
  for (int j = 0; j < 60; ++j) {
    const int src = ranking.order[static_cast<std::size_t>(j)];
    CHECK(all.values.col(j) == F.values.col(src));
  }

  const auto one = mrcp::select_top_k(F, ranking, 1);
  CHECK(one.cols() == 1);
  CHECK(one.values.col(0) == F.values.col(ranking.order.front()));

  const auto ten = mrcp::select_top_k(F, ranking, 10);
  REQUIRE(ten.cols() == 10);
  REQUIRE(ten.tags.size() == 10);
  for (int j = 0; j < 10; ++j) {
    CHECK(ten.tags[static_cast<std::size_t>(j)] == F.tags[static_cast<std::size_t>(ranking.order[static_cast<std::size_t>(j)])]);
  }
  CHECK(ten.labels == F.labels);

  CHECK_THROWS_AS(mrcp::select_top_k(F, ranking, 0), std::out_of_range);
  CHECK_THROWS_AS(mrcp::select_top_k(F, ranking, 61), std::out_of_range);
}

}  // TEST_SUITE
