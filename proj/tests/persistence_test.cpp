#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "totopo/error.hpp"
#include "totopo/persistence.hpp"

using namespace totopo;

namespace {

std::vector<PersistencePoint> pts(std::initializer_list<std::pair<double, double>> l, int dim = 0) {
  std::vector<PersistencePoint> out;
  for (auto [b, d] : l) out.push_back({b, d, dim});
  return out;
}

PersistenceDiagram diagram(std::initializer_list<std::pair<double, double>> l, int dim = 0) {
  PersistenceDiagram pd;
  pd.points = pts(l, dim);
  return pd;
}

void expect_same_multiset(std::vector<PersistencePoint> a, std::vector<PersistencePoint> b, double tol) {
  a = oracle::canonical(std::move(a));
  b = oracle::canonical(std::move(b));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].dim, b[i].dim);
    EXPECT_NEAR(a[i].birth, b[i].birth, tol);
    EXPECT_NEAR(a[i].death, b[i].death, tol);
  }
}

}  // namespace

TEST(SublevelPd, HandCases) {
  std::vector<double> mono{0, 1, 2, 3};
  EXPECT_EQ(sublevel_pd(mono).sorted(), pts({{0, 3}}));
  std::vector<double> two{0, 2, 1, 3};
  EXPECT_EQ(sublevel_pd(two).sorted(), pts({{0, 3}, {1, 2}}));
  std::vector<double> flat{5, 5, 5};
  EXPECT_EQ(sublevel_pd(flat).sorted(), pts({{5, 5}}));
  std::vector<double> one{2.5};
  EXPECT_EQ(sublevel_pd(one).sorted(), pts({{2.5, 2.5}}));
  EXPECT_EQ(sublevel_pd(one).source, DiagramSource::direct);
}

TEST(SublevelPd, MatchesBruteForceComponents) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<double> f(n);
    // Small integer alphabets exercise ties and plateaus.
    const bool ties = trial % 2 == 0;
    for (double& v : f) v = ties ? static_cast<double>(rng() % 5) : u(rng);
    auto got = sublevel_pd(f).points;
    for (const auto& p : got) EXPECT_EQ(p.dim, 0);
    EXPECT_EQ(oracle::canonical(got), oracle::canonical(oracle::sublevel_components(f))) << "trial " << trial;
  }
}

TEST(TakensEmbedding, Windows) {
  std::vector<double> x{1, 2, 3, 4};
  auto c = takens_embedding(x, {2, 1, 1});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_EQ(std::vector<double>(c[2].begin(), c[2].end()), (std::vector<double>{3, 4}));
  auto single = takens_embedding(x, {4, 1, 1});
  EXPECT_EQ(single.flat(), (std::vector<double>{1, 2, 3, 4}));
  std::vector<double> hundred(100, 0.0);
  EXPECT_EQ(takens_embedding(hundred, {10, 5, 1}).size(), 19u);
  EXPECT_THROW(takens_embedding(x, {5, 1, 1}), ShapeError);
  auto delayed = takens_embedding(std::vector<double>{0, 1, 2, 3, 4}, {2, 1, 3});
  EXPECT_EQ(delayed.flat(), (std::vector<double>{0, 3, 1, 4}));
}

TEST(TakensEmbedding, MultichannelConcatenatesWindows) {
  std::vector<double> a{1, 2, 3}, b{10, 20, 30};
  auto c = takens_embedding({std::span<const double>(a), std::span<const double>(b)}, {2, 1, 1});
  EXPECT_EQ(c.dim(), 4u);
  EXPECT_EQ(c.flat(), (std::vector<double>{1, 2, 10, 20, 2, 3, 20, 30}));
}

TEST(RipsPd, LineOfThreePoints) {
  auto pd = rips_pd(PointCloud::from_rows({{0}, {1}, {3}}));
  EXPECT_EQ(pd.source, DiagramSource::rips);
  EXPECT_EQ(oracle::canonical(pd.in_dim(0)), pts({{0, 1}, {0, 2}, {0, 3}}));
  EXPECT_TRUE(pd.in_dim(1).empty());
}

TEST(RipsPd, UnitSquareHasOneLoop) {
  auto pd = rips_pd(PointCloud::from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
  auto h1 = pd.in_dim(1);
  ASSERT_EQ(h1.size(), 1u);
  EXPECT_EQ(h1[0].birth, 1.0);
  EXPECT_DOUBLE_EQ(h1[0].death, std::sqrt(2.0));
  EXPECT_EQ(pd.in_dim(0).size(), 4u);
}

TEST(RipsPd, SinglePoint) {
  auto pd = rips_pd(PointCloud::from_rows({{3, 4}}));
  EXPECT_EQ(pd.sorted(), pts({{0, 0}}));
  auto capped = rips_pd(PointCloud::from_rows({{3, 4}}), {1, 2.5});
  EXPECT_EQ(capped.sorted(), pts({{0, 2.5}}));
}

TEST(RipsPd, DuplicatePointsAndErrors) {
  auto pd = rips_pd(PointCloud::from_rows({{1, 1}, {1, 1}, {2, 1}}));
  EXPECT_EQ(oracle::canonical(pd.in_dim(0)), pts({{0, 0}, {0, 1}, {0, 1}}));
  EXPECT_THROW(rips_pd(PointCloud::from_rows({{0}}), {2, std::nullopt}), UnsupportedError);
  EXPECT_THROW(PointCloud::from_rows({}), ShapeError);
}

TEST(RipsPd, ThresholdCapsEssentialClasses) {
  // Two far-apart pairs: below the gap, two H0 classes survive to the threshold.
  auto pd = rips_pd(PointCloud::from_rows({{0}, {1}, {10}, {11}}), {1, 5.0});
  EXPECT_EQ(oracle::canonical(pd.in_dim(0)), pts({{0, 1}, {0, 1}, {0, 5}, {0, 5}}));
  // A square whose diagonal exceeds the threshold keeps an essential loop.
  auto sq = rips_pd(PointCloud::from_rows({{0, 0}, {1, 0}, {1, 1}, {0, 1}}), {1, 1.2});
  EXPECT_EQ(sq.in_dim(1), pts({{1, 1.2}}, 1));
}

TEST(RipsPd, MatchesFullBoundaryReduction) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const std::size_t d = 1 + rng() % 3;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows)
      for (double& v : r) v = trial % 3 == 0 ? static_cast<double>(rng() % 3) : u(rng);
    const double radius = trial % 4 == 1 ? 0.8 : -1.0;
    RipsOptions opt;
    if (radius >= 0) opt.max_radius = radius;
    auto got = rips_pd(PointCloud::from_rows(rows), opt).points;
    expect_same_multiset(got, oracle::rips_full_reduction(rows, radius), 1e-12);
  }
}

TEST(RipsPd, MatchesFullBoundaryReductionOnLargerClouds) {
  // Large enough that some columns need additions, including additions of
  // columns that were themselves reduced.
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 20 + rng() % 10;
    std::vector<std::vector<double>> rows(n, std::vector<double>(std::size_t{2} << (trial % 3)));
    for (auto& r : rows)
      for (double& v : r) v = g(rng);
    auto got = rips_pd(PointCloud::from_rows(rows)).points;
    expect_same_multiset(got, oracle::rips_full_reduction(rows, -1.0), 1e-12);
  }
}

TEST(RipsPd, H0DeathsAreMstLengthsAndOrderDoesNotMatter) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> rows(12, std::vector<double>(2));
    for (auto& r : rows)
      for (double& v : r) v = u(rng);
    auto pd = rips_pd(PointCloud::from_rows(rows));
    EXPECT_EQ(pd.in_dim(0).size(), rows.size());
    for (const auto& p : pd.in_dim(0)) EXPECT_EQ(p.birth, 0.0);
    // Prim's algorithm as an independent MST.
    std::vector<double> best(rows.size(), 1e300);
    std::vector<bool> in(rows.size(), false);
    best[0] = 0;
    std::vector<double> mst;
    for (std::size_t it = 0; it < rows.size(); ++it) {
      std::size_t pick = 0;
      double bv = 1e301;
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (!in[i] && best[i] < bv) bv = best[i], pick = i;
      in[pick] = true;
      if (it > 0) mst.push_back(bv);
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (!in[i]) best[i] = std::min(best[i], oracle::euclid(rows[pick], rows[i]));
    }
    std::vector<double> deaths;
    for (const auto& p : pd.in_dim(0)) deaths.push_back(p.death);
    std::sort(deaths.begin(), deaths.end());
    deaths.pop_back();  // essential class
    std::sort(mst.begin(), mst.end());
    EXPECT_EQ(deaths, mst);

    auto shuffled = rows;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(pd.sorted(), rips_pd(PointCloud::from_rows(shuffled)).sorted());
  }
}

TEST(RipsPd, CircleSampleHasOneDominantLoop) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 40; ++i) {
    const double t = 2 * std::numbers::pi * i / 40;
    rows.push_back({std::cos(t), std::sin(t)});
  }
  auto h1 = rips_pd(PointCloud::from_rows(rows)).in_dim(1);
  ASSERT_FALSE(h1.empty());
  auto top = *std::max_element(h1.begin(), h1.end(), [](auto& a, auto& b) { return a.lifetime() < b.lifetime(); });
  EXPECT_NEAR(top.birth, 2 * std::sin(std::numbers::pi / 40), 1e-12);
  EXPECT_GT(top.death, 1.7);
  for (const auto& p : h1) EXPECT_LT(p.birth, p.death);
}

TEST(Bottleneck, HandCases) {
  auto a = diagram({{0, 2}, {1, 3}});
  EXPECT_EQ(bottleneck_distance(a, a, 0), 0.0);
  EXPECT_NEAR(bottleneck_distance(diagram({{0, 2}}), diagram({{0, 2.2}}), 0), 0.2, 1e-12);
  EXPECT_NEAR(bottleneck_distance(diagram({{0, 0.1}}), diagram({}), 0), 0.05, 1e-15);
  EXPECT_EQ(bottleneck_distance(diagram({}), diagram({}), 0), 0.0);
  // Only the requested dimension counts.
  EXPECT_EQ(bottleneck_distance(diagram({{0, 5}}, 1), diagram({}), 0), 0.0);
}

TEST(Bottleneck, MetricProperties) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  auto random_pd = [&]() {
    PersistenceDiagram pd;
    const int n = rng() % 6;
    for (int i = 0; i < n; ++i) {
      double b = u(rng), d = b + u(rng);
      pd.points.push_back({b, d, 0});
    }
    return pd;
  };
  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_pd(), b = random_pd(), c = random_pd();
    const double ab = bottleneck_distance(a, b, 0);
    EXPECT_EQ(ab, bottleneck_distance(b, a, 0));
    EXPECT_LE(bottleneck_distance(a, c, 0), ab + bottleneck_distance(b, c, 0) + 1e-12);
    EXPECT_EQ(bottleneck_distance(a, a, 0), 0.0);
    if (!a.points.empty() || !b.points.empty()) {
      EXPECT_EQ(ab == 0.0, a.sorted() == b.sorted() || (a.points.empty() && b.points.empty()));
    }
    auto shuffled = a;
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), rng);
    EXPECT_EQ(bottleneck_distance(shuffled, b, 0), ab);
  }
}

TEST(Bottleneck, SublevelStability) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 60;
    const double eps = 0.1 * (0.01 + 0.99 * (u(rng) + 1) / 2);
    std::vector<double> f(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = u(rng);
      g[i] = f[i] + eps * u(rng);
    }
    double sup = 0;
    for (std::size_t i = 0; i < n; ++i) sup = std::max(sup, std::abs(f[i] - g[i]));
    EXPECT_LE(bottleneck_distance(sublevel_pd(f), sublevel_pd(g), 0), sup + 1e-9);
  }
}

TEST(DiagramIo, RoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  PersistenceDiagram pd;
  pd.source = DiagramSource::rips;
  for (int i = 0; i < 50; ++i) {
    double b = u(rng) / 3;
    pd.points.push_back({b, b + u(rng), i % 2});
  }
  const auto text = format_diagram(pd);
  EXPECT_EQ(text.substr(0, 19), "# totopo-diagram v1");
  auto back = parse_diagram(text);
  EXPECT_EQ(back.points, pd.points);
  EXPECT_EQ(back.source, DiagramSource::rips);
  EXPECT_THROW(parse_diagram("0 1 2\n"), FormatError);
  EXPECT_THROW(parse_diagram("# totopo-diagram v1 source=direct\n0 2 1\n"), FormatError);
}
