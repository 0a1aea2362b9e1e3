#include <doctest.h>

#include "support.hpp"

#include <mpca/harness.hpp>

#include <sstream>

using namespace mpca;
using Eigen::MatrixXd;

TEST_CASE("grid and method parsing") {
  const auto g = parse_grid("1x1, 2x3,4x2");
  REQUIRE(g.size() == 3);
  CHECK(g[1].pdim == 2);
  CHECK(g[1].qdim == 3);
  CHECK(g[2].pdim == 4);
  CHECK_THROWS_AS(parse_grid(""), ValidationError);
  CHECK_THROWS_AS(parse_grid("2x"), ValidationError);
  CHECK_THROWS_AS(parse_grid("0x2"), ValidationError);
  CHECK_THROWS_AS(parse_grid("2by2"), ValidationError);

  const auto m = parse_methods("mpca,pca,2d2pca");
  REQUIRE(m.size() == 3);
  CHECK(m[2] == Method::twod2pca);
  CHECK(method_name(Method::twod2pca) == "2d2pca");
  CHECK_THROWS_AS(parse_method("ica"), ValidationError);
}

TEST_CASE("compare produces one row per grid point and method") {
  std::mt19937_64 rng(91);
  const auto train = mpca::testing::structured_dataset(rng, 30, 5, 4);
  const auto test = mpca::testing::structured_dataset(rng, 10, 5, 4);
  const auto grid = parse_grid("1x1,2x2,5x4");
  const auto methods = parse_methods("mpca,pca,2d2pca");
  const auto rows = compare(train, test, grid, methods);
  REQUIRE(rows.size() == 9);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const ReportRow& mp = rows[3 * g];
    const ReportRow& pc = rows[3 * g + 1];
    const ReportRow& tw = rows[3 * g + 2];
    CHECK(mp.method == "mpca");
    CHECK(pc.method == "pca");
    CHECK(tw.method == "2d2pca");
    CHECK(mp.pdim == grid[g].pdim);
    CHECK(pc.components == grid[g].pdim * grid[g].qdim);
    // PCA is optimal over all rank-k projections, MPCA over the separable ones
    CHECK(pc.train_error <= mp.train_error + 1e-10);
    CHECK(mp.train_error <= tw.train_error + 1e-10);
    for (const auto* r : {&mp, &pc, &tw}) {
      CHECK(r->explained_variance >= 0);
      CHECK(r->explained_variance <= 1);
      CHECK(r->test_rmse == doctest::Approx(std::sqrt(r->test_error / 20)));
    }
  }
  CHECK(rows[0].free_parameters == 7);
  CHECK(rows[1].free_parameters == 19);
  // full dimensions reconstruct exactly
  for (std::size_t i = 6; i < 9; ++i) {
    CHECK(rows[i].train_error <= 1e-12);
    CHECK(rows[i].test_error <= 1e-12);
    CHECK(rows[i].explained_variance == doctest::Approx(1.0));
  }

  std::ostringstream csv;
  write_report_csv(csv, rows);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header.rfind("method,pdim,qdim,components,free_parameters,train_error,test_error", 0) == 0);
  int count = 0;
  for (std::string line; std::getline(lines, line);) ++count;
  CHECK(count == 9);

  CHECK_THROWS_AS(compare(train, mpca::testing::structured_dataset(rng, 5, 4, 5), grid, methods),
                  ValidationError);
  CHECK_THROWS_AS(compare(train, test, parse_grid("6x1"), methods), ValidationError);
}

TEST_CASE("mean squared error") {
  std::mt19937_64 rng(92);
  const auto a = mpca::testing::gaussian_dataset(rng, 4, 2, 3);
  CHECK(mean_squared_error(a, a) == 0);
  std::vector<MatrixXd> shifted;
  for (const auto& x : a.samples()) shifted.push_back(x + MatrixXd::Constant(2, 3, 0.5));
  CHECK(mean_squared_error(a, MatrixDataset<double>(shifted)) == doctest::Approx(6 * 0.25));
}

TEST_CASE("verify passes on generic specs") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto spec = random_spec<double>(6, 5, 3, 2, 0.5, seed);
    const auto report = verify(spec);
    CHECK(!report.checks.empty());
    for (const auto& c : report.checks) {
      INFO(c.name, " ", c.pdim, "x", c.qdim, " residual ", c.residual);
      CHECK((c.passed || c.skipped));
    }
    CHECK(report.all_passed());
    const auto j = report.to_json();
    CHECK(j.at("checks").size() == report.checks.size());
  }
}

TEST_CASE("verify covers every nesting regime") {
  const auto report = verify(random_spec<double>(6, 5, 3, 2, 0.5, 4));
  for (const char* tag : {"nesting(a)", "nesting(b)", "nesting(c)", "nesting(d)", "row shift",
                          "column shift"}) {
    INFO(tag);
    int hits = 0;
    for (const auto& ch : report.checks)
      if (ch.name.find(tag) != std::string::npos) ++hits;
    CHECK(hits > 0);
  }
  for (const auto& ch : report.checks) {
    if (ch.name.rfind("nesting(b)", 0) == 0) CHECK((ch.pdim < 3 && ch.qdim >= 2));
    if (ch.name.rfind("nesting(c)", 0) == 0) CHECK((ch.pdim >= 3 && ch.qdim < 2));
  }
}
