#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "csm/analysis.hpp"
#include "csm/error.hpp"
#include "oracles.hpp"

using namespace csm;

namespace {

ResultRow row(double theta, double rse) {
  ResultRow r;
  r.theta = theta;
  r.rse = rse;
  return r;
}

std::filesystem::path tmp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "csm_test_analysis";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::vector<std::string> lines_of(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(ComputeRows, DistancesAngleAndRse) {
  GroundTruthSample g;
  g.t = 1.0;
  g.source = Vec3::Zero();
  g.robots = {Vec3(3, 0, 0), Vec3(0, 4, 0)};
  SourceEstimate e;
  e.t = 1.0;
  e.position = Vec3::Zero();
  const std::vector<GroundTruthSample> truth{g};
  const auto r = analysis::compute_rows(std::vector<SourceEstimate>{e}, truth);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_DOUBLE_EQ(r.rows[0].d1, 3.0);
  EXPECT_DOUBLE_EQ(r.rows[0].d2, 4.0);
  EXPECT_NEAR(r.rows[0].theta, 90.0, 1e-12);
  EXPECT_EQ(r.rows[0].rse, 0.0);
}

TEST(ComputeRows, MissingTruthSkipped) {
  GroundTruthSample g;
  g.t = 0.0;
  g.robots = {Vec3(1, 0, 0), Vec3(0, 1, 0)};
  std::vector<SourceEstimate> est(3);
  est[0].t = 0.0;
  est[1].t = 0.04;
  est[2].t = 0.5;
  est[2].degenerate = true;
  const std::vector<GroundTruthSample> truth{g};
  const auto strict = analysis::compute_rows(est, truth);
  EXPECT_EQ(strict.rows.size(), 1u);
  EXPECT_EQ(strict.skipped, 2u);
  const auto loose = analysis::compute_rows(est, truth, 0.05);
  EXPECT_EQ(loose.rows.size(), 2u);
  EXPECT_EQ(loose.skipped, 1u);
}

TEST(BinByTheta, SingleRow) {
  const std::vector<ResultRow> rows{row(20.0, 0.1)};
  const auto bins = analysis::bin_by_theta(rows, 15.0);
  ASSERT_EQ(bins.size(), 12u);
  EXPECT_EQ(bins[1].count, 1u);
  EXPECT_DOUBLE_EQ(bins[1].lower, 15.0);
  EXPECT_DOUBLE_EQ(bins[1].upper, 30.0);
  EXPECT_DOUBLE_EQ(bins[1].theta_center, 22.5);
  EXPECT_DOUBLE_EQ(bins[1].rse_mean, 0.1);
  EXPECT_DOUBLE_EQ(bins[1].rse_std, 0.0);
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (b != 1) EXPECT_EQ(bins[b].count, 0u);
  }
}

TEST(BinByTheta, PopulationStd) {
  const std::vector<ResultRow> rows{row(16.0, 0.1), row(29.0, 0.3)};
  const auto bins = analysis::bin_by_theta(rows);
  EXPECT_NEAR(bins[1].rse_mean, 0.2, 1e-15);
  EXPECT_NEAR(bins[1].rse_std, 0.1, 1e-15);
}

TEST(BinByTheta, EdgesAndInvalidWidth) {
  const std::vector<ResultRow> rows{row(0.0, 1), row(15.0, 2), row(180.0, 3), row(179.9, 4)};
  const auto bins = analysis::bin_by_theta(rows);
  EXPECT_EQ(bins[0].count, 1u);
  EXPECT_EQ(bins[1].count, 1u);
  EXPECT_EQ(bins[11].count, 2u);
  EXPECT_EQ(analysis::bin_by_theta(rows, 7.0).size(), 26u);
  EXPECT_DOUBLE_EQ(analysis::bin_by_theta(rows, 7.0).back().upper, 180.0);
  EXPECT_THROW(analysis::bin_by_theta(rows, 0.0), std::invalid_argument);
  EXPECT_THROW(analysis::bin_by_theta(rows, -3.0), std::invalid_argument);
}

TEST(BinByTheta, MatchesGroupByOracle) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> theta(0.0, 180.0);
  std::lognormal_distribution<double> rse(-1.0, 1.5);
  std::vector<ResultRow> rows;
  std::vector<double> thetas, values;
  for (int k = 0; k < 10000; ++k) {
    rows.push_back(row(k % 997 == 0 ? 180.0 : theta(rng), rse(rng)));
    thetas.push_back(rows.back().theta);
    values.push_back(rows.back().rse);
  }
  for (double width : {15.0, 10.0, 7.0}) {
    const auto bins = analysis::bin_by_theta(rows, width);
    const auto ref = oracle::group_by_theta(thetas, values, width);
    std::size_t total = 0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
      total += bins[b].count;
      const auto it = ref.find(static_cast<int>(b));
      if (it == ref.end()) {
        EXPECT_EQ(bins[b].count, 0u);
        continue;
      }
      EXPECT_EQ(bins[b].count, it->second.count);
      EXPECT_NEAR(bins[b].rse_mean, it->second.mean, 1e-12 * it->second.mean);
      EXPECT_NEAR(bins[b].rse_std, it->second.std, 1e-9 * it->second.std);
    }
    EXPECT_EQ(total, rows.size());
  }
  // Order invariance.
  auto shuffled = rows;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto a = analysis::bin_by_theta(rows);
  const auto b = analysis::bin_by_theta(shuffled);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(a[k].rse_mean, b[k].rse_mean, 1e-12 * a[k].rse_mean);
  }
}

TEST(EmitCsv, SchemasAndSingleRowFile) {
  ResultRow r;
  r.t = 0.5;
  r.d1 = 1.25;
  r.d2 = 2.0;
  r.theta = 45.0;
  r.rse = 0.125;
  const std::vector<ResultRow> rows{r};
  const auto dist = tmp_path("dist.csv").string();
  analysis::write_rows_csv(dist, rows, analysis::RowSchema::Distance);
  EXPECT_EQ(lines_of(dist), (std::vector<std::string>{"t,d1,d2,rse", "0.5,1.25,2,0.125"}));
  const auto angle = tmp_path("angle.csv").string();
  analysis::write_rows_csv(angle, rows, analysis::RowSchema::Angle);
  EXPECT_EQ(lines_of(angle), (std::vector<std::string>{"t,theta,rse", "0.5,45,0.125"}));
  const auto bins = tmp_path("bins.csv").string();
  analysis::write_bins_csv(bins, analysis::bin_by_theta(rows));
  const auto lines = lines_of(bins);
  ASSERT_EQ(lines.size(), 14u);
  EXPECT_EQ(lines[0][0], '#');
  EXPECT_EQ(lines[1], "theta,rse_mean,rse_std");
  EXPECT_EQ(lines[2], "7.5,nan,nan");
  EXPECT_EQ(lines[5], "52.5,0.125,0");
}

TEST(EmitCsv, RoundTripIsExact) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.0, 180.0);
  std::vector<ResultRow> rows;
  for (int k = 0; k < 500; ++k) {
    ResultRow r;
    r.t = u(rng) / 7.0;
    r.d1 = u(rng) / 3.0;
    r.d2 = u(rng) / 11.0;
    r.theta = u(rng);
    r.rse = std::exp(u(rng) / 10.0) * 1e-12;
    r.degenerate = k % 17 == 0;
    rows.push_back(r);
  }
  const auto path = tmp_path("rows.csv").string();
  analysis::write_rows_csv(path, rows);
  const auto back = analysis::read_rows_csv(path);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].t, rows[k].t);
    EXPECT_EQ(back[k].d1, rows[k].d1);
    EXPECT_EQ(back[k].d2, rows[k].d2);
    EXPECT_EQ(back[k].theta, rows[k].theta);
    EXPECT_EQ(back[k].rse, rows[k].rse);
    EXPECT_EQ(back[k].degenerate, rows[k].degenerate);
  }
  const auto bins = analysis::bin_by_theta(rows);
  const auto bins_path = tmp_path("bins_rt.csv").string();
  analysis::write_bins_csv(bins_path, bins);
  const auto records = analysis::read_bins_csv(bins_path);
  ASSERT_EQ(records.size(), bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    EXPECT_EQ(records[k].theta, bins[k].theta_center);
    EXPECT_EQ(records[k].rse_mean, bins[k].rse_mean);
    EXPECT_EQ(records[k].rse_std, bins[k].rse_std);
  }
}

TEST(EmitCsv, UnwritablePathNamed) {
  const std::vector<ResultRow> rows{row(1, 1)};
  try {
    analysis::write_rows_csv("/nonexistent/dir/rows.csv", rows);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/rows.csv"), std::string::npos);
  }
}

TEST(EmitCsv, RowsWithoutRequiredColumnsRejected) {
  const auto path = tmp_path("norse.csv").string();
  std::ofstream(path) << "t,d1,d2\n1,2,3\n";
  EXPECT_THROW(analysis::read_rows_csv(path), ConfigError);
}

TEST(PlotScript, ReferencesInputsAndPlotsThreeFigures) {
  const std::string s = analysis::plot_script("dist.csv", "time.csv", "bins.csv", "out.png");
  EXPECT_NE(s.find("set datafile separator ','"), std::string::npos);
  EXPECT_NE(s.find("'dist.csv'"), std::string::npos);
  EXPECT_NE(s.find("'time.csv'"), std::string::npos);
  EXPECT_NE(s.find("'bins.csv'"), std::string::npos);
  EXPECT_NE(s.find("out.png"), std::string::npos);
  std::size_t plots = 0;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("plot ", 0) == 0) ++plots;
  }
  EXPECT_EQ(plots, 3u);
}
