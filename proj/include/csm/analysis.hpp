#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "csm/mapper.hpp"
#include "csm/scenario.hpp"

namespace csm {

struct ResultRow {
  double t = 0.0;
  double d1 = 0.0;     // m, robot 1 to true source
  double d2 = 0.0;     // m, robot 2 to true source
  double theta = 0.0;  // degrees at the true source
  double rse = 0.0;    // m
  bool degenerate = false;
};

struct ThetaBin {
  double theta_center = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double rse_mean = 0.0;  // 0 when count == 0
  double rse_std = 0.0;   // population std
  std::size_t count = 0;
};

namespace analysis {

inline constexpr double kDefaultBinWidth = 15.0;

struct RowsResult {
  std::vector<ResultRow> rows;
  std::size_t skipped = 0;  // estimates without ground truth within tolerance
};

/// Joins each estimate with the nearest ground-truth sample (within
/// `tolerance` seconds) and evaluates d1, d2, theta and RSE on true geometry.
RowsResult compute_rows(std::span<const SourceEstimate> estimates,
                        std::span<const GroundTruthSample> truth, double tolerance = 1e-6);

/// Bins [0, w), [w, 2w), ..., with the last bin closed at 180. Empty bins are
/// kept with count 0. Throws std::invalid_argument unless bin_width > 0.
std::vector<ThetaBin> bin_by_theta(std::span<const ResultRow> rows,
                                   double bin_width = kDefaultBinWidth);

enum class RowSchema {
  Full,      // t,d1,d2,theta,rse,degenerate
  Distance,  // t,d1,d2,rse
  Angle,     // t,theta,rse
};

std::string rows_csv(std::span<const ResultRow> rows, RowSchema schema = RowSchema::Full);
/// theta,rse_mean,rse_std; empty bins are written as nan.
std::string bins_csv(std::span<const ThetaBin> bins);

void write_rows_csv(const std::string& path, std::span<const ResultRow> rows,
                    RowSchema schema = RowSchema::Full);
void write_bins_csv(const std::string& path, std::span<const ThetaBin> bins);

/// Reads any rows file carrying at least theta and rse columns; missing
/// optional columns are left at zero.
std::vector<ResultRow> read_rows_csv(const std::string& path);

struct BinRecord {
  double theta = 0.0;
  double rse_mean = 0.0;
  double rse_std = 0.0;
};
std::vector<BinRecord> read_bins_csv(const std::string& path);

/// Gnuplot script rendering the three figure types from the given CSVs.
std::string plot_script(const std::string& distance_csv, const std::string& angle_csv,
                        const std::string& bins_csv, const std::string& output_png);

}  // namespace analysis
}  // namespace csm
