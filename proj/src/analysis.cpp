#include "csm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "csm/csv.hpp"
#include "csm/error.hpp"

namespace csm::analysis {

RowsResult compute_rows(std::span<const SourceEstimate> estimates,
                        std::span<const GroundTruthSample> truth, double tolerance) {
  RowsResult out;
  out.rows.reserve(estimates.size());
  for (const SourceEstimate& e : estimates) {
    const auto it = std::lower_bound(truth.begin(), truth.end(), e.t,
                                     [](const GroundTruthSample& g, double t) { return g.t < t; });
    const GroundTruthSample* best = nullptr;
    if (it != truth.end()) {
      best = &*it;
    }
    if (it != truth.begin()) {
      const GroundTruthSample* prev = &*(it - 1);
      if (best == nullptr || std::abs(prev->t - e.t) <= std::abs(best->t - e.t)) {
        best = prev;
      }
    }
    if (best == nullptr || std::abs(best->t - e.t) > tolerance || best->robots.size() < 2) {
      ++out.skipped;
      continue;
    }
    ResultRow row;
    row.t = e.t;
    row.d1 = (best->robots[0] - best->source).norm();
    row.d2 = (best->robots[1] - best->source).norm();
    row.theta = geom::baseline_angle(best->source, best->robots[0], best->robots[1]);
    row.rse = geom::rse(e.position, best->source);
    row.degenerate = e.degenerate;
    out.rows.push_back(row);
  }
  return out;
}

std::vector<ThetaBin> bin_by_theta(std::span<const ResultRow> rows, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw std::invalid_argument("bin_by_theta: bin width must be positive");
  }
  const auto n_bins = static_cast<std::size_t>(std::ceil(180.0 / bin_width - 1e-9));
  std::vector<ThetaBin> bins(n_bins);
  std::vector<double> sum(n_bins, 0.0);
  std::vector<std::size_t> index(rows.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lower = static_cast<double>(b) * bin_width;
    bins[b].upper = std::min(bins[b].lower + bin_width, 180.0);
    bins[b].theta_center = 0.5 * (bins[b].lower + bins[b].upper);
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double theta = std::clamp(rows[r].theta, 0.0, 180.0);
    const auto b = std::min(static_cast<std::size_t>(theta / bin_width), n_bins - 1);
    index[r] = b;
    sum[b] += rows[r].rse;
    ++bins[b].count;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count > 0) {
      bins[b].rse_mean = sum[b] / static_cast<double>(bins[b].count);
    }
  }
  std::vector<double> sq(n_bins, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double d = rows[r].rse - bins[index[r]].rse_mean;
    sq[index[r]] += d * d;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count > 0) {
      bins[b].rse_std = std::sqrt(sq[b] / static_cast<double>(bins[b].count));
    }
  }
  return bins;
}

std::string rows_csv(std::span<const ResultRow> rows, RowSchema schema) {
  using csv::format;
  std::ostringstream s;
  switch (schema) {
    case RowSchema::Full:
      s << "t,d1,d2,theta,rse,degenerate\n";
      break;
    case RowSchema::Distance:
      s << "t,d1,d2,rse\n";
      break;
    case RowSchema::Angle:
      s << "t,theta,rse\n";
      break;
  }
  for (const ResultRow& r : rows) {
    switch (schema) {
      case RowSchema::Full:
        s << format(r.t) << ',' << format(r.d1) << ',' << format(r.d2) << ',' << format(r.theta)
          << ',' << format(r.rse) << ',' << (r.degenerate ? 1 : 0) << '\n';
        break;
      case RowSchema::Distance:
        s << format(r.t) << ',' << format(r.d1) << ',' << format(r.d2) << ',' << format(r.rse)
          << '\n';
        break;
      case RowSchema::Angle:
        s << format(r.t) << ',' << format(r.theta) << ',' << format(r.rse) << '\n';
        break;
    }
  }
  return s.str();
}

std::string bins_csv(std::span<const ThetaBin> bins) {
  using csv::format;
  std::ostringstream s;
  s << "# rse_std is the population standard deviation; empty bins are nan\n";
  s << "theta,rse_mean,rse_std\n";
  for (const ThetaBin& b : bins) {
    s << format(b.theta_center) << ',';
    if (b.count == 0) {
      s << "nan,nan\n";
    } else {
      s << format(b.rse_mean) << ',' << format(b.rse_std) << '\n';
    }
  }
  return s.str();
}

void write_rows_csv(const std::string& path, std::span<const ResultRow> rows, RowSchema schema) {
  csv::write_file(path, rows_csv(rows, schema));
}

void write_bins_csv(const std::string& path, std::span<const ThetaBin> bins) {
  csv::write_file(path, bins_csv(bins));
}

std::vector<ResultRow> read_rows_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  auto optional_col = [&](const char* name) -> long {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    return it == table.header.end() ? -1 : static_cast<long>(it - table.header.begin());
  };
  const std::size_t theta = table.column("theta", path);
  const std::size_t rse = table.column("rse", path);
  const long t = optional_col("t");
  const long d1 = optional_col("d1");
  const long d2 = optional_col("d2");
  const long degenerate = optional_col("degenerate");
  std::vector<ResultRow> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    auto get = [&](long c) {
      return c < 0 ? 0.0 : csv::parse_double(f[static_cast<std::size_t>(c)], path, r + 1);
    };
    ResultRow row;
    row.t = get(t);
    row.d1 = get(d1);
    row.d2 = get(d2);
    row.theta = csv::parse_double(f[theta], path, r + 1);
    row.rse = csv::parse_double(f[rse], path, r + 1);
    row.degenerate = get(degenerate) != 0.0;
    if (!std::isfinite(row.theta) || row.theta < 0.0 || row.theta > 180.0) {
      throw ConfigError(path + ": row " + std::to_string(r + 1) + ": theta outside [0, 180]");
    }
    out.push_back(row);
  }
  return out;
}

std::vector<BinRecord> read_bins_csv(const std::string& path) {
  const csv::Table table = csv::read(path);
  const std::size_t theta = table.column("theta", path);
  const std::size_t mean = table.column("rse_mean", path);
  const std::size_t sd = table.column("rse_std", path);
  std::vector<BinRecord> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    out.push_back({csv::parse_double(f[theta], path, r + 1),
                   csv::parse_double(f[mean], path, r + 1),
                   csv::parse_double(f[sd], path, r + 1)});
  }
  return out;
}

std::string plot_script(const std::string& distance_csv, const std::string& angle_csv,
                        const std::string& bins_csv, const std::string& output_png) {
  std::ostringstream s;
  s << "# gnuplot script: distances, baseline angle and binned RSE\n"
    << "set datafile separator ','\n"
    << "set datafile missing 'nan'\n"
    << "set key autotitle columnhead\n"
    << "set terminal pngcairo size 1500,420\n"
    << "set output '" << output_png << "'\n"
    << "set multiplot layout 1,3\n"
    << "\n"
    << "set xlabel 'Time (sec)'\n"
    << "set ylabel 'd (m)'\n"
    << "set y2label 'RSE (m)'\n"
    << "set yrange [0:5]\n"
    << "set y2range [0:10]\n"
    << "set ytics nomirror\n"
    << "set y2tics\n"
    << "plot '" << distance_csv << "' using 1:2 with lines lc rgb 'blue' title 'd1', \\\n"
    << "     '' using 1:3 with lines lc rgb 'green' title 'd2', \\\n"
    << "     '' using 1:4 axes x1y2 with lines lc rgb 'red' title 'RSE'\n"
    << "\n"
    << "set ylabel 'theta (deg)'\n"
    << "set yrange [0:180]\n"
    << "plot '" << angle_csv << "' using 1:2 with lines lc rgb 'blue' title 'theta', \\\n"
    << "     '' using 1:3 axes x1y2 with lines lc rgb 'red' title 'RSE'\n"
    << "\n"
    << "unset y2label\n"
    << "unset y2tics\n"
    << "set xlabel 'theta (deg)'\n"
    << "set ylabel 'RSE (m)'\n"
    << "set xrange [0:180]\n"
    << "set autoscale y\n"
    << "plot '" << bins_csv << "' using 1:2:3 with yerrorbars lc rgb 'black' title 'mean RSE'\n"
    << "\n"
    << "unset multiplot\n";
  return s.str();
}

}  // namespace csm::analysis
