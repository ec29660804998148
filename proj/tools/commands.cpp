#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <sstream>

#include "csm/analysis.hpp"
#include "csm/array.hpp"
#include "csm/csv.hpp"
#include "csm/doa.hpp"
#include "csm/error.hpp"
#include "csm/mapper.hpp"
#include "csm/scenario.hpp"
#include "csm/wav.hpp"

namespace csm::cli {
namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  bool bypass = false;
  std::optional<std::uint64_t> seed;
  double bin_width = analysis::kDefaultBinWidth;
  bool figures = false;
};

void simulate(const SimulateArgs& a, std::ostream& out) {
  TrialConfig config = scenario::load_trial_config(a.config);
  if (a.seed) {
    config.seed = *a.seed;
  }
  if (a.bypass) {
    config = scenario::with_bypass(std::move(config));
  }
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory '" + a.out_dir + "': " + ec.message());
  }
  const fs::path dir(a.out_dir);

  const TrialOutput trial = scenario::run_trial(config);
  for (std::size_t r = 0; r < trial.streams.size(); ++r) {
    mapper::write_observations_csv((dir / ("robot" + std::to_string(r + 1) + "_observations.csv")).string(),
                                   trial.streams[r]);
  }
  const SyncResult sync =
      mapper::synchronize(trial.streams[0], trial.streams[1], config.sync_tolerance);
  const std::vector<SourceEstimate> estimates = mapper::map_stream(sync.pairs);
  mapper::write_estimates_csv((dir / "estimates.csv").string(), estimates);

  const analysis::RowsResult rows =
      analysis::compute_rows(estimates, trial.truth, 0.5 / config.record_rate);
  analysis::write_rows_csv((dir / "rows.csv").string(), rows.rows);
  const std::vector<ThetaBin> bins = analysis::bin_by_theta(rows.rows, a.bin_width);
  analysis::write_bins_csv((dir / "bins.csv").string(), bins);

  if (a.figures) {
    scenario::write_truth_csv((dir / "truth.csv").string(), trial.truth);
    analysis::write_rows_csv((dir / "dist.csv").string(), rows.rows, analysis::RowSchema::Distance);
    analysis::write_rows_csv((dir / "time.csv").string(), rows.rows, analysis::RowSchema::Angle);
    csv::write_file((dir / "plot.gp").string(),
                    analysis::plot_script("dist.csv", "time.csv", "bins.csv", "figures.png"));
  }
  out << "ticks " << config.tick_count() << ", estimates " << estimates.size()
      << ", unmatched " << sync.dropped_first << "/" << sync.dropped_second
      << ", rows " << rows.rows.size() << '\n';
}

void doa_command(const std::string& wav_path, const std::string& geometry_path,
                 const std::string& out_csv) {
  const MicArrayGeometry geometry =
      geometry_path.empty() ? MicArrayGeometry::from_spacings(ArraySpacings::pioneer2dx())
                            : load_geometry(geometry_path);
  const wav::WavData data = wav::read(wav_path);
  if (static_cast<int>(data.channels.size()) != geometry.size()) {
    throw ConfigError(wav_path + ": expected " + std::to_string(geometry.size()) +
                      " channels, found " + std::to_string(data.channels.size()));
  }
  const std::size_t total = data.channels.front().size();
  std::ostringstream s;
  s << "t,x,y,z,power\n";
  if (total >= kDefaultFrameLength) {
    const doa::SrpSearch search(geometry, SphericalGrid::icosahedral(), data.sample_rate);
    for (std::size_t start = 0; start + kDefaultFrameLength <= total; start += kDefaultHop) {
      MultichannelFrame frame;
      frame.sample_rate = data.sample_rate;
      frame.timestamp = static_cast<double>(start) / data.sample_rate;
      for (const auto& c : data.channels) {
        frame.channels.emplace_back(c.begin() + static_cast<std::ptrdiff_t>(start),
                                    c.begin() + static_cast<std::ptrdiff_t>(start + kDefaultFrameLength));
      }
      const PotentialSource p = search.estimate(frame);
      s << csv::format(p.timestamp) << ',' << csv::format(p.direction.x()) << ','
        << csv::format(p.direction.y()) << ',' << csv::format(p.direction.z()) << ','
        << csv::format(p.power) << '\n';
    }
  }
  csv::write_file(out_csv, s.str());
}

void triangulate_command(const std::string& first, const std::string& second,
                         double tolerance, const std::string& out_csv, std::ostream& out) {
  const auto s1 = mapper::read_observations_csv(first);
  const auto s2 = mapper::read_observations_csv(second);
  const SyncResult sync = mapper::synchronize(s1, s2, tolerance);
  const auto estimates = mapper::map_stream(sync.pairs);
  mapper::write_estimates_csv(out_csv, estimates);
  out << "estimates " << estimates.size() << ", unmatched " << sync.dropped_first << "/"
      << sync.dropped_second << '\n';
}

void analyze_command(const std::string& rows_csv, double bin_width, const std::string& out_csv) {
  const auto rows = analysis::read_rows_csv(rows_csv);
  analysis::write_bins_csv(out_csv, analysis::bin_by_theta(rows, bin_width));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cooperative sound mapping: simulation, DoA estimation, triangulation, analysis",
               "csm"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a trial and write CSV outputs");
  simulate_cmd->add_option("--config", sim.config, "Trial config (JSON)")->required();
  simulate_cmd->add_option("--out", sim.out_dir, "Output directory")->required();
  simulate_cmd->add_flag("--bypass", sim.bypass, "Analytic DoAs, no pose noise, no tracking");
  simulate_cmd->add_option("--seed", sim.seed, "Override the config seed");
  simulate_cmd->add_option("--bin-width", sim.bin_width, "Theta bin width (deg)")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_flag("--figures", sim.figures,
                         "Also write truth, figure CSVs and a gnuplot script");

  std::string wav_path;
  std::string geometry_path;
  std::string doa_out;
  auto* doa_cmd = app.add_subcommand("doa", "Per-frame DoA from a 16-channel WAV");
  doa_cmd->add_option("wav", wav_path, "Input WAV")->required();
  doa_cmd->add_option("--geometry", geometry_path, "Array geometry (JSON)");
  doa_cmd->add_option("--out", doa_out, "Output CSV")->required();

  std::string obs1;
  std::string obs2;
  std::string tri_out;
  double tolerance = mapper::kDefaultSyncTolerance;
  auto* tri_cmd = app.add_subcommand("triangulate", "Triangulate two observation streams");
  tri_cmd->add_option("first", obs1, "Robot 1 observations CSV")->required();
  tri_cmd->add_option("second", obs2, "Robot 2 observations CSV")->required();
  tri_cmd->add_option("--tolerance", tolerance, "Synchronization tolerance (s)")
      ->check(CLI::NonNegativeNumber);
  tri_cmd->add_option("--out", tri_out, "Output estimates CSV")->required();

  std::string rows_path;
  std::string bins_out;
  double bin_width = analysis::kDefaultBinWidth;
  auto* analyze_cmd = app.add_subcommand("analyze", "Bin RSE rows by theta");
  analyze_cmd->add_option("rows", rows_path, "Rows CSV")->required();
  analyze_cmd->add_option("--bin-width", bin_width, "Theta bin width (deg)")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--out", bins_out, "Output bins CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "csm: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (simulate_cmd->parsed()) {
      simulate(sim, out);
    } else if (doa_cmd->parsed()) {
      doa_command(wav_path, geometry_path, doa_out);
    } else if (tri_cmd->parsed()) {
      triangulate_command(obs1, obs2, tolerance, tri_out, out);
    } else if (analyze_cmd->parsed()) {
      analyze_command(rows_path, bin_width, bins_out);
    }
  } catch (const ConfigError& e) {
    err << "csm: config error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "csm: i/o error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "csm: invalid data: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"csm"};
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace csm::cli
