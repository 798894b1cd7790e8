#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "autocorr/forward_models.hpp"
#include "autocorr/phantom.hpp"
#include "autocorr/solvers.hpp"

namespace autocorr {

struct PhantomSpec {
  PhantomKind kind = PhantomKind::SatelliteLike;
  std::size_t size = 64;
  std::uint64_t seed = 7;
};

/// Everything a command needs; parsed from an INI-style file with sections
/// [input] [scenario] [noise] [solver] [output] [reconstruct] [evaluate].
struct ExperimentConfig {
  // [input]
  std::optional<std::filesystem::path> image;  // .fgr or .pgm; phantom otherwise
  PhantomSpec phantom;
  // [scenario]
  Scenario scenario;
  // [noise]
  double lambda = 256.0;
  std::uint64_t noise_seed = 1;
  // [solver]
  SolverConfig solver;
  // [output]
  std::filesystem::path out_dir = "out";
  bool emit_images = true;
  bool emit_csv = true;
  bool emit_report = true;
  bool wall_clock = true;
  // [reconstruct]
  std::optional<std::filesystem::path> measurement_dir;  // defaults to out_dir
  // [evaluate]
  std::optional<std::filesystem::path> reconstruction;
  std::optional<std::filesystem::path> reference;
  std::optional<std::size_t> profile_row;  // defaults to the reference's brightest row

  bool operator==(const ExperimentConfig&) const;
};

using ConfigTree = boost::property_tree::ptree;

/// Parses and validates a tree; errors name the offending section.key.
ExperimentConfig config_from_tree(const ConfigTree& tree);
ConfigTree config_to_tree(const ExperimentConfig& config);

/// Reads an INI file; syntax errors carry the file name and line.
ConfigTree read_config_tree(const std::filesystem::path& path);

/// Applies "section.key=value" to the tree.
void apply_override(ConfigTree& tree, const std::string& assignment);

/// File (optional) + overrides -> validated config.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& path,
                             const std::vector<std::string>& overrides);

/// Writes the config plus a [results] section; re-parses to the same config.
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& config,
                    const ConfigTree& results);

/// The object a config describes: the input image or the phantom.
Grid load_object(const ExperimentConfig& config);

/// Artifact names inside an output directory.
namespace files {
inline constexpr const char* kPhantom = "phantom.fgr";
inline constexpr const char* kObject = "object.fgr";
inline constexpr const char* kChiMu = "chi_mu.fgr";
inline constexpr const char* kBlur = "blur.fgr";
inline constexpr const char* kChiClean = "chi_clean.fgr";
inline constexpr const char* kObservedObject = "observed_object.fgr";
inline constexpr const char* kBlurredObject = "blurred_object.fgr";
inline constexpr const char* kReconstruction = "reconstruction.fgr";
inline constexpr const char* kAligned = "aligned.fgr";
inline constexpr const char* kTrajectory = "trajectory.csv";
inline constexpr const char* kProfile = "profile.csv";
/// Each command writes manifest_<command>.ini.
std::string manifest_for(const std::string& command);
}  // namespace files

struct EvaluationResult {
  double snr_db = 0.0;
  long shift_y = 0;
  long shift_x = 0;
  bool mirrored = false;
  std::size_t profile_row = 0;
};

/// Writes the phantom raster and preview.
void cmd_phantom(const ExperimentConfig& config, std::ostream& log);

/// Simulates the configured scenario and writes the measurement artifacts.
void cmd_simulate(const ExperimentConfig& config, std::ostream& log);

/// Runs the solver on the measurement in measurement_dir (or out_dir).
ReconstructionReport cmd_reconstruct(const ExperimentConfig& config, std::ostream& log);

/// Aligns a reconstruction to a reference, reports SNR and writes a profile.
EvaluationResult cmd_evaluate(const ExperimentConfig& config, std::ostream& log);

/// Runs `command` for `runs` independent seeds (noise and solver seeds offset
/// by the run index) in out_dir/run_<k>, at most `threads` at a time.
void fan_out(const ExperimentConfig& config, std::size_t runs, std::size_t threads,
             const std::string& command, std::ostream& log);

/// Thread cap from AUTOCORR_THREADS, defaulting to the hardware concurrency.
std::size_t thread_cap_from_env();

}  // namespace autocorr
