#include "autocorr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>

#include "autocorr/errors.hpp"
#include "autocorr/raster_io.hpp"

namespace autocorr {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"input", {"image", "phantom", "phantom_size", "phantom_seed"}},
      {"scenario", {"kind", "sigma_px", "window", "cutoff"}},
      {"noise", {"lambda", "seed"}},
      {"solver",
       {"rule", "max_iters", "stop_on_snr_drop", "snr_check_stride", "patience", "epsilon_floor",
        "seed", "record_stride", "init_smoothing_px"}},
      {"output", {"dir", "images", "csv", "report", "wall_clock"}},
      {"reconstruct", {"measurement_dir"}},
      {"evaluate", {"reconstruction", "reference", "profile_row"}},
  };
  return keys;
}

std::string trimmed(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Typed reads; every failure names the key and the offending text.
class Reader {
 public:
  explicit Reader(const ConfigTree& tree) : tree_(tree) {}

  std::optional<std::string> text(const std::string& key) const {
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    return trimmed(node->data());
  }

  template <typename Fn>
  void with(const std::string& key, Fn&& fn) const {
    auto value = text(key);
    if (!value) return;
    try {
      fn(*value);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }

  void unsigned_value(const std::string& key, std::uint64_t& out) const {
    with(key, [&](const std::string& v) { out = parse_unsigned(key, v); });
  }

  void size_value(const std::string& key, std::size_t& out) const {
    with(key, [&](const std::string& v) { out = static_cast<std::size_t>(parse_unsigned(key, v)); });
  }

  void double_value(const std::string& key, double& out) const {
    with(key, [&](const std::string& v) { out = parse_double(key, v); });
  }

  void bool_value(const std::string& key, bool& out) const {
    with(key, [&](const std::string& v) { out = parse_bool(key, v); });
  }

  void path_value(const std::string& key, std::optional<fs::path>& out) const {
    with(key, [&](const std::string& v) {
      if (v.empty()) {
        out.reset();
      } else {
        out = fs::path(v);
      }
    });
  }

  static std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) {
      throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
    }
    return out;
  }

  static double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (v.empty() || used != v.size()) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
    return out;
  }

  static bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }

 private:
  const ConfigTree& tree_;
};

void reject_unknown(const ConfigTree& tree) {
  for (const auto& [section, body] : tree) {
    if (section == "results") continue;
    auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      throw ConfigError("unknown section [" + section + "]");
    }
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("'" + section + "' must be a section, not a key");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw ConfigError("unknown key " + section + "." + key);
      }
      if (!value.empty()) throw ConfigError(section + "." + key + ": nested keys are not allowed");
    }
  }
}

std::string exact(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// Runs validation hooks from the model layer and reports them as config errors.
template <typename Fn>
void validated(const std::string& section, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("[" + section + "] " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

Grid read_required(const fs::path& path, const char* what) {
  if (!fs::exists(path)) {
    throw IoError(std::string(what) + " not found: " + path.string());
  }
  return read_image(path);
}

fs::path measurement_dir_of(const ExperimentConfig& config) {
  return config.measurement_dir.value_or(config.out_dir);
}

void put_shape(ConfigTree& results, const std::string& key, Shape shape) {
  results.put(key, std::to_string(shape.height) + "x" + std::to_string(shape.width));
}

}  // namespace

std::string files::manifest_for(const std::string& command) {
  return "manifest_" + command + ".ini";
}

bool ExperimentConfig::operator==(const ExperimentConfig& other) const {
  return image == other.image && phantom.kind == other.phantom.kind &&
         phantom.size == other.phantom.size && phantom.seed == other.phantom.seed &&
         scenario == other.scenario && lambda == other.lambda &&
         noise_seed == other.noise_seed && solver == other.solver && out_dir == other.out_dir &&
         emit_images == other.emit_images && emit_csv == other.emit_csv &&
         emit_report == other.emit_report && wall_clock == other.wall_clock &&
         measurement_dir == other.measurement_dir && reconstruction == other.reconstruction &&
         reference == other.reference && profile_row == other.profile_row;
}

ExperimentConfig config_from_tree(const ConfigTree& tree) {
  reject_unknown(tree);
  const Reader in(tree);
  ExperimentConfig c;

  in.path_value("input.image", c.image);
  in.with("input.phantom",
          [&](const std::string& v) { c.phantom.kind = parse_phantom_kind(v); });
  in.size_value("input.phantom_size", c.phantom.size);
  in.unsigned_value("input.phantom_seed", c.phantom.seed);
  if (c.phantom.size < 8) {
    throw ConfigError("input.phantom_size: must be at least 8, got " +
                      std::to_string(c.phantom.size));
  }

  in.with("scenario.kind", [&](const std::string& v) { c.scenario.kind = parse_scenario_kind(v); });
  in.double_value("scenario.sigma_px", c.scenario.sigma_px);
  in.with("scenario.window",
          [&](const std::string& v) { c.scenario.window.kind = parse_window_kind(v); });
  in.double_value("scenario.cutoff", c.scenario.window.cutoff);
  validated("scenario", [&] { c.scenario.validate(); });

  in.double_value("noise.lambda", c.lambda);
  in.unsigned_value("noise.seed", c.noise_seed);
  if (!std::isfinite(c.lambda) || c.lambda < 0.0) {
    throw ConfigError("noise.lambda: must be finite and >= 0, got " + exact(c.lambda));
  }

  in.with("solver.rule", [&](const std::string& v) { c.solver.rule = parse_update_rule(v); });
  in.size_value("solver.max_iters", c.solver.max_iters);
  in.bool_value("solver.stop_on_snr_drop", c.solver.stop_on_snr_drop);
  in.size_value("solver.snr_check_stride", c.solver.snr_check_stride);
  in.size_value("solver.patience", c.solver.patience);
  in.double_value("solver.epsilon_floor", c.solver.epsilon_floor);
  in.unsigned_value("solver.seed", c.solver.seed);
  in.size_value("solver.record_stride", c.solver.record_stride);
  in.double_value("solver.init_smoothing_px", c.solver.init_smoothing_px);
  validated("solver", [&] { c.solver.validate(); });

  std::optional<fs::path> out_dir;
  in.path_value("output.dir", out_dir);
  if (out_dir) c.out_dir = *out_dir;
  in.bool_value("output.images", c.emit_images);
  in.bool_value("output.csv", c.emit_csv);
  in.bool_value("output.report", c.emit_report);
  in.bool_value("output.wall_clock", c.wall_clock);

  in.path_value("reconstruct.measurement_dir", c.measurement_dir);
  in.path_value("evaluate.reconstruction", c.reconstruction);
  in.path_value("evaluate.reference", c.reference);
  in.with("evaluate.profile_row", [&](const std::string& v) {
    if (v.empty()) {
      c.profile_row.reset();
    } else {
      c.profile_row = static_cast<std::size_t>(Reader::parse_unsigned("evaluate.profile_row", v));
    }
  });
  return c;
}

ConfigTree config_to_tree(const ExperimentConfig& c) {
  ConfigTree t;
  auto put = [&t](const std::string& key, const std::string& value) {
    t.put(pt::ptree::path_type(key, '.'), value);
  };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

  put("input.image", c.image ? c.image->string() : "");
  put("input.phantom", to_string(c.phantom.kind));
  put("input.phantom_size", std::to_string(c.phantom.size));
  put("input.phantom_seed", std::to_string(c.phantom.seed));

  put("scenario.kind", to_string(c.scenario.kind));
  put("scenario.sigma_px", exact(c.scenario.sigma_px));
  put("scenario.window", to_string(c.scenario.window.kind));
  put("scenario.cutoff", exact(c.scenario.window.cutoff));

  put("noise.lambda", exact(c.lambda));
  put("noise.seed", std::to_string(c.noise_seed));

  put("solver.rule", to_string(c.solver.rule));
  put("solver.max_iters", std::to_string(c.solver.max_iters));
  put("solver.stop_on_snr_drop", flag(c.solver.stop_on_snr_drop));
  put("solver.snr_check_stride", std::to_string(c.solver.snr_check_stride));
  put("solver.patience", std::to_string(c.solver.patience));
  put("solver.epsilon_floor", exact(c.solver.epsilon_floor));
  put("solver.seed", std::to_string(c.solver.seed));
  put("solver.record_stride", std::to_string(c.solver.record_stride));
  put("solver.init_smoothing_px", exact(c.solver.init_smoothing_px));

  put("output.dir", c.out_dir.string());
  put("output.images", flag(c.emit_images));
  put("output.csv", flag(c.emit_csv));
  put("output.report", flag(c.emit_report));
  put("output.wall_clock", flag(c.wall_clock));

  put("reconstruct.measurement_dir", c.measurement_dir ? c.measurement_dir->string() : "");
  put("evaluate.reconstruction", c.reconstruction ? c.reconstruction->string() : "");
  put("evaluate.reference", c.reference ? c.reference->string() : "");
  put("evaluate.profile_row", c.profile_row ? std::to_string(*c.profile_row) : "");
  return t;
}

ConfigTree read_config_tree(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  ConfigTree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  return tree;
}

void apply_override(ConfigTree& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string key = trimmed(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot == 0 ||
      dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  tree.put(pt::ptree::path_type(key, '.'), trimmed(assignment.substr(eq + 1)));
}

ExperimentConfig load_config(const std::optional<fs::path>& path,
                             const std::vector<std::string>& overrides) {
  ConfigTree tree = path ? read_config_tree(*path) : ConfigTree{};
  for (const auto& o : overrides) apply_override(tree, o);
  return config_from_tree(tree);
}

void write_manifest(const fs::path& path, const ExperimentConfig& config,
                    const ConfigTree& results) {
  ConfigTree tree = config_to_tree(config);
  if (!results.empty()) tree.put_child("results", results);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  pt::write_ini(out, tree);
  if (!out) throw IoError("write failed for " + path.string());
}

Grid load_object(const ExperimentConfig& config) {
  if (config.image) return read_required(*config.image, "input image");
  return make_phantom(config.phantom.kind, {config.phantom.size, config.phantom.size},
                      config.phantom.seed);
}

void cmd_phantom(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const Grid object = load_object(config);
  write_float_raster(config.out_dir / files::kPhantom, object);
  if (config.emit_images) write_pgm_preview(config.out_dir / "phantom.pgm", object);
  if (config.emit_report) {
    ConfigTree results;
    put_shape(results, "shape", object.shape());
    results.put("mass", exact(object.sum()));
    write_manifest(config.out_dir / files::manifest_for("phantom"), config, results);
  }
  log << "phantom " << to_string(object.shape()) << " -> " << config.out_dir.string() << "\n";
}

void cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const Grid object = load_object(config);
  const Measurement m = simulate(object, config.scenario, config.lambda, config.noise_seed);
  const bool peak = zero_shift_is_peak(m.chi_mu);

  const fs::path& dir = config.out_dir;
  write_float_raster(dir / files::kObject, object);
  write_float_raster(dir / files::kChiMu, m.chi_mu);
  write_float_raster(dir / files::kBlur, m.blur);
  write_float_raster(dir / files::kChiClean, m.chi_clean);
  if (m.observed_object) write_float_raster(dir / files::kObservedObject, *m.observed_object);
  if (m.blurred_object) write_float_raster(dir / files::kBlurredObject, *m.blurred_object);
  if (config.emit_images) {
    write_pgm_preview(dir / "object.pgm", object);
    write_pgm_preview(dir / "chi_mu.pgm", m.chi_mu, true);
    write_pgm_preview(dir / "blur.pgm", m.blur, true);
    if (m.observed_object) write_pgm_preview(dir / "observed_object.pgm", *m.observed_object);
  }
  if (config.emit_report) {
    ConfigTree results;
    put_shape(results, "object_shape", object.shape());
    put_shape(results, "solver_shape", m.chi_mu.shape());
    results.put("raw_snr_db", exact(m.raw_snr_db));
    results.put("autocorr_snr_db", exact(m.autocorr_snr_db));
    results.put("zero_shift_peak", peak ? "true" : "false");
    write_manifest(dir / files::manifest_for("simulate"), config, results);
  }
  log << "simulate " << to_string(config.scenario.kind) << " lambda=" << config.lambda
      << " raw_snr_db=" << m.raw_snr_db << " autocorr_snr_db=" << m.autocorr_snr_db << "\n";
  if (!peak) log << "warning: chi_mu does not peak at zero shift\n";
}

ReconstructionReport cmd_reconstruct(const ExperimentConfig& config, std::ostream& log) {
  const fs::path in_dir = measurement_dir_of(config);
  const Grid chi_mu = read_required(in_dir / files::kChiMu, "measurement");
  const Grid blur = read_required(in_dir / files::kBlur, "blur");
  std::optional<Grid> reference;
  if (config.reference) {
    reference = read_required(*config.reference, "reference");
  } else if (fs::exists(in_dir / files::kObject)) {
    reference = read_image(in_dir / files::kObject);
  }

  const ReconstructionReport report = run_solver(config.solver, chi_mu, blur, reference);

  ensure_dir(config.out_dir);
  const fs::path& dir = config.out_dir;
  write_float_raster(dir / files::kReconstruction, report.final_o);
  if (report.alignment) write_float_raster(dir / files::kAligned, report.alignment->aligned);
  if (config.emit_images) {
    write_pgm_preview(dir / "reconstruction.pgm", report.final_o);
    if (report.alignment) write_pgm_preview(dir / "aligned.pgm", report.alignment->aligned);
  }
  if (config.emit_csv) write_trajectory_csv(dir / files::kTrajectory, report.history, config.wall_clock);
  if (config.emit_report) {
    ConfigTree results;
    results.put("stop_reason", to_string(report.stop_reason));
    results.put("iterations", std::to_string(report.iterations));
    results.put("wall_time_s", exact(config.wall_clock ? report.wall_time_s : 0.0));
    if (!report.history.empty()) {
      results.put("final_autocorr_snr_db", exact(report.history.back().snr_db));
      results.put("final_i_div", exact(report.history.back().i_div));
    }
    if (report.object_snr_db) results.put("object_snr_db", exact(*report.object_snr_db));
    if (report.alignment) {
      results.put("shift_y", std::to_string(report.alignment->shift_y));
      results.put("shift_x", std::to_string(report.alignment->shift_x));
      results.put("mirrored", report.alignment->mirrored ? "true" : "false");
    }
    write_manifest(dir / files::manifest_for("reconstruct"), config, results);
  }

  log << "reconstruct " << to_string(config.solver.rule) << " iterations=" << report.iterations
      << " stop=" << to_string(report.stop_reason);
  if (!report.history.empty()) log << " autocorr_snr_db=" << report.history.back().snr_db;
  if (report.object_snr_db) log << " object_snr_db=" << *report.object_snr_db;
  log << "\n";
  return report;
}

EvaluationResult cmd_evaluate(const ExperimentConfig& config, std::ostream& log) {
  const fs::path rec_path = config.reconstruction.value_or(config.out_dir / files::kReconstruction);
  const fs::path ref_path = config.reference.value_or(measurement_dir_of(config) / files::kObject);
  Grid rec = read_required(rec_path, "reconstruction");
  Grid ref = read_required(ref_path, "reference");

  // The smaller grid is embedded top-left in the larger one.
  const Shape rs = rec.shape();
  const Shape fs_ = ref.shape();
  if (rs.height >= fs_.height && rs.width >= fs_.width) {
    ref = embed_pad(ref, rs);
  } else if (fs_.height >= rs.height && fs_.width >= rs.width) {
    rec = embed_pad(rec, fs_);
  } else {
    throw ShapeError("reconstruction " + to_string(rs) + " and reference " + to_string(fs_) +
                     " cannot be brought to a common shape");
  }
  ref = normalize_total(ref);
  rec = normalize_total(rec);

  const Alignment a = align_to_reference(rec, ref);
  EvaluationResult result;
  result.snr_db = snr_db(ref, a.aligned);
  result.shift_y = a.shift_y;
  result.shift_x = a.shift_x;
  result.mirrored = a.mirrored;

  if (config.profile_row) {
    if (*config.profile_row >= ref.height()) {
      throw InvalidParamError("evaluate.profile_row " + std::to_string(*config.profile_row) +
                              " is outside the " + std::to_string(ref.height()) + "-row grid");
    }
    result.profile_row = *config.profile_row;
  } else {
    const auto values = ref.values();
    const auto peak = std::max_element(values.begin(), values.end()) - values.begin();
    result.profile_row = static_cast<std::size_t>(peak) / ref.width();
  }

  ensure_dir(config.out_dir);
  if (config.emit_csv) {
    std::ofstream out(config.out_dir / files::kProfile);
    if (!out) throw IoError("cannot write " + (config.out_dir / files::kProfile).string());
    out << "col,reference,reconstruction\n" << std::setprecision(17);
    for (std::size_t c = 0; c < ref.width(); ++c) {
      out << c << "," << ref(result.profile_row, c) << "," << a.aligned(result.profile_row, c)
          << "\n";
    }
  }
  if (config.emit_report) {
    ExperimentConfig recorded = config;
    recorded.reconstruction = rec_path;
    recorded.reference = ref_path;
    ConfigTree results;
    results.put("snr_db", exact(result.snr_db));
    results.put("shift_y", std::to_string(result.shift_y));
    results.put("shift_x", std::to_string(result.shift_x));
    results.put("mirrored", result.mirrored ? "true" : "false");
    results.put("profile_row", std::to_string(result.profile_row));
    write_manifest(config.out_dir / files::manifest_for("evaluate"), recorded, results);
  }
  log << "evaluate snr_db=" << result.snr_db << " shift=(" << result.shift_y << ","
      << result.shift_x << ") mirrored=" << (result.mirrored ? "yes" : "no") << "\n";
  return result;
}

namespace {

void run_command(const ExperimentConfig& config, const std::string& command, std::ostream& log) {
  if (command == "phantom") {
    cmd_phantom(config, log);
  } else if (command == "simulate") {
    cmd_simulate(config, log);
  } else if (command == "reconstruct") {
    cmd_reconstruct(config, log);
  } else if (command == "evaluate") {
    cmd_evaluate(config, log);
  } else {
    throw InvalidParamError("unknown command '" + command + "'");
  }
}

}  // namespace

void fan_out(const ExperimentConfig& config, std::size_t runs, std::size_t threads,
             const std::string& command, std::ostream& log) {
  if (runs == 0) throw InvalidParamError("runs must be at least 1");
  if (runs == 1) {
    run_command(config, command, log);
    return;
  }
  std::vector<ExperimentConfig> configs;
  for (std::size_t k = 0; k < runs; ++k) {
    ExperimentConfig c = config;
    const std::string run_name = "run_" + std::to_string(k);
    c.out_dir = config.out_dir / run_name;
    c.noise_seed = config.noise_seed + k;
    c.solver.seed = config.solver.seed + k;
    // A fanned-out simulate leaves one measurement per run; otherwise runs share one.
    const fs::path shared = measurement_dir_of(config);
    if (fs::exists(shared / run_name / files::kChiMu)) c.measurement_dir = shared / run_name;
    else c.measurement_dir = shared;
    configs.push_back(std::move(c));
  }

  std::vector<std::ostringstream> logs(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, runs);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < runs; k = next++) {
          try {
            logs[k] << "[run_" << k << "] ";
            run_command(configs[k], command, logs[k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (std::size_t k = 0; k < runs; ++k) log << logs[k].str();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t thread_cap_from_env() {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const char* env = std::getenv("AUTOCORR_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  std::size_t value = 0;
  const std::string text(env);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0) {
    throw ConfigError("AUTOCORR_THREADS must be a positive integer, got '" + text + "'");
  }
  return value;
}

}  // namespace autocorr
