// Command-line driver: runs configured experiments and inspects their
// outputs. Exit codes: 0 success, 2 configuration error, 3 numeric failure,
// 4 file/format error.

#include <CLI11.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pico/analysis.hpp"
#include "pico/config.hpp"
#include "pico/estimators.hpp"
#include "pico/experiments.hpp"
#include "pico/io.hpp"

namespace fs = std::filesystem;
using namespace pico;

namespace {

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

VarianceMap load_map(const std::string& path) {
  auto [values, shape] = read_real_map(path);
  VarianceMap map;
  map.values = std::move(values);
  map.shape = shape;
  return map;
}

BoolVec load_mask(const std::string& path) {
  const auto [values, shape] = read_real_map(path);
  BoolVec mask(values.size());
  for (Index k = 0; k < values.size(); ++k) mask[k] = values[k] != 0.0f;
  return mask;
}

void cmd_run(const std::string& config_path,
             const std::vector<std::string>& overrides) {
  const auto cfg = parse_config(read_key_values(config_path), overrides);
  const auto result = run_experiment(cfg);
  for (const auto& file : result.files)
    std::cout << cfg.out << "/" << file << "\n";
}

void cmd_compare(const std::string& path_a, const std::string& path_b,
                 const std::string& mask_path, const std::string& metric) {
  if (metric != "nrmse")
    throw ConfigError("unsupported metric '" + metric + "' (only nrmse)");
  const auto a = load_map(path_a);
  const auto b = load_map(path_b);
  const BoolVec mask = mask_path.empty() ? BoolVec() : load_mask(mask_path);
  std::cout << format_double(nrmse(a, b, mask)) << "\n";
}

void cmd_render(const std::string& map_path, const std::string& out_path,
                const std::string& scale) {
  const auto [values, shape] = read_real_map(map_path);
  double lo = values.minCoeff();
  double hi = values.maxCoeff();
  if (!scale.empty()) {
    const auto comma = scale.find(',');
    if (comma == std::string::npos)
      throw ConfigError("--scale expects lo,hi");
    lo = parse_double(scale.substr(0, comma));
    hi = parse_double(scale.substr(comma + 1));
  }
  render_pgm(out_path, values, shape, lo, hi);
  std::cout << out_path << "\n";
}

void cmd_certify(const std::string& run_dir, const std::string& gold_path,
                 const std::string& roi_path) {
  const fs::path snaps = fs::path(run_dir) / "snapshots";
  if (!fs::is_directory(snaps))
    throw IoError("no snapshots directory under '" + run_dir + "'");
  std::vector<std::pair<Index, fs::path>> found;
  for (const auto& entry : fs::directory_iterator(snaps)) {
    const std::string name = entry.path().filename().string();
    constexpr const char* prefix = "snapshot_n";
    constexpr const char* suffix = ".picv";
    if (name.size() <= 15 || name.rfind(prefix, 0) != 0 ||
        name.substr(name.size() - 5) != suffix)
      continue;
    const std::string digits = name.substr(10, name.size() - 15);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      continue;
    found.emplace_back(static_cast<Index>(std::stoll(digits)), entry.path());
  }
  std::sort(found.begin(), found.end());

  EstimatorRun run;
  for (const auto& [n, path] : found) {
    VarianceMap snap = load_map(path.string());
    snap.n_samples = n;
    snap.method = EstimatorMethod::Pmr;
    run.snapshots.push_back(std::move(snap));
  }
  if (!run.snapshots.empty()) {
    run.final = run.snapshots.back();
    run.probes = run.final.n_samples;
  }

  const auto gold = load_map(gold_path);
  const BoolVec roi = roi_path.empty() ? BoolVec() : load_mask(roi_path);
  const auto report = certify_pmr(run, gold, roi);
  std::cout << "certified_n = " << report.certified_n << "\n"
            << "nrmse_at_n = " << format_double(report.nrmse_at_n) << "\n"
            << "delta_roi_at_n = " << format_double(report.delta_roi_at_n)
            << "\n"
            << "gold_n = " << report.gold_n << "\n";
}

void cmd_info(const std::string& path) {
  if (path.empty()) {
    std::cout << "pico " << kPicoVersion << "\n"
              << "eigen " << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION
              << "." << EIGEN_MINOR_VERSION << "\n"
              << "workers = " << worker_count() << "\n";
    return;
  }
  const ArrayData array = read_array(path);
  std::cout << "dtype = "
            << (array.dtype == ArrayDtype::Complex64 ? "complex64" : "real32")
            << "\n";
  std::cout << "dims =";
  for (const auto d : array.dims) std::cout << " " << d;
  std::cout << "\n";
  if (array.dtype == ArrayDtype::Real32) {
    std::cout << "min = " << format_double(array.real_values.minCoeff())
              << "\n"
              << "max = " << format_double(array.real_values.maxCoeff())
              << "\n";
  } else {
    std::cout << "max_abs = "
              << format_double(array.complex_values.cwiseAbs().maxCoeff())
              << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pico: voxelwise noise and g-factor estimation by operator probing"};
  app.require_subcommand(1);
  app.footer(
      "Environment: PICO_WORKERS=<k> sets the estimator worker count\n"
      "(results are bitwise independent of it).\n"
      "Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 io/format "
      "error.");

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("config", config_path, "key = value config file")
      ->required();
  run->add_option("--override", overrides,
                  "key=value overriding the config (repeatable)");

  std::string cmp_a, cmp_b, cmp_mask, cmp_metric = "nrmse";
  auto* compare =
      app.add_subcommand("compare", "metric between two stored maps");
  compare->add_option("a", cmp_a, "first map file")->required();
  compare->add_option("b", cmp_b, "second map file (reference)")->required();
  compare->add_option("--mask", cmp_mask, "real map; nonzero = included");
  compare->add_option("--metric", cmp_metric, "metric name (nrmse)");

  std::string render_map, render_out, render_scale;
  auto* render =
      app.add_subcommand("render", "16-bit PGM preview of a stored map");
  render->add_option("map", render_map, "real map file")->required();
  render->add_option("--out", render_out, "output .pgm path")->required();
  render->add_option("--scale", render_scale,
                     "lo,hi display window (default: map min,max)");

  std::string cert_run, cert_gold, cert_roi;
  auto* certify = app.add_subcommand(
      "certify", "replica-doubling certification of a checkpointed run");
  certify->add_option("--run", cert_run, "run output directory")->required();
  certify->add_option("--gold", cert_gold, "gold-standard map file")
      ->required();
  certify->add_option("--roi", cert_roi, "real map; nonzero = region mean");

  std::string info_path;
  auto* info =
      app.add_subcommand("info", "version info, or a stored array's header");
  info->add_option("file", info_path, "array file to describe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (run->parsed())
    return guarded([&] { cmd_run(config_path, overrides); });
  if (compare->parsed())
    return guarded([&] { cmd_compare(cmp_a, cmp_b, cmp_mask, cmp_metric); });
  if (render->parsed())
    return guarded([&] { cmd_render(render_map, render_out, render_scale); });
  if (certify->parsed())
    return guarded([&] { cmd_certify(cert_run, cert_gold, cert_roi); });
  if (info->parsed()) return guarded([&] { cmd_info(info_path); });
  return 2;
}
