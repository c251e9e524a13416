#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sctd/decompose.hpp"
#include "sctd/io.hpp"
#include "sctd/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

json load_json(const fs::path& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

// --library accepts a JSON config path or a built-in preset:
// "preset:matched" or "preset:misspec-<target P>".
sctd::Dictionary resolve_library(const std::string& value) {
  if (value.rfind("preset:", 0) == 0) {
    const std::string name = value.substr(7);
    if (name == "matched")
      return sctd::dictionary_from_config(sctd::matched_library_config());
    if (name.rfind("misspec-", 0) == 0)
      return sctd::dictionary_from_config(
          sctd::misspecified_library_config(std::stoul(name.substr(8))));
    throw std::invalid_argument("unknown library preset: " + name);
  }
  return sctd::dictionary_from_config(slurp(value));
}

sctd::SolverConfig solver_from_json(const json& j) {
  sctd::SolverConfig cfg;
  cfg.max_rank = j.value("max_rank", cfg.max_rank);
  cfg.bca_tol = j.value("bca_tol", cfg.bca_tol);
  cfg.bca_max_iters = j.value("bca_max_iters", cfg.bca_max_iters);
  cfg.restarts = j.value("restarts", cfg.restarts);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.min_lambda = j.value("min_lambda", cfg.min_lambda);
  return cfg;
}

sctd::TauPolicy tau_from_json(const json& j) {
  sctd::TauPolicy p;
  p.grid_size = j.value("grid_size", p.grid_size);
  p.refine_rounds = j.value("refine_rounds", p.refine_rounds);
  p.refine_shrink = j.value("refine_shrink", p.refine_shrink);
  p.flat_tol = j.value("flat_tol", p.flat_tol);
  return p;
}

sctd::PhantomConfig phantom_from_json(const json& j) {
  if (!j.contains("components")) return sctd::default_phantom_config();
  sctd::PhantomConfig cfg;
  for (const auto& c : j.at("components")) {
    sctd::PhantomComponent comp;
    comp.center_x = c.at("center_x").get<double>();
    comp.center_y = c.at("center_y").get<double>();
    comp.sigma_x = c.at("sigma_x").get<double>();
    comp.sigma_y = c.at("sigma_y").get<double>();
    comp.lambda = c.value("weight", 1.0);
    comp.temporal = sctd::io::prototype_from_json(c.at("temporal"));
    cfg.components.push_back(comp);
  }
  return cfg;
}

json phantom_to_json(const sctd::PhantomConfig& cfg) {
  json components = json::array();
  for (const auto& c : cfg.components) {
    components.push_back({{"center_x", c.center_x},
                          {"center_y", c.center_y},
                          {"sigma_x", c.sigma_x},
                          {"sigma_y", c.sigma_y},
                          {"weight", c.lambda},
                          {"temporal", sctd::io::prototype_to_json(c.temporal)}});
  }
  return {{"components", std::move(components)}};
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct CommonOpts {
  std::string input, library, config, out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void finish(const fs::path& out_dir, sctd::io::RunManifest manifest, const Timer& timer) {
  manifest.duration_seconds = timer.seconds();
  manifest.outputs.push_back("manifest.json");
  sctd::io::write_manifest(out_dir / "manifest.json", manifest);
}

int cmd_simulate(const CommonOpts& opts) {
  Timer timer;
  const json cfg = opts.config.empty() ? json::object() : load_json(opts.config);
  const double sigma = cfg.value("sigma", 0.0);
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.value("seed", 0ull);
  sctd::Dims3 spatial{40, 40, 129};
  if (cfg.contains("spatial_dims")) {
    const auto d = cfg.at("spatial_dims").get<std::vector<std::size_t>>();
    if (d.size() != 2) throw std::invalid_argument("spatial_dims must have 2 entries");
    spatial = {d[0], d[1], 129};
  }
  const sctd::PhantomConfig phantom_cfg = phantom_from_json(cfg);
  const auto truth = sctd::make_phantom(spatial, sctd::phantom_time_axis(), phantom_cfg);

  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  sctd::io::write_st3(out_dir / "clean.st3", truth.clean);
  const auto noisy = sctd::add_spectral_noise(truth.clean, {sigma, seed});
  sctd::io::write_st3(out_dir / "noisy.st3", noisy);

  json truth_json = {{"format", "sctd-truth"},
                     {"version", 1},
                     {"sigma", sigma},
                     {"seed", seed},
                     {"spatial_dims", {spatial.i1, spatial.i2}},
                     {"phantom", phantom_to_json(phantom_cfg)},
                     {"clean", "clean.st3"},
                     {"noisy", "noisy.st3"}};
  sctd::io::write_text_atomic(out_dir / "truth.json", truth_json.dump(2) + "\n");

  sctd::io::RunManifest manifest;
  manifest.command = "simulate";
  manifest.config = {{"sigma", sigma}, {"phantom", phantom_to_json(phantom_cfg)}};
  manifest.seed = seed;
  manifest.outputs = {"clean.st3", "noisy.st3", "truth.json"};
  finish(out_dir, std::move(manifest), timer);
  return kExitOk;
}

int cmd_decompose(const CommonOpts& opts, std::optional<std::size_t> rank) {
  Timer timer;
  const json cfg = opts.config.empty() ? json::object() : load_json(opts.config);
  sctd::SolverConfig solver = solver_from_json(cfg);
  sctd::TauPolicy tau = tau_from_json(cfg.value("tau", json::object()));
  if (opts.seed_set) solver.seed = opts.seed;
  if (rank) solver.max_rank = *rank;

  const auto tensor = sctd::io::read_tensor(opts.input);
  const auto dict = resolve_library(opts.library);
  const auto result = sctd::sctd_decompose(tensor, dict, solver, tau);

  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  sctd::io::write_text_atomic(out_dir / "model.json",
                              sctd::io::model_to_json(result.model, dict).dump(2) + "\n");
  sctd::io::write_text_atomic(out_dir / "report.csv", sctd::io::report_csv(result.report));
  sctd::io::write_text_atomic(out_dir / "bic_trace.csv",
                              sctd::io::bic_trace_csv(result.report));
  sctd::io::write_text_atomic(
      out_dir / "time_modes.csv",
      sctd::io::time_modes_csv(dict.time_axis, sctd::temporal_modes(result.model, dict)));

  sctd::io::RunManifest manifest;
  manifest.command = "decompose";
  manifest.config = {{"solver",
                      {{"max_rank", solver.max_rank},
                       {"bca_tol", solver.bca_tol},
                       {"bca_max_iters", solver.bca_max_iters},
                       {"restarts", solver.restarts},
                       {"min_lambda", solver.min_lambda}}},
                     {"tau",
                      {{"grid_size", tau.grid_size},
                       {"refine_rounds", tau.refine_rounds},
                       {"refine_shrink", tau.refine_shrink},
                       {"flat_tol", tau.flat_tol}}},
                     {"library", opts.library}};
  manifest.dictionary_id = sctd::io::hex_u64(dict.id);
  manifest.input_digest = sctd::io::hex_u64(sctd::io::file_digest(opts.input));
  manifest.seed = solver.seed;
  manifest.outputs = {"model.json", "report.csv", "bic_trace.csv", "time_modes.csv"};
  finish(out_dir, std::move(manifest), timer);
  return kExitOk;
}

int cmd_evaluate(const CommonOpts& opts) {
  Timer timer;
  const json model_json = load_json(opts.input);
  const sctd::KruskalModel model = sctd::io::model_from_json(model_json);
  const auto dict = resolve_library(opts.library);
  if (dict.id != model.dictionary_id)
    throw std::invalid_argument("evaluate: library does not match the model's dictionary id");

  const json cfg = load_json(opts.config);
  const fs::path cfg_dir = fs::path(opts.config).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : cfg_dir / path;
  };
  const auto target = sctd::io::read_tensor(resolve(cfg.at("target").get<std::string>()));

  sctd::EvalReport report;
  const auto dense = sctd::kruskal_to_dense(model, dict);
  report.relative_error_noisy = sctd::relative_error(target, dense);
  for (std::size_t r = 0; r < model.rank(); ++r)
    report.top_modes.push_back(sctd::top_mode_frequency(model.z.column(r), dict));
  std::size_t nnz = 0;
  for (double v : model.z.values()) nnz += v != 0.0;
  report.prototypes_chosen = nnz;

  std::optional<sctd::PlantedModel> truth;
  std::optional<sctd::DenseTensor3> clean;
  if (cfg.contains("truth")) {
    const fs::path truth_path = resolve(cfg.at("truth").get<std::string>());
    const json tj = load_json(truth_path);
    const auto sd = tj.at("spatial_dims").get<std::vector<std::size_t>>();
    truth = sctd::make_phantom({sd.at(0), sd.at(1), 129}, sctd::phantom_time_axis(),
                               phantom_from_json(tj.at("phantom")));
    clean = sctd::io::read_st3(truth_path.parent_path() /
                               tj.at("clean").get<std::string>());
    report.relative_error_clean = sctd::relative_error(*clean, dense);
    report.factor_accuracy = sctd::factor_accuracy(*truth, model, dict);

    sctd::DenseTensor3 noise = target;
    for (std::size_t i = 0; i < noise.size(); ++i)
      noise.data()[i] -= clean->values()[i];
    report.snr = sctd::snr(*clean, noise);
  }

  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  sctd::io::write_text_atomic(out_dir / "eval.json",
                              sctd::io::eval_report_to_json(report).dump(2) + "\n");
  const auto curve = sctd::reconstruction_error_curve(model, dict, target,
                                                      clean ? &*clean : nullptr);
  sctd::io::write_text_atomic(out_dir / "error_curve.csv", sctd::io::error_curve_csv(curve));
  sctd::io::write_text_atomic(
      out_dir / "time_modes.csv",
      sctd::io::time_modes_csv(dict.time_axis, sctd::temporal_modes(model, dict)));

  sctd::io::RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config = cfg;
  manifest.dictionary_id = sctd::io::hex_u64(dict.id);
  manifest.input_digest = sctd::io::hex_u64(sctd::io::file_digest(opts.input));
  manifest.outputs = {"eval.json", "error_curve.csv", "time_modes.csv"};
  finish(out_dir, std::move(manifest), timer);
  return kExitOk;
}

int cmd_baseline(const CommonOpts& opts, std::size_t rank) {
  Timer timer;
  const json cfg = opts.config.empty() ? json::object() : load_json(opts.config);
  const double tol = cfg.value("tol", 1e-6);
  const std::size_t max_iters = cfg.value("max_iters", 500);
  const std::uint64_t seed = opts.seed_set ? opts.seed : cfg.value("seed", 0ull);

  const auto tensor = sctd::io::read_tensor(opts.input);
  const auto model = sctd::cp_als_baseline(tensor, rank, tol, max_iters, seed);

  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  sctd::io::write_text_atomic(out_dir / "model.json",
                              sctd::io::baseline_model_to_json(model).dump(2) + "\n");

  sctd::io::RunManifest manifest;
  manifest.command = "baseline";
  manifest.config = {{"rank", rank}, {"tol", tol}, {"max_iters", max_iters}};
  manifest.input_digest = sctd::io::hex_u64(sctd::io::file_digest(opts.input));
  manifest.seed = seed;
  manifest.outputs = {"model.json"};
  finish(out_dir, std::move(manifest), timer);
  return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, const std::string& kind_str,
              const std::string& grid_str) {
  Timer timer;
  sctd::SweepKind kind;
  if (kind_str == "noise")
    kind = sctd::SweepKind::noise;
  else if (kind_str == "library")
    kind = sctd::SweepKind::library_size;
  else
    throw std::invalid_argument("sweep kind must be 'noise' or 'library'");

  std::vector<double> grid;
  std::stringstream ss(grid_str);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    grid.push_back(std::stod(tok));
  }
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");

  const json cfg = opts.config.empty() ? json::object() : load_json(opts.config);
  sctd::SweepConfig sweep;
  sweep.solver = solver_from_json(cfg.value("solver", json::object()));
  sweep.tau_policy = tau_from_json(cfg.value("tau", json::object()));
  sweep.noise_sigma = cfg.value("noise_sigma", sweep.noise_sigma);
  sweep.library_size = cfg.value("library_size", sweep.library_size);
  if (opts.seed_set) sweep.solver.seed = opts.seed;

  const auto rows = sctd::run_sweep(kind, grid, sweep);

  const fs::path out_dir(opts.out);
  fs::create_directories(out_dir);
  sctd::io::write_text_atomic(out_dir / "sweep.csv", sctd::io::sweep_csv(rows));

  sctd::io::RunManifest manifest;
  manifest.command = "sweep";
  manifest.config = {{"kind", kind_str},
                     {"grid", grid},
                     {"noise_sigma", sweep.noise_sigma},
                     {"library_size", sweep.library_size}};
  manifest.seed = sweep.solver.seed;
  manifest.outputs = {"sweep.csv"};
  finish(out_dir, std::move(manifest), timer);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape-constrained tensor decomposition"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::size_t rank = 0;
  std::string kind, grid;

  auto add_common = [&](CLI::App* sub, bool needs_input, bool needs_library) {
    auto* in = sub->add_option("--input", opts.input, "Input file");
    if (needs_input) in->required()->check(CLI::ExistingFile);
    auto* lib = sub->add_option("--library", opts.library,
                                "Library config path or preset:<name>");
    if (needs_library) lib->required();
    sub->add_option("--config", opts.config, "JSON config file");
    sub->add_option("--out", opts.out, "Output directory")->required();
    sub->add_option("--seed", opts.seed, "Seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
  };

  auto* simulate = app.add_subcommand("simulate", "Generate the synthetic phantom");
  add_common(simulate, false, false);

  auto* decompose = app.add_subcommand("decompose", "Fit the shape-constrained model");
  add_common(decompose, true, true);
  decompose->add_option("--rank", rank, "Maximum rank override");

  auto* evaluate = app.add_subcommand("evaluate", "Score a fitted model");
  add_common(evaluate, true, true);
  evaluate->get_option("--config")->required();

  auto* baseline = app.add_subcommand("baseline", "Unconstrained CP-ALS comparison fit");
  add_common(baseline, true, false);
  baseline->add_option("--rank", rank, "CP rank")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a noise or library-size sweep");
  add_common(sweep, false, false);
  sweep->add_option("--kind", kind, "Sweep kind: noise | library")->required();
  sweep->add_option("--grid", grid, "Comma-separated grid values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(opts);
    if (*decompose)
      return cmd_decompose(opts, decompose->count("--rank")
                                     ? std::optional<std::size_t>(rank)
                                     : std::nullopt);
    if (*evaluate) return cmd_evaluate(opts);
    if (*baseline) return cmd_baseline(opts, rank);
    if (*sweep) return cmd_sweep(opts, kind, grid);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
