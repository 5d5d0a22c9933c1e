#include "koopbrs/errors.hpp"
#include "koopbrs/io.hpp"
#include "koopbrs/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace koopbrs;
using io::json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kStatistical = 3, kGuarantee = 4 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<int> horizon;
  std::optional<double> threshold;
  std::string data;
  std::string model;
  std::string brs;
  std::string trajectory;
  std::string x0;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.mode) cfg.mode = parse_mode(*o.mode);
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.threshold) cfg.threshold = *o.threshold;
  if (!o.out.empty()) cfg.output = o.out;
  validate(cfg);
  fs::create_directories(cfg.output);
  return cfg;
}

fs::path or_default(const std::string& given, const fs::path& fallback) { return given.empty() ? fallback : fs::path(given); }

Dataset read_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path.string());
  Dataset D = read_csv(in);
  const fs::path meta = path.parent_path() / "dataset_meta.json";
  if (path.filename() == "dataset.csv" && fs::exists(meta)) attach_metadata(D, io::read_json(meta));
  return D;
}

void write_dataset(const fs::path& path, const Dataset& D) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_csv(D, out);
}

Vec parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse '" + text + "' as a comma-separated vector");
    }
  }
  return Eigen::Map<Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_gen_data(const Options& o) {
  const auto cfg = load(o);
  const DataSets d = generate_data(cfg);
  write_dataset(cfg.output / "dataset.csv", d.fit);
  if (d.holdout) write_dataset(cfg.output / "holdout.csv", *d.holdout);
  if (d.ks) write_dataset(cfg.output / "ks.csv", *d.ks);
  io::write_json(cfg.output / "dataset_meta.json", dataset_metadata(cfg, d));
  std::cout << "wrote " << d.fit.size() << " triples to " << (cfg.output / "dataset.csv").string() << '\n';
  return kOk;
}

int cmd_fit(const Options& o) {
  const auto cfg = load(o);
  const fs::path data_path = or_default(o.data, cfg.output / "dataset.csv");
  DataSets d;
  d.fit = read_dataset(data_path);
  if (cfg.error.route == ErrorConfig::Route::Direct) {
    d.holdout = read_dataset(data_path.parent_path() / "holdout.csv");
    d.ks = read_dataset(data_path.parent_path() / "ks.csv");
  }
  const FitOutcome f = fit_model(cfg, d);
  io::write_json(cfg.output / "model.json", model_document(f));
  io::write_json(cfg.output / "fit_report.json", fit_report(f));
  std::cout << "e      = " << f.residual.transpose() << '\n';
  std::cout << "W radii = " << f.model.W.radii.transpose() << '\n';
  if (f.route == "lipschitz") std::cout << "Lip    = " << f.lipschitz.transpose() << '\n';
  return kOk;
}

int cmd_brs(const Options& o) {
  const auto cfg = load(o);
  const FitOutcome f = fit_from_document(io::read_json(or_default(o.model, cfg.output / "model.json")));
  Dataset data;
  if (cfg.mode == ExperimentConfig::Mode::Local) {
    data = read_dataset(or_default(o.data, cfg.output / "dataset.csv"));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const BrsResult R = compute_brs(cfg, f, data, [](int k, const LayerStats& st) {
    std::cerr << "layer " << k << ": " << st.pieces << " pieces, " << st.splits << " splits, " << st.dropped
              << " dropped, " << st.seconds << " s\n";
  });
  const double seconds = since(t0);
  io::write_json(cfg.output / "brs.json", io::to_json(R));
  io::write_json(cfg.output / "brs_report.json", brs_report(R, seconds));
  for (const auto& w : R.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "horizon " << R.horizon() << ", " << R.layers.back().size() << " pieces in the last layer, " << seconds
            << " s\n";
  return kOk;
}

int cmd_simulate(const Options& o) {
  const auto cfg = load(o);
  const BrsResult R = io::brs_from_json(io::read_json(or_default(o.brs, cfg.output / "brs.json")));
  const Vec x0 = parse_vector(o.x0);
  const Trajectory T = simulate(cfg, R, x0);
  io::write_trajectory_csv(cfg.output / "trajectory.csv", T);
  io::write_json(cfg.output / "trajectory.json", io::to_json(T));
  io::write_json(cfg.output / "trajectory_summary.json", io::trajectory_summary(T));
  std::cout << "reached " << std::boolalpha << T.reached << " in " << T.steps_used << " steps\n";
  return T.reached ? kOk : kGuarantee;
}

int cmd_export(const Options& o) {
  const fs::path out = o.out.empty() ? fs::path("out") : fs::path(o.out);
  fs::create_directories(out);
  const BrsResult R = io::brs_from_json(io::read_json(or_default(o.brs, out / "brs.json")));
  std::optional<Trajectory> T;
  if (!o.trajectory.empty()) T = io::trajectory_from_json(io::read_json(o.trajectory));
  io::write_json(out / "bundle.json", io::export_bundle(R, T ? &*T : nullptr));
  std::cout << "wrote " << (out / "bundle.json").string() << '\n';
  return kOk;
}

int run(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kConfig;
  } catch (const KsRejected& e) {
    std::cerr << "statistical validation failed: " << e.what() << '\n';
    return kStatistical;
  } catch (const FitDiverged& e) {
    std::cerr << "statistical validation failed: " << e.what() << '\n';
    return kStatistical;
  } catch (const NotInBrs& e) {
    std::cerr << "not in the backward reachable set: " << e.what() << '\n';
    return kGuarantee;
  } catch (const GuaranteeViolation& e) {
    std::cerr << "guarantee violated: " << e.what() << '\n';
    return kGuarantee;
  } catch (const EmptyAdmissible& e) {
    std::cerr << "guarantee violated: " << e.what() << '\n';
    return kGuarantee;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Koopman-lifted backward reachable sets from data"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool config_required = true) {
    auto* c = sub->add_option("--config", o.config, "experiment config (YAML)");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides the config)");
  };
  auto overrides = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "base seed");
    sub->add_option("--mode", o.mode, "global or local")->check(CLI::IsMember({"global", "local"}));
    sub->add_option("--horizon", o.horizon, "horizon K");
    sub->add_option("--threshold", o.threshold, "split threshold tau");
  };

  auto* gen = app.add_subcommand("gen-data", "sample transition triples");
  common(gen);
  overrides(gen);
  auto* fit = app.add_subcommand("fit", "fit the global model and bound its error");
  common(fit);
  overrides(fit);
  fit->add_option("--data", o.data, "dataset CSV (default <out>/dataset.csv)");
  auto* brs = app.add_subcommand("brs", "compute the backward reachable sets");
  common(brs);
  overrides(brs);
  brs->add_option("--model", o.model, "model JSON (default <out>/model.json)");
  brs->add_option("--data", o.data, "dataset CSV for local mode");
  auto* sim = app.add_subcommand("simulate", "closed loop from x0 with extracted inputs");
  common(sim);
  overrides(sim);
  sim->add_option("--brs", o.brs, "BRS JSON (default <out>/brs.json)");
  sim->add_option("--x0", o.x0, "initial state, e.g. \"3.14159,0\"")->required();
  auto* exp = app.add_subcommand("export", "plot bundle for planar systems");
  common(exp, false);
  exp->add_option("--brs", o.brs, "BRS JSON (default <out>/brs.json)");
  exp->add_option("--trajectory", o.trajectory, "trajectory JSON from simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  if (gen->parsed()) return run([&] { return cmd_gen_data(o); });
  if (fit->parsed()) return run([&] { return cmd_fit(o); });
  if (brs->parsed()) return run([&] { return cmd_brs(o); });
  if (sim->parsed()) return run([&] { return cmd_simulate(o); });
  return run([&] { return cmd_export(o); });
}
