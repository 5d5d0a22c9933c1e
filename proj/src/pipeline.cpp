#include "koopbrs/pipeline.hpp"

#include "koopbrs/control.hpp"
#include "koopbrs/errors.hpp"

#include <chrono>
#include <random>

namespace koopbrs {
namespace {

using Clock = std::chrono::steady_clock;
using io::json;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

HPolytope xu_domain(const SystemSpec& spec) {
  return cartesian_product(to_polytope(spec.domain), to_polytope(spec.inputs));
}

json evt_json(const EvtEstimate& e) {
  json ks = json::array();
  for (Eigen::Index i = 0; i < e.per_component.size(); ++i) {
    ks.push_back({{"component", i},
                  {"pass", static_cast<bool>(e.ks_pass[static_cast<std::size_t>(i)])},
                  {"statistic", e.ks_statistic[i]},
                  {"p_value", e.ks_p_value[i]}});
  }
  return {{"estimate", io::to_json(e.per_component)}, {"batch", e.batch}, {"n_fit", e.n_fit}, {"n_ks", e.n_ks},
          {"seed", e.seed}, {"ks", ks}};
}

}  // namespace

DataSets generate_data(const ExperimentConfig& cfg) {
  DataSets out;
  if (cfg.sampling.kind == SamplingConfig::Kind::Grid) {
    out.fit = sample_grid(cfg.system, cfg.sampling.spacing);
  } else {
    out.fit = sample_random(cfg.system, cfg.sampling.count, cfg.seed);
  }
  if (cfg.error.route == ErrorConfig::Route::Direct) {
    out.holdout = sample_random(cfg.system, cfg.sampling.holdout, cfg.seed + 1);
    out.ks = sample_random(cfg.system, cfg.sampling.ks, cfg.seed + 2);
  }
  return out;
}

json dataset_metadata(const ExperimentConfig& cfg, const DataSets& data) {
  json j = {{"system", cfg.system.name},
            {"state_dim", cfg.system.state_dim},
            {"input_dim", cfg.system.input_dim},
            {"domain", io::to_json(cfg.system.domain)},
            {"inputs", io::to_json(cfg.system.inputs)},
            {"dt", cfg.system.dt},
            {"rows", data.fit.size()}};
  if (data.fit.grid_spacing) {
    j["sampling"] = {{"kind", "grid"}, {"spacing", io::to_json(*data.fit.grid_spacing)}};
    if (data.fit.grid_box) j["sampling"]["grid_box"] = io::to_json(*data.fit.grid_box);
  } else {
    j["sampling"] = {{"kind", "random"}, {"seed", cfg.seed}};
  }
  if (data.holdout) j["holdout"] = {{"rows", data.holdout->size()}, {"seed", cfg.seed + 1}};
  if (data.ks) j["ks"] = {{"rows", data.ks->size()}, {"seed", cfg.seed + 2}};
  return j;
}

void attach_metadata(Dataset& D, const json& meta) {
  try {
    const json& s = meta.at("sampling");
    if (s.at("kind") != "grid") return;
    const Vec spacing = io::vector_from_json(s.at("spacing"));
    const Box box = io::box_from_json(s.at("grid_box"));
    if (spacing.size() != D.state_dim() + D.input_dim() || box.dim() != spacing.size()) {
      throw ConfigError("grid metadata does not match the dataset");
    }
    D.grid_spacing = spacing;
    D.grid_box = box;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad dataset metadata: ") + e.what());
  }
}

FitOutcome fit_model(const ExperimentConfig& cfg, const DataSets& data) {
  const auto t0 = Clock::now();
  const Lifting L = Lifting::from_descriptors(cfg.system.state_dim, cfg.lifting);
  const GlobalFit g = fit_global(data.fit, L);
  FitOutcome f;
  f.residual = g.residual;
  f.center = g.center;
  f.lipschitz_psi = lipschitz_constant(L, cfg.system.domain);
  Box W;
  if (cfg.error.route == ErrorConfig::Route::Direct) {
    if (!data.holdout || !data.ks) throw ConfigError("the direct route needs holdout and KS datasets");
    f.route = "direct";
    const DirectBound d = error_set_direct(*data.holdout, *data.ks, L, g.A, g.B, g.center, cfg.error.batch,
                                           cfg.error.alpha, cfg.error.enforce_ks);
    W = d.W;
    f.evt = d.report;
    f.lipschitz = Vec::Zero(L.dim());
  } else {
    f.route = "lipschitz";
    const Mat E = lifted_errors(data.fit, L, g.A, g.B);
    EvtOptions opt;
    opt.n_fit = cfg.error.n_fit;
    opt.batch = cfg.error.batch;
    opt.n_ks = cfg.error.n_ks;
    opt.alpha = cfg.error.alpha;
    opt.seed = cfg.seed;
    opt.enforce_ks = cfg.error.enforce_ks;
    f.evt = estimate_lipschitz_evt(data.fit.xu(), E, opt);
    f.lipschitz = f.evt.per_component;
    f.b = dispersion(data.fit, xu_domain(cfg.system)).value;
    std::vector<int> states(static_cast<std::size_t>(cfg.system.state_dim));
    for (int i = 0; i < cfg.system.state_dim; ++i) states[static_cast<std::size_t>(i)] = i;
    f.b_x = data.fit.grid_spacing ? grid_dispersion(data.fit, states) : f.b;
    W = error_set_global(g.residual, g.center, f.lipschitz, f.b);
  }
  f.model = {L, g.A, g.B, W, xu_domain(cfg.system), std::nullopt};
  f.seconds = seconds_since(t0);
  return f;
}

json model_document(const FitOutcome& f) {
  json j = io::to_json(f.model);
  j["error_bound"] = {{"route", f.route},
                      {"residual", io::to_json(f.residual)},
                      {"center", io::to_json(f.center)},
                      {"lipschitz", io::to_json(f.lipschitz)},
                      {"lipschitz_psi", f.lipschitz_psi},
                      {"b", f.b},
                      {"b_x", f.b_x}};
  return j;
}

FitOutcome fit_from_document(const json& j) {
  FitOutcome f;
  f.model = io::model_from_json(j);
  if (!j.contains("error_bound")) throw ConfigError("model file has no error_bound block");
  try {
    const json& e = j.at("error_bound");
    f.route = e.at("route").get<std::string>();
    f.residual = io::vector_from_json(e.at("residual"));
    f.center = io::vector_from_json(e.at("center"));
    f.lipschitz = io::vector_from_json(e.at("lipschitz"));
    f.lipschitz_psi = e.at("lipschitz_psi").get<double>();
    f.b = e.at("b").get<double>();
    f.b_x = e.at("b_x").get<double>();
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad error_bound block: ") + ex.what());
  }
  const Eigen::Index p = f.model.A.rows();
  if (f.residual.size() != p || f.center.size() != p || f.lipschitz.size() != p) {
    throw ConfigError("error_bound vectors do not match the model dimension");
  }
  return f;
}

json fit_report(const FitOutcome& f) {
  return {{"route", f.route},
          {"residual", io::to_json(f.residual)},
          {"center", io::to_json(f.center)},
          {"W_radii", io::to_json(f.model.W.radii)},
          {"W_center", io::to_json(f.model.W.center)},
          {"lipschitz", io::to_json(f.lipschitz)},
          {"lipschitz_psi", f.lipschitz_psi},
          {"b", f.b},
          {"b_x", f.b_x},
          {"evt", evt_json(f.evt)},
          {"seconds", f.seconds}};
}

BrsResult compute_brs(const ExperimentConfig& cfg, const FitOutcome& f, const Dataset& data,
                      std::function<void(int, const LayerStats&)> progress) {
  const SystemSpec& s = cfg.system;
  const HPolytope target = to_polytope(s.target);
  if (cfg.mode == ExperimentConfig::Mode::Global) return brs_global(f.model, target, s.domain, s.inputs, cfg.horizon);
  if (f.route != "lipschitz") throw ConfigError("local mode needs a model fitted with the lipschitz route");
  LocalBrsOptions opt;
  opt.threshold = cfg.threshold;
  opt.adapt_B = cfg.adapt_B;
  opt.split_cap = cfg.split_cap;
  opt.progress = std::move(progress);
  return brs_local({data, f.model.lifting, f.model.A, f.model.B, f.lipschitz, f.lipschitz_psi, f.b, f.b_x}, target,
                   s.domain, s.inputs, cfg.horizon, opt);
}

double layer_volume_estimate(const BrsResult& R, int k, int samples) {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Box& S = R.state_domain;
  int hits = 0;
  Vec x(S.dim());
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < S.dim(); ++i) x[i] = S.center[i] + S.radii[i] * unit(rng);
    if (membership(R, x, k)) ++hits;
  }
  return S.volume() * hits / samples;
}

json brs_report(const BrsResult& R, double seconds) {
  json layers = json::array();
  for (int k = 0; k <= R.horizon(); ++k) {
    const auto& st = R.stats[static_cast<std::size_t>(k)];
    layers.push_back({{"layer", k},
                      {"pieces", st.pieces},
                      {"splits", st.splits},
                      {"dropped", st.dropped},
                      {"volume_estimate", layer_volume_estimate(R, k)},
                      {"seconds", st.seconds}});
  }
  return {{"horizon", R.horizon()}, {"models", R.models.size()}, {"layers", layers}, {"warnings", R.warnings},
          {"seconds", seconds}};
}

Trajectory simulate(const ExperimentConfig& cfg, const BrsResult& R, const Vec& x0) {
  if (x0.size() != cfg.system.state_dim) throw DimensionMismatch("x0 has the wrong length");
  return simulate_closed_loop(step_function(cfg.system), R, x0, to_polytope(cfg.system.target));
}

}  // namespace koopbrs
