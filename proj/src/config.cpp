#include "koopbrs/config.hpp"

#include "koopbrs/errors.hpp"
#include "koopbrs/lifting.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace koopbrs {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    const auto mark = at.Mark();
    std::string where = source_;
    if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1);
    throw ConfigError(where + ": " + what);
  }

  void expect_map(const YAML::Node& node, const std::string& name, const std::set<std::string>& allowed) const {
    if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail(kv.first, "unknown key '" + key + "' in " + name);
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& name) const {
    if (!node.IsScalar()) fail(node, "'" + name + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + name + "' has the wrong type (got '" + node.Scalar() + "')");
    }
  }

  template <class T>
  void optional(const YAML::Node& parent, const char* key, T& out) const {
    if (const auto node = parent[key]) out = scalar<T>(node, key);
  }

  Vec vector(const YAML::Node& node, const std::string& name) const {
    if (!node.IsSequence()) fail(node, "'" + name + "' must be a list of numbers");
    Vec v(static_cast<Eigen::Index>(node.size()));
    for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar<double>(node[i], name);
    return v;
  }

  Box box(const YAML::Node& node, const std::string& name) const {
    expect_map(node, name, {"lower", "upper"});
    if (!node["lower"] || !node["upper"]) fail(node, "'" + name + "' needs lower and upper");
    const Vec lo = vector(node["lower"], name + ".lower");
    const Vec hi = vector(node["upper"], name + ".upper");
    if (lo.size() != hi.size()) fail(node, "'" + name + "' bounds differ in length");
    if ((hi.array() < lo.array()).any()) fail(node, "'" + name + "' has upper < lower");
    return Box::from_bounds(lo, hi);
  }

 private:
  std::string source_;
};

SystemSpec read_system(const Reader& r, const YAML::Node& node) {
  if (node.IsScalar()) {
    try {
      return system_by_name(node.Scalar());
    } catch (const ConfigError& e) {
      r.fail(node, e.what());
    }
  }
  r.expect_map(node, "system", {"name", "domain", "inputs", "target"});
  if (!node["name"]) r.fail(node, "system needs a name");
  SystemSpec spec;
  try {
    spec = system_by_name(r.scalar<std::string>(node["name"], "system.name"));
  } catch (const ConfigError& e) {
    r.fail(node["name"], e.what());
  }
  auto override_box = [&](const char* key, Box& target, int dim) {
    if (const auto b = node[key]) {
      target = r.box(b, std::string("system.") + key);
      if (target.dim() != dim) r.fail(b, std::string("system.") + key + " has the wrong dimension");
    }
  };
  override_box("domain", spec.domain, spec.state_dim);
  override_box("inputs", spec.inputs, spec.input_dim);
  override_box("target", spec.target, spec.state_dim);
  return spec;
}

}  // namespace

std::string to_string(ExperimentConfig::Mode mode) { return mode == ExperimentConfig::Mode::Local ? "local" : "global"; }

ExperimentConfig::Mode parse_mode(const std::string& text) {
  if (text == "global") return ExperimentConfig::Mode::Global;
  if (text == "local") return ExperimentConfig::Mode::Local;
  throw ConfigError("mode must be 'global' or 'local', got '" + text + "'");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  r.expect_map(root, "config", {"system", "lifting", "mode", "sampling", "error", "horizon", "threshold", "split_cap",
                                "adapt_B", "seed", "output"});
  for (const char* key : {"system", "lifting"}) {
    if (!root[key]) r.fail(root, std::string("missing required key '") + key + "'");
  }

  ExperimentConfig cfg;
  cfg.system = read_system(r, root["system"]);

  const auto lifting = root["lifting"];
  if (!lifting.IsSequence()) r.fail(lifting, "'lifting' must be a list of observable descriptors");
  for (const auto& d : lifting) cfg.lifting.push_back(r.scalar<std::string>(d, "lifting"));
  try {
    Lifting::from_descriptors(cfg.system.state_dim, cfg.lifting);
  } catch (const Error& e) {
    r.fail(lifting, e.what());
  }

  if (const auto mode = root["mode"]) {
    try {
      cfg.mode = parse_mode(r.scalar<std::string>(mode, "mode"));
    } catch (const ConfigError& e) {
      r.fail(mode, e.what());
    }
  }

  if (const auto s = root["sampling"]) {
    r.expect_map(s, "sampling", {"kind", "count", "spacing", "holdout", "ks"});
    std::string kind = "random";
    r.optional(s, "kind", kind);
    if (kind == "grid") {
      cfg.sampling.kind = SamplingConfig::Kind::Grid;
    } else if (kind != "random") {
      r.fail(s["kind"], "sampling.kind must be 'random' or 'grid'");
    }
    r.optional(s, "count", cfg.sampling.count);
    r.optional(s, "holdout", cfg.sampling.holdout);
    r.optional(s, "ks", cfg.sampling.ks);
    if (const auto sp = s["spacing"]) {
      cfg.sampling.spacing = r.vector(sp, "sampling.spacing");
      if (cfg.sampling.spacing.size() != cfg.system.state_dim + cfg.system.input_dim) {
        r.fail(sp, "sampling.spacing needs one entry per state and input");
      }
      if ((cfg.sampling.spacing.array() <= 0.0).any()) r.fail(sp, "sampling.spacing must be positive");
    } else if (cfg.sampling.kind == SamplingConfig::Kind::Grid) {
      r.fail(s, "grid sampling needs 'spacing'");
    }
  }

  if (const auto e = root["error"]) {
    r.expect_map(e, "error", {"route", "batch", "alpha", "n_fit", "n_ks", "enforce_ks"});
    std::string route = "direct";
    r.optional(e, "route", route);
    if (route == "lipschitz") {
      cfg.error.route = ErrorConfig::Route::Lipschitz;
    } else if (route != "direct") {
      r.fail(e["route"], "error.route must be 'direct' or 'lipschitz'");
    }
    r.optional(e, "batch", cfg.error.batch);
    r.optional(e, "alpha", cfg.error.alpha);
    r.optional(e, "n_fit", cfg.error.n_fit);
    r.optional(e, "n_ks", cfg.error.n_ks);
    r.optional(e, "enforce_ks", cfg.error.enforce_ks);
    if (!(cfg.error.alpha > 0.0 && cfg.error.alpha < 1.0)) r.fail(e["alpha"] ? e["alpha"] : e, "alpha must lie in (0, 1)");
  }

  if (const auto h = root["horizon"]) {
    cfg.horizon = r.scalar<int>(h, "horizon");
    if (cfg.horizon < 1) r.fail(h, "horizon must be at least 1");
  }
  if (const auto t = root["threshold"]) {
    cfg.threshold = r.scalar<double>(t, "threshold");
    if (!(cfg.threshold > 0.0)) r.fail(t, "threshold must be positive");
  }
  r.optional(root, "split_cap", cfg.split_cap);
  r.optional(root, "adapt_B", cfg.adapt_B);
  r.optional(root, "seed", cfg.seed);
  if (const auto o = root["output"]) cfg.output = r.scalar<std::string>(o, "output");

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void validate(const ExperimentConfig& cfg) {
  if (!(cfg.error.alpha > 0.0 && cfg.error.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.horizon < 1) throw ConfigError("horizon must be at least 1");
  if (!(cfg.threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (cfg.split_cap < 0) throw ConfigError("split_cap must be non-negative");
  if (cfg.error.batch < 1) throw ConfigError("error.batch must be at least 1");
  if (cfg.sampling.kind == SamplingConfig::Kind::Random && cfg.sampling.count < 1) {
    throw ConfigError("sampling.count must be at least 1");
  }
  if (cfg.sampling.kind == SamplingConfig::Kind::Grid &&
      cfg.sampling.spacing.size() != cfg.system.state_dim + cfg.system.input_dim) {
    throw ConfigError("grid sampling needs one spacing per state and input");
  }
  if (cfg.error.route == ErrorConfig::Route::Direct) {
    if (cfg.sampling.holdout < cfg.error.batch || cfg.sampling.ks < cfg.error.batch) {
      throw ConfigError("holdout and ks sets must hold at least one batch");
    }
  } else if (cfg.error.n_fit < cfg.error.batch || cfg.error.n_ks < cfg.error.batch) {
    throw ConfigError("n_fit and n_ks must hold at least one batch");
  }
  if (cfg.mode == ExperimentConfig::Mode::Local && cfg.error.route != ErrorConfig::Route::Lipschitz) {
    throw ConfigError("local mode needs the lipschitz error route");
  }
  if (static_cast<int>(cfg.lifting.size()) < cfg.system.state_dim) throw ConfigError("lifting is too short");
}

}  // namespace koopbrs
