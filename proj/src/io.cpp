#include "koopbrs/io.hpp"

#include "koopbrs/errors.hpp"

#include <charconv>
#include <fstream>

namespace koopbrs::io {
namespace {

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

json to_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json to_json(const HPolytope& P) { return {{"dim", P.dim()}, {"H", to_json(P.H())}, {"h", to_json(P.h())}}; }

json to_json(const Box& B) { return {{"center", to_json(B.center)}, {"radii", to_json(B.radii)}}; }

json to_json(const PolyUnion& U) {
  json pieces = json::array();
  for (const auto& P : U.pieces) pieces.push_back(to_json(P));
  return {{"pieces", pieces}};
}

json to_json(const Lifting& L) { return {{"state_dim", L.state_dim()}, {"observables", L.descriptors()}}; }

json to_json(const KoopmanModel& M) {
  return {{"A", to_json(M.A)},
          {"B", to_json(M.B)},
          {"W", to_json(M.W)},
          {"subdomain", to_json(M.subdomain)},
          {"lifting", to_json(M.lifting)},
          {"parent", M.parent ? json(*M.parent) : json(nullptr)}};
}

json to_json(const BrsResult& R) {
  json layers = json::array();
  for (const auto& layer : R.layers) {
    json pieces = json::array();
    for (const auto& pc : layer) {
      pieces.push_back({{"polytope", to_json(pc.polytope)},
                        {"model_id", pc.model_id},
                        {"target_piece_id", pc.target_piece_id},
                        {"subdomain", to_json(pc.subdomain_x)}});
    }
    layers.push_back(std::move(pieces));
  }
  json models = json::object();
  for (std::size_t i = 0; i < R.models.size(); ++i) models[std::to_string(i)] = to_json(R.models[i]);
  json stats = json::array();
  for (std::size_t k = 0; k < R.stats.size(); ++k) {
    const auto& s = R.stats[k];
    stats.push_back({{"layer", k}, {"pieces", s.pieces}, {"splits", s.splits}, {"dropped", s.dropped}, {"seconds", s.seconds}});
  }
  return {{"lifting", to_json(R.lifting)},
          {"state_domain", to_json(R.state_domain)},
          {"input_set", to_json(R.input_set)},
          {"target", to_json(R.target)},
          {"layers", layers},
          {"models", models},
          {"stats", stats},
          {"warnings", R.warnings}};
}

json to_json(const Trajectory& T) {
  json states = json::array(), inputs = json::array();
  for (const auto& x : T.states) states.push_back(to_json(x));
  for (const auto& u : T.inputs) inputs.push_back(to_json(u));
  return {{"states", states}, {"inputs", inputs}, {"pieces", T.pieces}, {"reached", T.reached},
          {"steps_used", T.steps_used}};
}

Mat matrix_from_json(const json& j, Eigen::Index cols_if_empty) {
  if (!j.is_array()) throw ConfigError("matrix must be an array of rows");
  if (j.empty()) return Mat(0, cols_if_empty);
  const Eigen::Index cols = static_cast<Eigen::Index>(j.front().size());
  Mat M(static_cast<Eigen::Index>(j.size()), cols);
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = row[c].get<double>();
  }
  return M;
}

Vec vector_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

HPolytope polytope_from_json(const json& j) {
  const int dim = field(j, "dim").get<int>();
  Mat H = matrix_from_json(field(j, "H"), dim);
  Vec h = vector_from_json(field(j, "h"));
  if (H.cols() != dim) throw ConfigError("polytope 'H' width disagrees with 'dim'");
  return HPolytope(std::move(H), std::move(h));
}

Box box_from_json(const json& j) { return Box(vector_from_json(field(j, "center")), vector_from_json(field(j, "radii"))); }

PolyUnion union_from_json(const json& j) {
  PolyUnion U;
  for (const auto& p : field(j, "pieces")) U.pieces.push_back(polytope_from_json(p));
  return U;
}

Lifting lifting_from_json(const json& j) {
  return Lifting::from_descriptors(field(j, "state_dim").get<int>(),
                                   field(j, "observables").get<std::vector<std::string>>());
}

KoopmanModel model_from_json(const json& j) {
  KoopmanModel M;
  M.lifting = lifting_from_json(field(j, "lifting"));
  M.A = matrix_from_json(field(j, "A"), M.lifting.dim());
  M.B = matrix_from_json(field(j, "B"));
  M.W = box_from_json(field(j, "W"));
  M.subdomain = polytope_from_json(field(j, "subdomain"));
  if (j.contains("parent") && !j.at("parent").is_null()) M.parent = j.at("parent").get<int>();
  const int p = M.lifting.dim();
  if (M.A.rows() != p || M.A.cols() != p || M.B.rows() != p || M.W.dim() != p) {
    throw ConfigError("model matrices disagree with the lifting dimension");
  }
  return M;
}

BrsResult brs_from_json(const json& j) {
  BrsResult R;
  R.lifting = lifting_from_json(field(j, "lifting"));
  R.state_domain = box_from_json(field(j, "state_domain"));
  R.input_set = box_from_json(field(j, "input_set"));
  R.target = polytope_from_json(field(j, "target"));
  const json& models = field(j, "models");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string key = std::to_string(i);
    if (!models.contains(key)) throw ConfigError("models must be keyed 0..N-1");
    R.models.push_back(model_from_json(models.at(key)));
  }
  for (const auto& layer : field(j, "layers")) {
    std::vector<BrsPiece> pieces;
    for (const auto& pc : layer) {
      BrsPiece piece{polytope_from_json(field(pc, "polytope")), field(pc, "model_id").get<int>(),
                     field(pc, "target_piece_id").get<int>(), HPolytope::universe(R.lifting.state_dim())};
      if (pc.contains("subdomain")) piece.subdomain_x = polytope_from_json(pc.at("subdomain"));
      if (piece.model_id < 0 || piece.model_id >= static_cast<int>(R.models.size())) {
        throw ConfigError("piece refers to unknown model " + std::to_string(piece.model_id));
      }
      pieces.push_back(std::move(piece));
    }
    R.layers.push_back(std::move(pieces));
  }
  for (std::size_t k = 1; k < R.layers.size(); ++k) {
    for (const auto& pc : R.layers[k]) {
      if (pc.target_piece_id < 0 || pc.target_piece_id >= static_cast<int>(R.layers[k - 1].size())) {
        throw ConfigError("target_piece_id out of range in layer " + std::to_string(k));
      }
    }
  }
  if (j.contains("stats")) {
    for (const auto& s : j.at("stats")) {
      R.stats.push_back({s.value("pieces", 0), s.value("splits", 0), s.value("dropped", 0), s.value("seconds", 0.0)});
    }
  }
  if (j.contains("warnings")) R.warnings = j.at("warnings").get<std::vector<std::string>>();
  return R;
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory T;
  try {
    for (const auto& x : j.at("states")) T.states.push_back(vector_from_json(x));
    for (const auto& u : j.at("inputs")) T.inputs.push_back(vector_from_json(u));
    T.pieces = j.value("pieces", std::vector<int>{});
    T.reached = j.at("reached").get<bool>();
    T.steps_used = j.at("steps_used").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad trajectory: ") + e.what());
  }
  return T;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& T) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  const Eigen::Index n = T.states.empty() ? 0 : T.states.front().size();
  const Eigen::Index m = T.inputs.empty() ? 0 : T.inputs.front().size();
  out << "step";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i + 1;
  out << '\n';
  for (std::size_t k = 0; k < T.states.size(); ++k) {
    out << k;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << number(T.states[k][i]);
    for (Eigen::Index i = 0; i < m; ++i) {
      out << ',';
      if (k < T.inputs.size()) out << number(T.inputs[k][i]);
    }
    out << '\n';
  }
}

json trajectory_summary(const Trajectory& T) { return {{"reached", T.reached}, {"steps_used", T.steps_used}}; }

json export_bundle(const BrsResult& R, const Trajectory* T) {
  const int n = R.lifting.state_dim();
  if (n != 2) throw DimensionMismatch("export bundle needs a planar state");
  json layers = json::array();
  for (std::size_t k = 0; k < R.layers.size(); ++k) {
    json loops = json::array();
    for (std::size_t id = 0; id < R.layers[k].size(); ++id) {
      json loop = json::array();
      for (const auto& v : polygon_vertices(project_leading(R.layers[k][id].polytope, 2))) loop.push_back({v[0], v[1]});
      if (!loop.empty()) loops.push_back({{"piece", id}, {"vertices", loop}});
    }
    layers.push_back({{"layer", k}, {"loops", loops}});
  }
  json traj = json::array();
  if (T) {
    for (const auto& x : T->states) traj.push_back({x[0], x[1]});
  }
  const Box target = bounding_box(R.target);
  return {{"state_names", {"x1", "x2"}},
          {"domain", {{"lower", to_json(R.state_domain.lower())}, {"upper", to_json(R.state_domain.upper())}}},
          {"target", {{"lower", to_json(target.lower())}, {"upper", to_json(target.upper())}}},
          {"layers", layers},
          {"trajectory", traj},
          {"reached", T ? json(T->reached) : json(nullptr)}};
}

}  // namespace koopbrs::io
