#pragma once

#include "koopbrs/control.hpp"
#include "koopbrs/reach.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace koopbrs::io {

using json = nlohmann::json;

json to_json(const Mat& M);
json to_json(const Vec& v);
json to_json(const HPolytope& P);
json to_json(const Box& B);
json to_json(const PolyUnion& U);
json to_json(const Lifting& L);
json to_json(const KoopmanModel& M);
json to_json(const BrsResult& R);
json to_json(const Trajectory& T);

Mat matrix_from_json(const json& j, Eigen::Index cols_if_empty = 0);
Vec vector_from_json(const json& j);
HPolytope polytope_from_json(const json& j);
Box box_from_json(const json& j);
PolyUnion union_from_json(const json& j);
Lifting lifting_from_json(const json& j);
KoopmanModel model_from_json(const json& j);
BrsResult brs_from_json(const json& j);
Trajectory trajectory_from_json(const json& j);

/// Pretty-printed with a trailing newline. Throws ConfigError on IO failure.
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

/// step,x1..xn,u1..um; the last row has empty input cells.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& T);
json trajectory_summary(const Trajectory& T);

/// Plot data for planar systems: per layer, the vertex loop of every piece's
/// state projection, plus domain and target boxes and an optional trajectory.
json export_bundle(const BrsResult& R, const Trajectory* T = nullptr);

}  // namespace koopbrs::io
