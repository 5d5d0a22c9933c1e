#pragma once

#include "koopbrs/config.hpp"
#include "koopbrs/io.hpp"
#include "koopbrs/koopman.hpp"
#include "koopbrs/reach.hpp"

#include <optional>

namespace koopbrs {

struct DataSets {
  Dataset fit;
  std::optional<Dataset> holdout;
  std::optional<Dataset> ks;
};

DataSets generate_data(const ExperimentConfig& cfg);
io::json dataset_metadata(const ExperimentConfig& cfg, const DataSets& data);
/// Restores grid spacing and box from dataset_metadata output (CSV files do not carry them).
void attach_metadata(Dataset& D, const io::json& meta);

/// Everything the reach step needs besides the dataset.
struct FitOutcome {
  KoopmanModel model;
  Vec residual;  ///< e, half range of the global residuals
  Vec center;    ///< c*
  Vec lipschitz;  ///< per-row Lipschitz estimate of the error (Lipschitz route)
  double lipschitz_psi = 1.0;
  double b = 0.0;
  double b_x = 0.0;
  EvtEstimate evt;
  std::string route;
  double seconds = 0.0;
};

/// Global fit plus the error bound of the configured route. Throws KsRejected
/// when enforce_ks is set and a component fails.
FitOutcome fit_model(const ExperimentConfig& cfg, const DataSets& data);

/// Model JSON with an extra "error_bound" block holding the route ingredients.
io::json model_document(const FitOutcome& f);
FitOutcome fit_from_document(const io::json& j);
/// Residuals, KS outcomes and timing.
io::json fit_report(const FitOutcome& f);

BrsResult compute_brs(const ExperimentConfig& cfg, const FitOutcome& f, const Dataset& data,
                      std::function<void(int, const LayerStats&)> progress = {});

/// Domain volume times the fraction of `samples` uniform states in layer k (fixed seed).
double layer_volume_estimate(const BrsResult& R, int k, int samples = 4000);
io::json brs_report(const BrsResult& R, double seconds);

/// Closed loop on the configured system's dynamics.
Trajectory simulate(const ExperimentConfig& cfg, const BrsResult& R, const Vec& x0);

}  // namespace koopbrs
