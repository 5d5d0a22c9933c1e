#include "koopbrs/koopman.hpp"

#include "koopbrs/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace koopbrs {
namespace {

// min cost.v  s.t.  fixed rows,  |y_k - Phi_k theta| <= v[t_index]  for every k,
// where theta = v[0 .. q). Constraints on the samples are generated lazily.
struct Minimax {
  const Mat& Phi;
  const Vec& y;
  int nvar;
  int t_index;
  Vec cost;
  Mat G_fixed;
  Vec g_fixed;
};

constexpr int kMaxAddPerRound = 64;
constexpr int kMaxRounds = 1000;

Vec solve_minimax(const Minimax& P) {
  const Eigen::Index N = P.Phi.rows();
  const int q = static_cast<int>(P.Phi.cols());
  if (N == 0) throw EmptyDataset("minimax fit on an empty dataset");

  std::vector<char> active(N, 0);
  std::vector<Eigen::Index> rows;
  auto add = [&](Eigen::Index k) {
    if (!active[k]) {
      active[k] = 1;
      rows.push_back(k);
    }
  };
  for (int j = 0; j < q; ++j) {
    Eigen::Index lo = 0, hi = 0;
    P.Phi.col(j).minCoeff(&lo);
    P.Phi.col(j).maxCoeff(&hi);
    add(lo);
    add(hi);
  }
  {
    Eigen::Index ylo = 0, yhi = 0;
    P.y.minCoeff(&ylo);
    P.y.maxCoeff(&yhi);
    add(ylo);
    add(yhi);
  }
  const Eigen::Index spread = std::min<Eigen::Index>(N, 4 * (q + 1));
  for (Eigen::Index s = 0; s < spread; ++s) add(s * N / spread);

  const double tol = 1e-10 * (1.0 + P.y.cwiseAbs().maxCoeff());
  const int n_fixed = static_cast<int>(P.G_fixed.rows());
  for (int round = 0; round < kMaxRounds; ++round) {
    const auto R = static_cast<Eigen::Index>(rows.size());
    Mat G = Mat::Zero(n_fixed + 2 * R, P.nvar);
    Vec g(n_fixed + 2 * R);
    if (n_fixed > 0) {
      G.topRows(n_fixed) = P.G_fixed;
      g.head(n_fixed) = P.g_fixed;
    }
    for (Eigen::Index r = 0; r < R; ++r) {
      const Eigen::Index k = rows[r];
      const auto a = n_fixed + 2 * r;
      G.row(a).head(q) = P.Phi.row(k);
      G(a, P.t_index) = -1.0;
      g[a] = P.y[k];
      G.row(a + 1).head(q) = -P.Phi.row(k);
      G(a + 1, P.t_index) = -1.0;
      g[a + 1] = -P.y[k];
    }
    const auto sol = lp::minimize(P.cost, G, g);
    if (!sol.optimal()) throw NumericalFailure("minimax regression LP was not solved to optimality");
    const Vec& v = *sol.point;
    const Vec viol = (P.y - P.Phi * v.head(q)).cwiseAbs().array() - v[P.t_index];

    std::vector<Eigen::Index> worst;
    for (Eigen::Index k = 0; k < N; ++k) {
      if (!active[k] && viol[k] > tol) worst.push_back(k);
    }
    if (worst.empty()) return v;
    const auto take = std::min<std::size_t>(worst.size(), kMaxAddPerRound);
    std::partial_sort(worst.begin(), worst.begin() + take, worst.end(),
                      [&](Eigen::Index a, Eigen::Index b) { return viol[a] > viol[b] || (viol[a] == viol[b] && a < b); });
    for (std::size_t s = 0; s < take; ++s) add(worst[s]);
  }
  throw NumericalFailure("minimax regression did not converge");
}

Mat with_ones(const Mat& M) {
  Mat out(M.rows(), M.cols() + 1);
  out << M, Vec::Ones(M.rows());
  return out;
}

void require_full_rank(const Mat& Phi) {
  Vec norms = Phi.colwise().norm().transpose();
  if ((norms.array() <= 0.0).any()) throw RankDeficientData("a regressor column is identically zero");
  const Mat S = Phi * norms.cwiseInverse().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Mat> eig(S.transpose() * S, Eigen::EigenvaluesOnly);
  const Vec& lam = eig.eigenvalues();
  if (!(lam[0] > 1e-12 * lam[lam.size() - 1])) {
    throw RankDeficientData("regressors (psi(x), u, 1) are linearly dependent on the data");
  }
}

ResidualBounds midrange(const Mat& R) {
  ResidualBounds out;
  const Vec hi = R.colwise().maxCoeff().transpose();
  const Vec lo = R.colwise().minCoeff().transpose();
  out.center = 0.5 * (hi + lo);
  out.half_range = 0.5 * (hi - lo);
  return out;
}

}  // namespace

GlobalFit fit_global(const Dataset& D, const Lifting& L) {
  if (D.state_dim() != L.state_dim()) throw DimensionMismatch("fit_global: dataset and lifting disagree on n");
  const int p = L.dim();
  const int m = D.input_dim();
  if (D.size() < p + m + 1) throw RankDeficientData("fit_global needs at least p + m + 1 triples");
  const Mat Z = L.lift_rows(D.X);
  const Mat Zp = L.lift_rows(D.Xp);
  Mat features(D.size(), p + m);
  features << Z, D.U;
  const Mat Phi = with_ones(features);
  require_full_rank(Phi);

  const int q = p + m + 1;
  GlobalFit fit;
  fit.A.resize(p, p);
  fit.B.resize(p, m);
  for (int i = 0; i < p; ++i) {
    const Vec y = Zp.col(i);
    Minimax prob{Phi, y, q + 1, q, Vec::Unit(q + 1, q), Mat(0, q + 1), Vec(0)};
    const Vec v = solve_minimax(prob);
    fit.A.row(i) = v.head(p).transpose();
    fit.B.row(i) = v.segment(p, m).transpose();
  }
  const auto rc = residual_center(D, L, fit.A, fit.B);
  fit.center = rc.center;
  fit.residual = rc.half_range;
  return fit;
}

Mat lifted_errors(const Dataset& D, const Lifting& L, const Mat& A, const Mat& B) {
  const int p = L.dim();
  if (A.rows() != p || A.cols() != p || B.rows() != p || B.cols() != D.input_dim()) {
    throw DimensionMismatch("lifted_errors: model matrices have the wrong shape");
  }
  return L.lift_rows(D.Xp) - L.lift_rows(D.X) * A.transpose() - D.U * B.transpose();
}

ResidualBounds residual_center(const Dataset& D, const Lifting& L, const Mat& A, const Mat& B) {
  if (D.size() < 1) throw EmptyDataset("residual_center on an empty dataset");
  return midrange(lifted_errors(D, L, A, B));
}

double grid_dispersion(const Dataset& D, std::span<const int> coords) {
  if (!D.grid_box || !D.grid_spacing) throw ConfigError("grid_dispersion needs a grid-sampled dataset");
  if (D.size() < 1) throw EmptyDataset("grid_dispersion on an empty dataset");
  const Mat XU = D.xu();
  double best = 0.0;
  for (int j : coords) {
    if (j < 0 || j >= XU.cols()) throw DimensionMismatch("grid_dispersion: coordinate out of range");
    const double lo = D.grid_box->lower()[j];
    const double hi = D.grid_box->upper()[j];
    const double first = XU.col(j).minCoeff();
    const double last = XU.col(j).maxCoeff();
    double axis = std::max(first - lo, hi - last);
    if (last > first) axis = std::max(axis, 0.5 * (*D.grid_spacing)[j]);
    best = std::max(best, axis);
  }
  return best;
}

Dispersion dispersion(const Dataset& D, const HPolytope& S, int probes_per_axis) {
  if (D.size() < 1) throw EmptyDataset("dispersion of an empty dataset");
  const int d = D.state_dim() + D.input_dim();
  if (S.dim() != d) throw DimensionMismatch("dispersion: constraint set must live in (x, u) space");
  if (D.grid_box && D.grid_spacing) {
    const auto box = to_polytope(*D.grid_box);
    if (contains(S, box, 1e-9) && contains(box, S, 1e-9)) {
      std::vector<int> all(d);
      std::iota(all.begin(), all.end(), 0);
      return {grid_dispersion(D, all), false};
    }
  }
  if (probes_per_axis < 2) throw ConfigError("dispersion probe grid needs at least 2 points per axis");
  const Box bb = bounding_box(S);
  const Mat XU = D.xu();
  std::vector<int> idx(d, 0);
  Vec probe(d);
  double worst = 0.0;
  for (;;) {
    for (int j = 0; j < d; ++j) {
      probe[j] = bb.lower()[j] + 2.0 * bb.radii[j] * static_cast<double>(idx[j]) / (probes_per_axis - 1);
    }
    if (contains_point(S, probe)) {
      const double nearest = (XU.rowwise() - probe.transpose()).cwiseAbs().rowwise().maxCoeff().minCoeff();
      worst = std::max(worst, nearest);
    }
    int j = d - 1;
    while (j >= 0 && ++idx[j] == probes_per_axis) idx[j--] = 0;
    if (j < 0) break;
  }
  return {worst, true};
}

LipschitzEstimate estimate_lipschitz_evt(const Mat& points, const Mat& values, const EvtOptions& opt) {
  const Eigen::Index N = points.rows();
  if (values.rows() != N) throw DimensionMismatch("estimate_lipschitz_evt: points and values disagree");
  if (N < 2) throw EmptyDataset("estimate_lipschitz_evt needs at least two samples");
  if (opt.batch < 1 || opt.n_fit < 10 * opt.batch || opt.n_ks < opt.batch) {
    throw ConfigError("EVT needs n_fit >= 10 * batch and n_ks >= batch");
  }
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0)) throw ConfigError("EVT significance must lie in (0, 1)");

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, N - 1);
  const int total = opt.n_fit + opt.n_ks;
  const int p = static_cast<int>(values.cols());
  Mat slopes(total, p);
  for (int s = 0; s < total; ++s) {
    for (int attempt = 0;; ++attempt) {
      const Eigen::Index a = pick(rng);
      const Eigen::Index b = pick(rng);
      const double dist = (points.row(a) - points.row(b)).cwiseAbs().maxCoeff();
      if (dist > 0.0) {
        slopes.row(s) = (values.row(a) - values.row(b)).cwiseAbs() / dist;
        break;
      }
      if (attempt > 1000) throw EmptyDataset("all sampled points coincide");
    }
  }

  LipschitzEstimate est;
  est.per_component.resize(p);
  est.ks_statistic.resize(p);
  est.ks_p_value.resize(p);
  est.batch = opt.batch;
  est.n_fit = opt.n_fit;
  est.n_ks = opt.n_ks;
  est.seed = opt.seed;
  for (int i = 0; i < p; ++i) {
    const Vec col = slopes.col(i);
    const std::span<const double> all(col.data(), static_cast<std::size_t>(total));
    const auto r = evt::estimate_endpoint(all.first(opt.n_fit), all.subspan(opt.n_fit), opt.batch, opt.alpha);
    est.per_component[i] = r.estimate;
    est.ks_pass.push_back(r.ks.pass);
    est.ks_statistic[i] = r.ks.statistic;
    est.ks_p_value[i] = r.ks.p_value;
    if (opt.enforce_ks && !r.ks.pass) throw KsRejected(i, r.ks.statistic, r.ks.p_value);
  }
  return est;
}

Box error_set_global(const Vec& residual, const Vec& center, const Vec& lipschitz, double b) {
  if (residual.size() != center.size() || lipschitz.size() != center.size()) {
    throw DimensionMismatch("error_set_global: inconsistent component counts");
  }
  if (!(b >= 0.0)) throw ConfigError("dispersion must be nonnegative");
  return Box(center, lipschitz * b + residual);
}

DirectBound error_set_direct(const Dataset& holdout, const Dataset& ks_set, const Lifting& L, const Mat& A,
                             const Mat& B, const Vec& center, int batch, double alpha, bool enforce_ks) {
  if (holdout.size() < 1 || ks_set.size() < 1) throw EmptyDataset("error_set_direct needs holdout and KS samples");
  const Mat Ef = (lifted_errors(holdout, L, A, B).rowwise() - center.transpose()).cwiseAbs();
  const Mat Ek = (lifted_errors(ks_set, L, A, B).rowwise() - center.transpose()).cwiseAbs();
  const int p = L.dim();
  DirectBound out;
  auto& rep = out.report;
  rep.per_component.resize(p);
  rep.ks_statistic.resize(p);
  rep.ks_p_value.resize(p);
  rep.batch = batch;
  rep.n_fit = holdout.size();
  rep.n_ks = ks_set.size();
  for (int i = 0; i < p; ++i) {
    const Vec f = Ef.col(i);
    const Vec k = Ek.col(i);
    const auto r = evt::estimate_endpoint({f.data(), static_cast<std::size_t>(f.size())},
                                          {k.data(), static_cast<std::size_t>(k.size())}, batch, alpha);
    rep.per_component[i] = r.estimate;
    rep.ks_pass.push_back(r.ks.pass);
    rep.ks_statistic[i] = r.ks.statistic;
    rep.ks_p_value[i] = r.ks.p_value;
    if (enforce_ks && !r.ks.pass) throw KsRejected(i, r.ks.statistic, r.ks.p_value);
  }
  out.W = Box(center, rep.per_component);
  return out;
}

std::vector<Eigen::Index> restrict_indices(const Dataset& D, const HPolytope& S, double b) {
  const int d = D.state_dim() + D.input_dim();
  if (S.dim() != d) throw DimensionMismatch("restrict_dataset: subdomain must live in (x, u) space");
  if (!(b >= 0.0)) throw ConfigError("restrict_dataset: b must be nonnegative");
  const Vec offsets = S.h() + b * S.H().cwiseAbs().rowwise().sum();
  const Mat XU = D.xu();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < XU.rows(); ++k) {
    if (((S.H() * XU.row(k).transpose() - offsets).array() <= 1e-9).all()) keep.push_back(k);
  }
  return keep;
}

Dataset restrict_dataset(const Dataset& D, const HPolytope& S, double b) {
  const auto keep = restrict_indices(D, S, b);
  if (keep.empty()) throw EmptyRestriction("no triple lies within b of the subdomain");
  return D.subset(keep);
}

LocalFit fit_local(const Dataset& Dr, const Lifting& L, const Mat& A, const Mat& B, double lipschitz_psi,
                   const Vec& lipschitz_error, double b, const LocalFitOptions& opt) {
  if (Dr.size() < 1) throw EmptyRestriction("fit_local on an empty dataset");
  if (!(b >= 0.0) || !(opt.b_x >= 0.0)) throw ConfigError("fit_local: dispersions must be nonnegative");
  const int p = L.dim();
  const int m = Dr.input_dim();
  if (A.rows() != p || A.cols() != p || B.rows() != p || B.cols() != m || lipschitz_error.size() != p) {
    throw DimensionMismatch("fit_local: model shapes disagree with the lifting");
  }
  const Mat Z = L.lift_rows(Dr.X);
  const Mat Zp = L.lift_rows(Dr.Xp);
  const double b_row = opt.adapt_B ? b : opt.b_x;

  Mat features;
  if (opt.adapt_B) {
    features.resize(Dr.size(), p + m);
    features << Z, Dr.U;
  } else {
    features = Z;
  }
  const Mat Phi = with_ones(features);
  const int q = static_cast<int>(Phi.cols());
  const int mb = opt.adapt_B ? m : 0;
  // Variables: theta (q), sA (p), sB (mb), t.
  const int nvar = q + p + mb + 1;
  const int t_index = nvar - 1;
  Vec cost = Vec::Zero(nvar);
  cost.segment(q, p).setConstant(lipschitz_psi * b_row);
  cost.segment(q + p, mb).setConstant(b);
  cost[t_index] = 1.0;

  LocalFit out;
  out.A.resize(p, p);
  out.B = B;
  out.residual.resize(p);
  Vec center(p), radii(p);
  for (int i = 0; i < p; ++i) {
    Mat Gf = Mat::Zero(2 * (p + mb), nvar);
    Vec gf(2 * (p + mb));
    for (int j = 0; j < p + mb; ++j) {
      const double ref = j < p ? A(i, j) : B(i, j - p);
      Gf(2 * j, j) = 1.0;
      Gf(2 * j, q + j) = -1.0;
      gf[2 * j] = ref;
      Gf(2 * j + 1, j) = -1.0;
      Gf(2 * j + 1, q + j) = -1.0;
      gf[2 * j + 1] = -ref;
    }
    Vec y = Zp.col(i);
    if (!opt.adapt_B) y -= Dr.U * B.row(i).transpose();
    const Vec v = solve_minimax({Phi, y, nvar, t_index, cost, Gf, gf});
    out.A.row(i) = v.head(p).transpose();
    if (opt.adapt_B) out.B.row(i) = v.segment(p, m).transpose();

    const Vec r = Zp.col(i) - Z * out.A.row(i).transpose() - Dr.U * out.B.row(i).transpose();
    const double hi = r.maxCoeff();
    const double lo = r.minCoeff();
    center[i] = 0.5 * (hi + lo);
    out.residual[i] = 0.5 * (hi - lo);
    radii[i] = (A.row(i) - out.A.row(i)).lpNorm<1>() * lipschitz_psi * b_row +
               (B.row(i) - out.B.row(i)).lpNorm<1>() * b + lipschitz_error[i] * b_row + out.residual[i];
  }
  out.W = Box(center, radii);
  return out;
}

}  // namespace koopbrs
