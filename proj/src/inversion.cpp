#include "nlos/inversion.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

#include "nlos/rng.hpp"

namespace nlos {

namespace {

constexpr double kLambdaFloor = 1e-8;
constexpr double kRidgeProjector = 1e-8;

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

Eigen::LDLT<Eigen::MatrixXd> factor_normal(const Eigen::MatrixXd& a,
                                           double lambda) {
  Eigen::MatrixXd g = a.transpose() * a;
  g.diagonal().array() += lambda;
  return Eigen::LDLT<Eigen::MatrixXd>(g);
}

}  // namespace

Eigen::VectorXd tikhonov_solve(const Eigen::MatrixXd& a,
                               const Eigen::VectorXd& y, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda))
    throw std::invalid_argument("tikhonov_solve: lambda must be >= 0");
  if (y.size() != a.rows())
    throw std::invalid_argument("tikhonov_solve: size mismatch");
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < a.cols())
      throw std::runtime_error("tikhonov_solve: singular system with lambda=0");
    return qr.solve(y);
  }
  const auto ldlt = factor_normal(a, lambda);
  return ldlt.solve(a.transpose() * y);
}

namespace {

// Relaxed mask W = 1 - (1/K) sum_k sigma(z_k) V_k accumulated over the
// sparse blocked pairs; K dense masks are never materialized.
Eigen::MatrixXd relaxed_mask(int m_pixels, int n_pixels,
                             const std::vector<SparseVisibility>& visibility,
                             const Eigen::VectorXd& z) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Ones(m_pixels, n_pixels);
  const double inv_k = 1.0 / static_cast<double>(visibility.size());
  for (size_t k = 0; k < visibility.size(); ++k) {
    const double wk = sigmoid(z[static_cast<Eigen::Index>(k)]) * inv_k;
    for (const auto& [m, n] : visibility[k].blocked) w(m, n) -= wk;
  }
  return w;
}

}  // namespace

IterationEval evaluate_iteration(const TransportMatrix& transport,
                                 const std::vector<SparseVisibility>& visibility,
                                 const Eigen::VectorXd& y,
                                 const InversionState& state) {
  const int m_pixels = transport.rows();
  const int n_pixels = transport.cols();
  IterationEval ev;
  ev.a_v = transport.A.cwiseProduct(
      relaxed_mask(m_pixels, n_pixels, visibility, state.z));
  const Eigen::VectorXd rhs = y - state.b;
  const auto ldlt = factor_normal(ev.a_v, state.lambda);
  ev.f_star = ldlt.solve(ev.a_v.transpose() * rhs);
  ev.f_pos = ev.f_star.cwiseMax(0.0);
  const Eigen::VectorXd r = rhs - ev.a_v * ev.f_pos;
  ev.loss = r.squaredNorm() / static_cast<double>(m_pixels);
  return ev;
}

Gradients gradients(const TransportMatrix& transport,
                    const std::vector<SparseVisibility>& visibility,
                    const Eigen::VectorXd& y, const InversionState& state) {
  const int m_pixels = transport.rows();
  const int n_pixels = transport.cols();
  const double k_count = static_cast<double>(visibility.size());

  const Eigen::MatrixXd a_v = transport.A.cwiseProduct(
      relaxed_mask(m_pixels, n_pixels, visibility, state.z));
  const Eigen::VectorXd residual = y - state.b - a_v * state.f;

  Gradients g;
  // d/dz through the sigmoid-weighted sparse mask, f held fixed
  g.z.resize(state.z.size());
  for (size_t k = 0; k < visibility.size(); ++k) {
    double acc = 0.0;
    for (const auto& [m, n] : visibility[k].blocked)
      acc += residual[m] * transport.A(m, n) * state.f[n];
    const double s = sigmoid(state.z[static_cast<Eigen::Index>(k)]);
    g.z[static_cast<Eigen::Index>(k)] =
        2.0 * s * (1.0 - s) / (m_pixels * k_count) * acc;
  }
  // d/db is direct
  g.b = -2.0 / m_pixels * residual;

  // d/dlambda through f*(lambda) = (G + lambda I)^-1 A_v^T (y - b):
  // df*/dlambda = -(G + lambda I)^-1 f*, chained through the positive part.
  const auto ldlt = factor_normal(a_v, state.lambda);
  const Eigen::VectorXd f_star = ldlt.solve(a_v.transpose() * (y - state.b));
  const Eigen::VectorXd r_star = y - state.b - a_v * f_star.cwiseMax(0.0);
  Eigen::VectorXd dl_df = -2.0 / m_pixels * (a_v.transpose() * r_star);
  for (Eigen::Index n = 0; n < dl_df.size(); ++n)
    if (f_star[n] <= 0.0) dl_df[n] = 0.0;
  const Eigen::VectorXd w = ldlt.solve(f_star);
  g.lambda = -dl_df.dot(w);
  return g;
}

InversionResult alternating_minimize(
    const TransportMatrix& transport,
    const std::vector<SparseVisibility>& visibility, const Eigen::VectorXd& y,
    const SolverOptions& opts) {
  if (opts.num_iter < 1)
    throw std::invalid_argument("alternating_minimize: num_iter must be >= 1");
  if (!(opts.eta_z > 0.0) || !(opts.eta_b > 0.0) || !(opts.eta_lambda > 0.0))
    throw std::invalid_argument("alternating_minimize: step sizes must be > 0");
  if (y.size() != transport.rows())
    throw std::invalid_argument("alternating_minimize: measurement size mismatch");

  const int m_pixels = transport.rows();
  const int k_count = static_cast<int>(visibility.size());

  InversionState state;
  state.z.resize(k_count);
  Rng rng(substream(opts.seed, /*tag=*/0x7a696e69ULL));  // "zini"
  for (int k = 0; k < k_count; ++k) state.z[k] = rng.uniform(-3.0, -1.0);
  state.b = Eigen::VectorXd::Zero(m_pixels);
  state.lambda = 1.0;

  InversionResult result;
  result.trace.reserve(opts.num_iter);

  for (int i = 1; i <= opts.num_iter; ++i) {
    state.iteration = i;
    const IterationEval ev = evaluate_iteration(transport, visibility, y, state);
    state.f = ev.f_pos;
    result.trace.push_back({i, ev.loss, state.lambda, state.b.norm()});
    if (!std::isfinite(ev.loss)) {
      result.diverged = true;
      break;
    }
    const Gradients g = gradients(transport, visibility, y, state);
    if (opts.estimate_background) state.b -= opts.eta_b * g.b;
    state.z -= opts.eta_z * g.z;
    state.lambda = std::max(state.lambda - opts.eta_lambda * g.lambda,
                            kLambdaFloor);
  }

  result.alpha_hat.resize(k_count);
  for (int k = 0; k < k_count; ++k)
    result.alpha_hat[k] = sigmoid(state.z[k]) > opts.threshold ? 1 : 0;
  result.b_hat = opts.estimate_background ? state.b
                                          : Eigen::VectorXd::Zero(m_pixels);
  result.lambda_hat = state.lambda;
  result.f_last = state.f.size() ? state.f
                                 : Eigen::VectorXd::Zero(transport.cols());

  if (!result.diverged) {
    // Re-fit the emitter against the binarized occupancy under exact union
    // occlusion for reporting.
    const Eigen::MatrixXd a_bin =
        masked_transport(transport, visibility, result.alpha_hat);
    const auto ldlt = factor_normal(a_bin, std::max(state.lambda, kLambdaFloor));
    result.f_hat =
        ldlt.solve(a_bin.transpose() * (y - result.b_hat)).cwiseMax(0.0);
  } else {
    result.f_hat = result.f_last;
  }
  return result;
}

double vp_objective(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                    double lambda) {
  const Eigen::VectorXd f = tikhonov_solve(a, y, lambda);
  return (a * f - y).squaredNorm();
}

Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < a.cols())
    throw std::runtime_error("projection_matrix: rank-deficient input");
  Eigen::HouseholderQR<Eigen::MatrixXd> hqr(a);
  Eigen::MatrixXd q1 = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  q1 = hqr.householderQ() * q1;
  return q1 * q1.transpose();
}

LocalizeResult localize(const TransportMatrix& transport,
                        const std::vector<SparseVisibility>& visibility,
                        const VoxelGrid& grid, const PointCloud& shape,
                        const std::vector<Vec3>& candidates,
                        const Eigen::VectorXd& y) {
  if (candidates.empty())
    throw std::invalid_argument("localize: empty candidate list");
  LocalizeResult result;
  result.scores.resize(candidates.size());

  for (size_t c = 0; c < candidates.size(); ++c) {
    const auto alpha = voxelize_points(grid, translated(shape, candidates[c]));
    const Eigen::MatrixXd a_v = masked_transport(transport, visibility, alpha);
    // small-ridge projector score |A (A^T A + eps I)^-1 A^T y|^2; robust to
    // columns killed by the candidate mask
    const auto ldlt = factor_normal(a_v, kRidgeProjector);
    const Eigen::VectorXd f = ldlt.solve(a_v.transpose() * y);
    result.scores[c] = (a_v * f).squaredNorm();
  }
  result.index = 0;
  for (size_t c = 1; c < candidates.size(); ++c)
    if (result.scores[c] > result.scores[result.index])
      result.index = static_cast<int>(c);
  result.translation = candidates[result.index];
  return result;
}

namespace {

// Isotropic total variation with smoothing epsilon, forward differences,
// Neumann boundary. Returns the value; grad (same layout as f) accumulates
// d TV / d f when non-null.
double tv_eps(const Eigen::VectorXd& f, int gx, int gz, double eps,
              Eigen::VectorXd* grad) {
  double tv = 0.0;
  if (grad) grad->setZero(f.size());
  for (int iz = 0; iz < gz; ++iz)
    for (int ix = 0; ix < gx; ++ix) {
      const int idx = iz * gx + ix;
      const double dx = ix + 1 < gx ? f[idx + 1] - f[idx] : 0.0;
      const double dz = iz + 1 < gz ? f[idx + gx] - f[idx] : 0.0;
      const double mag = std::sqrt(dx * dx + dz * dz + eps * eps);
      tv += mag;
      if (grad) {
        if (ix + 1 < gx) {
          (*grad)[idx + 1] += dx / mag;
          (*grad)[idx] -= dx / mag;
        }
        if (iz + 1 < gz) {
          (*grad)[idx + gx] += dz / mag;
          (*grad)[idx] -= dz / mag;
        }
      }
    }
  return tv;
}

}  // namespace

TvResult tv_reconstruct(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                        double lambda_tv, int grid_x, int grid_z,
                        const TvOptions& opts) {
  if (lambda_tv < 0.0)
    throw std::invalid_argument("tv_reconstruct: lambda_tv must be >= 0");
  if (a.cols() != static_cast<Eigen::Index>(grid_x) * grid_z)
    throw std::invalid_argument("tv_reconstruct: grid does not match columns");
  if (y.size() != a.rows())
    throw std::invalid_argument("tv_reconstruct: measurement size mismatch");

  TvResult result;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(a.cols());

  auto objective = [&](const Eigen::VectorXd& v, Eigen::VectorXd* grad) {
    const Eigen::VectorXd r = y - a * v;
    Eigen::VectorXd tv_grad;
    const double tv = tv_eps(v, grid_x, grid_z, opts.epsilon,
                             grad ? &tv_grad : nullptr);
    const double obj = r.squaredNorm() + lambda_tv * tv * tv;
    if (grad) *grad = -2.0 * (a.transpose() * r) + 2.0 * lambda_tv * tv * tv_grad;
    return obj;
  };

  Eigen::VectorXd grad;
  double obj = objective(f, &grad);
  double step = 1.0 / std::max(grad.norm(), 1e-12);
  result.loss_trace.push_back(obj);

  bool done = false;
  for (int it = 0; it < opts.max_iter && !done; ++it) {
    bool accepted = false;
    for (int backtrack = 0; backtrack < 40; ++backtrack) {
      const Eigen::VectorXd trial = (f - step * grad).cwiseMax(0.0);
      const double trial_obj = objective(trial, nullptr);
      if (std::isfinite(trial_obj) && trial_obj <= obj) {
        const double rel = (obj - trial_obj) / std::max(obj, 1e-300);
        f = trial;
        obj = trial_obj;
        accepted = true;
        result.loss_trace.push_back(obj);
        objective(f, &grad);
        step *= 1.25;
        if (rel <= opts.rel_tol) done = true;
        break;
      }
      step *= 0.5;
    }
    // no accepted step means no descent direction at machine precision
    if (!accepted) done = true;
    if (!std::isfinite(obj)) {
      result.diverged = true;
      done = true;
    }
  }
  result.f = f;
  return result;
}

}  // namespace nlos
