#include "lriso/lrr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "lriso/csv.hpp"
#include "lriso/errors.hpp"
#include "lriso/kernels.hpp"
#include "lriso/spectral.hpp"

namespace lriso {

void LrrConfig::validate() const {
  if (!(beta >= 0.0) || !(lambda_err > 0.0)) throw ArgumentError("LRR weights must be positive");
  if (!(mu0 > 0.0) || !(mu_max >= mu0)) throw ArgumentError("LRR penalty must satisfy 0 < mu0 <= mu_max");
  if (!(rho0 >= 1.0)) throw ArgumentError("LRR rho0 must be >= 1");
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw ArgumentError("LRR tolerances must be positive");
  if (max_iter < 1) throw ArgumentError("LRR max_iter must be >= 1");
  if (!(eta1_slack > 1.0)) throw ArgumentError("LRR eta1 slack must exceed 1");
}

double spectral_norm(const Matrix& s, double tol, int max_iter) {
  if (s.size() == 0) return 0.0;
  Vector v = Vector::Constant(s.cols(), 1.0 / std::sqrt(static_cast<double>(s.cols())));
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = s.transpose() * (s * v);
    double next = w.norm();
    if (next == 0.0) {
      if (it > 0 || s.norm() == 0.0) return 0.0;
      // start vector in the null space: switch to a deterministic alternative
      for (Index k = 0; k < v.size(); ++k) v(k) = std::cos(1.0 + 0.37 * static_cast<double>(k));
      v.normalize();
      continue;
    }
    v = w / next;
    if (std::abs(next - lambda) <= tol * next) return std::sqrt(next);
    lambda = next;
  }
  return std::sqrt(lambda);
}

double eta1_for(double mu, double s_norm_sq, const LrrConfig& cfg) {
  return cfg.eta1_slack * mu * (1.0 + s_norm_sq);
}

LrrState initial_state(const Matrix& s, const LrrConfig& cfg) {
  const Index n = s.cols();
  LrrState state;
  state.z = Matrix::Identity(n, n);
  state.j = Matrix::Identity(n, n);
  state.e = Matrix::Zero(s.rows(), n);
  state.m1 = Matrix::Zero(s.rows(), n);
  state.m2 = Matrix::Zero(n, n);
  state.mu = cfg.mu0;
  const double norm = spectral_norm(s);
  state.s_norm_sq = norm * norm;
  state.eta1 = eta1_for(state.mu, state.s_norm_sq, cfg);
  state.z_prev = state.z;
  state.j_prev = state.j;
  state.e_prev = state.e;
  return state;
}

void z_step(LrrState& state, const Matrix& s, const LrrConfig&) {
  const double mu = state.mu;
  const Matrix r1 = s - s * state.z - state.e + state.m1 / mu;
  const Matrix r2 = state.z - state.j + state.m2 / mu;
  const Matrix gradient = mu * (-(s.transpose() * r1) + r2);
  state.z_prev = state.z;
  Vector shrunk;
  state.z = svt(state.z - gradient / state.eta1, 1.0 / state.eta1, &shrunk);
  state.z_nuclear = shrunk.sum();
}

void j_step(LrrState& state, const LrrConfig& cfg) {
  const Matrix target = state.z + state.m2 / state.mu;
  state.j_prev = state.j;
  state.j.resize(target.rows(), target.cols());
  kernels::active().nonneg_soft_threshold(target.data(), state.j.data(), static_cast<std::size_t>(target.size()),
                                          cfg.beta / state.mu);
}

void e_step(LrrState& state, const Matrix& s, const LrrConfig& cfg) {
  const Matrix target = s - s * state.z + state.m1 / state.mu;
  state.e_prev = state.e;
  state.e.resize(target.rows(), target.cols());
  kernels::active().soft_threshold(target.data(), state.e.data(), static_cast<std::size_t>(target.size()),
                                   cfg.lambda_err / state.mu);
}

void dual_step(LrrState& state, const Matrix& s, const LrrConfig& cfg) {
  const double mu = state.mu;
  const Matrix primal = s - s * state.z - state.e;
  state.m1 += mu * primal;
  state.m2 += mu * (state.z - state.j);

  state.last_step = std::max({state.eta1 * (state.z - state.z_prev).norm(), mu * (state.j - state.j_prev).norm(),
                              mu * (state.e - state.e_prev).norm()});
  const double rho = state.last_step <= cfg.eps2 ? cfg.rho0 : 1.0;
  state.mu = std::min(cfg.mu_max, rho * mu);
  state.eta1 = eta1_for(state.mu, state.s_norm_sq, cfg);
  ++state.k;

  const double s_norm = s.norm();
  state.trace.push_back({state.k, primal.norm() / s_norm, state.last_step, state.mu, state.z_nuclear});
}

double relative_residual(const LrrState& state, const Matrix& s) {
  return (s - s * state.z - state.e).norm() / s.norm();
}

bool check_convergence(const LrrState& state, const Matrix& s, const LrrConfig& cfg) {
  return relative_residual(state, s) < cfg.eps1 && state.last_step <= cfg.eps2;
}

LrrSolution lrr_solve(const Matrix& s, const LrrConfig& cfg) {
  cfg.validate();
  if (!s.allFinite()) throw ArgumentError("LRR input must be finite");
  if (s.size() == 0 || s.norm() == 0.0) throw ArgumentError("LRR input must be a nonzero matrix");

  LrrState state = initial_state(s, cfg);
  LrrSolution solution;
  while (state.k < cfg.max_iter) {
    z_step(state, s, cfg);
    j_step(state, cfg);
    e_step(state, s, cfg);
    dual_step(state, s, cfg);
    if (check_convergence(state, s, cfg)) {
      solution.converged = true;
      break;
    }
  }
  solution.iterations = state.k;
  solution.final_residual = relative_residual(state, s);
  solution.effective_rank = effective_rank(state.z, 1e-3);
  solution.z = std::move(state.z);
  solution.e = std::move(state.e);
  solution.trace = std::move(state.trace);
  return solution;
}

void write_trace_csv(const std::vector<LrrTraceEntry>& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write '" + path.string() + "'");
  out << "k,residual,step_max,mu\n";
  for (const auto& row : trace) {
    out << row.k << ',' << csv::format_double(row.residual) << ',' << csv::format_double(row.step_max) << ','
        << csv::format_double(row.mu) << '\n';
  }
}

}  // namespace lriso
