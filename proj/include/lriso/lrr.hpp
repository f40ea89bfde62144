#pragma once

#include <filesystem>
#include <vector>

#include "lriso/types.hpp"

namespace lriso {

// Non-negative sparse low-rank representation
//
//   min ||Z||_* + beta ||Z||_1 + lambda ||E||_1   s.t.  S = S Z + E,  Z >= 0
//
// solved by linearized ADMM with adaptive penalty on the split Z = J.
struct LrrConfig {
  double beta = 1.0;         // weight of ||Z||_1, thresholds J
  double lambda_err = 0.02;  // weight of ||E||_1, thresholds E
  double mu0 = 1e-6;
  double mu_max = 1e6;
  double rho0 = 2.5;
  double eps1 = 1e-6;        // relative primal residual tolerance
  double eps2 = 1e-2;        // step tolerance, also gates penalty growth
  int max_iter = 1000;
  double eta1_slack = 1.02;  // eta1 = slack * mu * (1 + ||S||_2^2)

  // Throws ArgumentError on non-positive weights or slack <= 1.
  void validate() const;
};

struct LrrTraceEntry {
  int k;
  double residual;  // ||S - SZ - E||_F / ||S||_F
  double step_max;  // max(eta1 ||dZ||, mu ||dJ||, mu ||dE||) with pre-update mu
  double mu;        // penalty after the update
  double nuclear;   // ||Z||_*
};

struct LrrState {
  Matrix z, j, e, m1, m2;
  double mu = 0.0;
  double eta1 = 0.0;
  double s_norm_sq = 0.0;  // ||S||_2^2
  int k = 0;

  // previous iterates, for the step criterion
  Matrix z_prev, j_prev, e_prev;
  double last_step = 0.0;
  double z_nuclear = 0.0;  // ||Z||_* from the last z_step
  std::vector<LrrTraceEntry> trace;
};

struct LrrSolution {
  Matrix z;
  Matrix e;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
  Index effective_rank = 0;  // singular values of z above 1e-3 sigma_max
  std::vector<LrrTraceEntry> trace;
};

// Largest singular value by power iteration on S^T S.
double spectral_norm(const Matrix& s, double tol = 1e-8, int max_iter = 10000);

double eta1_for(double mu, double s_norm_sq, const LrrConfig& cfg);

// Z = J = I, E = M1 = M2 = 0, mu = mu0.
LrrState initial_state(const Matrix& s, const LrrConfig& cfg);

// Z <- SVT_{1/eta1}(Z - grad q(Z) / eta1).
void z_step(LrrState& state, const Matrix& s, const LrrConfig& cfg);
// J <- max(S_{beta/mu}(Z + M2 / mu), 0).
void j_step(LrrState& state, const LrrConfig& cfg);
// E <- S_{lambda/mu}(S - SZ + M1 / mu).
void e_step(LrrState& state, const Matrix& s, const LrrConfig& cfg);
// Multiplier ascent, adaptive mu and eta1 refresh; records the step size.
void dual_step(LrrState& state, const Matrix& s, const LrrConfig& cfg);

double relative_residual(const LrrState& state, const Matrix& s);
bool check_convergence(const LrrState& state, const Matrix& s, const LrrConfig& cfg);

LrrSolution lrr_solve(const Matrix& s, const LrrConfig& cfg = {});

// `k,residual,step_max,mu` per iteration.
void write_trace_csv(const std::vector<LrrTraceEntry>& trace, const std::filesystem::path& path);

}  // namespace lriso
