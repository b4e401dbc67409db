#pragma once

#include <span>
#include <vector>

#include "brier/domain.hpp"

namespace brier {

// All losses are exposed in minimization orientation.

struct SquareChiPOSpec {
  double beta = 1.0;
  double r_max = 1.0;
  double epsilon = kInfEps;  // drives the c(eps) target scaling
};

struct LogChiPOSpec {
  double beta = 1.0;
  double r_max = 1.0;
};

struct DPOSpec {
  double beta = 1.0;
};

struct CentralScoreSpec {
  double beta = 1.0;
  double r_max = 1.0;
};

struct UnlabeledTriple {
  int x = 0, a = 0, b = 0;
};

double phi(double u);        // u + log u, u > 0
double phi_prime(double u);  // 1 + 1/u
double clip(double v, double R);

double h_chipo(const TabularPolicy& policy, const Table2& pi_ref, int x, int a, int b);
double h_dpo(const TabularPolicy& policy, const Table2& pi_ref, int x, int a, int b);

// Precomputed per-pair prediction 2*sigma(clip_{2Rmax}(beta * h_chipo)) - 1,
// shared by the square losses and the fitting loops.
Table3 prediction_table(const TabularPolicy& policy, const Table2& pi_ref, double beta,
                        double r_max);

double square_chipo_loss(const TabularPolicy& policy, const Table2& pi_ref,
                         const ObservedDataset& data, const SquareChiPOSpec& spec);
double log_chipo_loss(const TabularPolicy& policy, const Table2& pi_ref,
                      const ObservedDataset& data, const LogChiPOSpec& spec);
double dpo_loss(const TabularPolicy& policy, const Table2& pi_ref, const ObservedDataset& data,
                const DPOSpec& spec);
double central_score(const TabularPolicy& policy, const Table2& pi_ref,
                     const ObservedDataset& data, const CentralScoreSpec& spec);

// (1 + 1/eta) beta h_chipo_pi - (beta/eta) h_chipo_pi_prime, antisymmetric in (a, b).
double f_beta_eta(const TabularPolicy& pi, const TabularPolicy& pi_prime, const Table2& pi_ref,
                  double beta, double eta, int x, int a, int b);

// Self-play regression loss: per-context b_t fixed for the whole iteration,
// targets r_diff(x,a,b) = ell_hat(x,a,b_t(x)) - ell_hat(x,b,b_t(x)).
double policy_opt_loss(const TabularPolicy& pi, const TabularPolicy& pi_t,
                       const Table3& ell_hat, std::span<const UnlabeledTriple> triples,
                       std::span<const int> b_t, const Table2& pi_ref, double beta, double eta);

// Analytic gradients for the log-linear class; the clip subgradient is zero
// outside the saturation range.
std::vector<double> square_chipo_loss_grad(const LogLinearPolicy& policy, const Table2& pi_ref,
                                           const ObservedDataset& data,
                                           const SquareChiPOSpec& spec);
std::vector<double> policy_opt_loss_grad(const LogLinearPolicy& pi, const TabularPolicy& pi_t,
                                         const Table3& ell_hat,
                                         std::span<const UnlabeledTriple> triples,
                                         std::span<const int> b_t, const Table2& pi_ref,
                                         double beta, double eta);

double square_chipo_loss(const LogLinearPolicy& policy, const Table2& pi_ref,
                         const ObservedDataset& data, const SquareChiPOSpec& spec);
double policy_opt_loss(const LogLinearPolicy& pi, const TabularPolicy& pi_t,
                       const Table3& ell_hat, std::span<const UnlabeledTriple> triples,
                       std::span<const int> b_t, const Table2& pi_ref, double beta, double eta);

}  // namespace brier
