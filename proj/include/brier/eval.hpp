#pragma once

#include <vector>

#include "brier/domain.hpp"

namespace brier {

// Exact evaluators over the finite grids; Monte Carlo never enters here.

// J(pi) = E_{x ~ rho, a ~ pi}[r*(x,a)], mixtures by linearity.
double value_J(const Policy& policy, const AlignmentInstance& inst);
double value_J(const TabularPolicy& policy, const AlignmentInstance& inst);

// SG(pi_hat; comparator) = J(comparator) - J(pi_hat).
double subopt_gap(const Policy& policy, const Policy& comparator, const AlignmentInstance& inst);

// C^pi = E_pi[pi / pi_ref]; a mixture is evaluated through its own induced
// conditionals, not as an average of member coefficients.
double concentrability(const Policy& policy, const AlignmentInstance& inst);
double concentrability(const TabularPolicy& policy, const AlignmentInstance& inst);

// D_chi2(p||q) = 1/2 sum_a q(a) (p(a)/q(a) - 1)^2, so C^pi = 2 D + 1.
double chi2_divergence(std::span<const double> p, std::span<const double> q);

// kappa = e^{2 Rmax} (Vmax / Rmax) sqrt(C*).
double kappa(double c_star, double v_max, double r_max);

// Smallest admissible implicit-reward bound for a finite class:
// max(r_max, max_{pi, x, a, b} |beta h_chipo|).
double class_v_max(const FinitePolicyClass& cls, const Table2& pi_ref, double beta,
                   double r_max);

// err_stat^2 = E_{pi_ref x pi_ref}[(clip_{2Rmax} dhat - clip_{2Rmax} d*)^2]
// with dhat(x,a,b) = beta (phi(pi/pi_ref)(x,a) - phi(pi/pi_ref)(x,b)).
double err_stat(const TabularPolicy& pi_hat, const AlignmentInstance& inst, double beta,
                double r_max);

// l*(pi, pi') = E_{x, a ~ pi, b ~ pi'}[l*(x,a,b)], bilinear in the policies.
double ell_value(const Policy& pi, const Policy& pi_prime, const AlignmentInstance& inst);
double ell_value(const TabularPolicy& pi, const TabularPolicy& pi_prime,
                 const AlignmentInstance& inst);

// DG(pi_hat) = max_{pi in Pi} l*(pi, pi_hat) - min_{pi in Pi} l*(pi_hat, pi).
double duality_gap(const Policy& policy, const AlignmentInstance& inst,
                   const FinitePolicyClass& cls);

struct GameSolution {
  std::vector<double> row_mix, col_mix;
  double value = 0.0;
  double gap = 0.0;  // exact exploitability certificate
  int iters = 0;
};

// Zero-sum game on payoff M (row maximizes): optimistic multiplicative weights
// self-play with iterate averaging; the certificate is always recomputed
// exactly from M. A purification pass snaps to pure strategies when that does
// not hurt the certificate.
GameSolution solve_matrix_game(const Table2& payoff, int max_iters, double tol);

// Mix a finite class by explicit weights into one tabular policy.
TabularPolicy mix_policy(const FinitePolicyClass& cls, std::span<const double> weights);

// C_uni = max_{pi in Pi, x, a, b} pi(a|x) pi_mw(b|x) / (pi_ref(a|x) pi_ref(b|x)).
double unilateral_concentrability(const FinitePolicyClass& cls, const AlignmentInstance& inst,
                                  const TabularPolicy& pi_mw);

// Membership in Pi_C: max_x D_chi2(pi(.|x) || pi_ref(.|x)) <= C.
bool in_pi_c(const TabularPolicy& policy, const AlignmentInstance& inst, double c_bound);

// subopt(pi_hat, C) = max_{pi in Pi} l*(pi, pi_hat) - max_{pi in Pi_C} l*(pi, pi_hat).
// Throws if Pi_C is empty (undefined, never silently infinite).
double subopt_C(const Policy& policy, const AlignmentInstance& inst,
                const FinitePolicyClass& cls, double c_bound);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual in log space
};

// OLS of log(value) on log(n); needs >= 3 points with positive values.
RateFit rate_fit(std::span<const std::pair<double, double>> points);

}  // namespace brier
