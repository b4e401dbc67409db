#pragma once

#include <functional>
#include <vector>

#include "brier/domain.hpp"
#include "brier/objectives.hpp"
#include "brier/rng.hpp"

namespace brier {

struct GDConfig {
  enum class Schedule { Constant, InvSqrt };
  Schedule schedule = Schedule::Constant;
  double step = 0.1;
  int max_iters = 2000;
  double grad_tol = 1e-8;
  std::vector<double> box_lo, box_hi;  // projection bounds, sized like theta
};

struct FitResult {
  int index = 0;
  double loss = 0.0;
};

// Exhaustive argmin over a finite class, lowest-index tie break.
FitResult fit_finite(const FinitePolicyClass& cls,
                     const std::function<double(const TabularPolicy&)>& loss);

struct GDResult {
  std::vector<double> theta;
  std::vector<double> loss_trajectory;
  int iters = 0;
};

// Full-batch projected gradient descent on the box.
GDResult fit_loglinear(const LogLinearClass& cls,
                       const std::function<double(const std::vector<double>&)>& loss,
                       const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                       const GDConfig& cfg, std::vector<double> theta0);

// Exponential-mechanism policy selection with sensitivity 4.
int sample_policy_cdp(const FinitePolicyClass& cls, const Table2& pi_ref,
                      const ObservedDataset& data, const CentralScoreSpec& spec, double epsilon,
                      RngStream& rng);

// Inverse of u + log u on (0, inf); Newton with a bisection bracket.
double phi_inverse(double v);

// Optimal policy of the mixed chi^2 regularized objective, from the per-context
// stationarity equation r(x,a) = beta phi(p / pi_ref) + Z(x): outer bisection
// on Z, inner phi_inverse.
TabularPolicy solve_pi_beta_star(const AlignmentInstance& inst, double beta);

// {pi*_beta} at index 0 plus Dirichlet-mixed distractors, entries positive.
FinitePolicyClass build_realizable_class(const AlignmentInstance& inst, double beta,
                                         int num_distractors, RngStream& rng);

// beta = sqrt(2 / C*) * V_max * err_stat / R_max, floored for err_stat = 0.
double oracle_beta(double c_star, double err_stat, double v_max, double r_max);

constexpr double kOracleBetaFloor = 1e-4;

}  // namespace brier
