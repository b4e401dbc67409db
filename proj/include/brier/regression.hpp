#pragma once

#include <cstdint>
#include <vector>

#include "brier/mechanisms.hpp"
#include "brier/rng.hpp"

namespace brier {

// Least-squares lab on a finite feature domain with +/-1 labels.

struct RegressionInstance {
  std::vector<double> rho_prime;            // distribution over U, entries > 0
  std::vector<double> h_star;               // target, values in [-1, 1]
  std::vector<std::vector<double>> H;       // finite hypothesis class, h* a member

  int domain_size() const { return static_cast<int>(rho_prime.size()); }
  void validate() const;                    // throws std::invalid_argument
};

struct RegSample {
  int u = 0;
  int y = 0;  // +/-1 view of the label
};

// u ~ rho', y = +1 with probability (1 + h*(u)) / 2.
std::vector<RegSample> gen_regression_data(const RegressionInstance& inst, long n,
                                           RngStream& rng);

// Route the +/-1 labels through the bit channel of the setting.
std::vector<RegSample> apply_reg_channel(const std::vector<RegSample>& data,
                                         const PipelineSetting& setting, RngStream& rng);

// argmin_h sum_i (h(u_i) - c(eps) z'_i)^2, lowest-index tie break.
int fit_ls_local(const std::vector<RegSample>& data, const RegressionInstance& inst,
                 double epsilon);

// Exponential mechanism over L(h) = sum_i (h(u_i) - ybar'_i)^2 with Delta = 4.
int fit_ls_cdp(const std::vector<RegSample>& data, const RegressionInstance& inst,
               double epsilon, RngStream& rng);

// err2_gen = sum_u rho'(u) (h(u) - h*(u))^2, exact.
double gen_error(int h_index, const RegressionInstance& inst);

struct RegCurvePoint {
  long n = 0;
  double mean_err2 = 0.0;
  double stderr_err2 = 0.0;
  std::vector<double> errs;  // per-seed exact errors, seed order
};

// For each n in the grid run num_seeds independent (data, channel, fit) cells
// and record the exact generalization error. Streams are derived from the
// cell parameters, so grids can be extended without perturbing old cells.
std::vector<RegCurvePoint> bound_curve_experiment(const RegressionInstance& inst,
                                                  const PipelineSetting& setting,
                                                  const std::vector<long>& n_grid,
                                                  int num_seeds, std::uint64_t master_seed);

}  // namespace brier
