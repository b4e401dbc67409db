#pragma once

#include <vector>

#include "brier/domain.hpp"
#include "brier/mechanisms.hpp"
#include "brier/objectives.hpp"
#include "brier/rng.hpp"

namespace brier {

// Finite class of preference functions l(x, a, b) in [-1, 1].
struct PreferenceModelClass {
  std::vector<Table3> members;
  void validate(int num_contexts, int num_actions) const;
};

struct SelfPlayConfig {
  double beta = 1.0;
  double eta = 1.0;
  int T = 1;
  long m = 1;  // unlabeled-triple budget
  PipelineSetting setting;

  void validate() const;
  // Theorem schedules beta = 1/sqrt(T), eta = 1/T.
  static SelfPlayConfig theorem_schedule(int T, long m, const PipelineSetting& setting);
};

// Local branch: argmin_l sum (l(x, a0, a1) - c(eps) zbar)^2.
// Central branch (cDP setting): exponential mechanism with Delta = 4.
// The dataset's pipeline tag must match the branch the setting implies.
int estimate_preference_model(const ObservedDataset& data, const PreferenceModelClass& cls,
                              const PipelineSetting& setting, RngStream& rng);

// x ~ rho, a ~ pi_ref(x), b ~ pi_ref(x), i.i.d.
std::vector<UnlabeledTriple> sample_unlabeled(const AlignmentInstance& inst, long m,
                                              RngStream& rng);

struct SelfPlayResult {
  MixturePolicy mixture;            // unif({pi^1 .. pi^T})
  std::vector<int> chosen_indices;  // per-iteration argmin index into Pi
  std::vector<double> losses;       // per-iteration minimal L_t value
  double max_abs_f = 0.0;           // largest |f^{beta,eta}| seen (Assumption audit)
};

// Iterative Square-chiPO: D_x sampled once, T rounds of per-context b_t draws
// and finite-class regression on the clip_4 targets.
SelfPlayResult iterative_squarechipo(const AlignmentInstance& inst, const Table3& ell_hat,
                                     const FinitePolicyClass& cls, const SelfPlayConfig& cfg,
                                     RngStream& rng);

}  // namespace brier
