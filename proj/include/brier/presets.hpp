#pragma once

#include <cstdint>

#include "brier/domain.hpp"
#include "brier/regression.hpp"
#include "brier/selfplay.hpp"

namespace brier {

// Named, frozen experiment presets so numbers are comparable across runs.

constexpr std::uint64_t kPresetSeed = 0x5eedbea7c0ffee02ULL;
constexpr double kZeta = 0.05;  // report level for the 1 - zeta statements

// Seed-generated 3 contexts x 3 actions BT instance, R_max = 1.
AlignmentInstance reference_instance();

// Number of distractors accompanying pi*_beta in the reference class (|Pi| = 16).
constexpr int kReferenceDistractors = 15;

// Hand-built 2 contexts x 2 actions general-preference instance.
AlignmentInstance selfplay_instance();

// |L| = 8 preference class containing l* of selfplay_instance().
PreferenceModelClass selfplay_model_class();

// |Pi| = 8 tabular class with near-equilibrium members and pi_ref.
FinitePolicyClass selfplay_policy_class();

// |U| = 8, |H| = 16 least-squares lab instance, h* a member of H.
RegressionInstance regression_instance();

}  // namespace brier
