#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "brier/rng.hpp"

namespace brier {

constexpr double kInfEps = std::numeric_limits<double>::infinity();

// Dense row-major tables for the finite context/action grids.
struct Table2 {
  int rows = 0, cols = 0;
  std::vector<double> v;

  Table2() = default;
  Table2(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}
  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
  std::span<const double> row(int r) const { return {v.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
  std::span<double> row(int r) { return {v.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)}; }
};

struct Table3 {
  int d0 = 0, d1 = 0, d2 = 0;
  std::vector<double> v;

  Table3() = default;
  Table3(int a, int b, int c, double fill = 0.0)
      : d0(a), d1(b), d2(c), v(static_cast<std::size_t>(a) * b * c, fill) {}
  double& at(int i, int j, int k) { return v[(static_cast<std::size_t>(i) * d1 + j) * d2 + k]; }
  double at(int i, int j, int k) const { return v[(static_cast<std::size_t>(i) * d1 + j) * d2 + k]; }
};

// Ground-truth world. Exactly one of {reward, ell_star} is present: reward for
// the Bradley-Terry mode, ell_star (antisymmetric, values in [-1,1]) for the
// general-preference mode.
struct AlignmentInstance {
  int num_contexts = 0;
  int num_actions = 0;
  std::vector<double> rho;              // context distribution, entries > 0
  Table2 pi_ref;                        // rows are simplex points, entries > 0
  std::optional<Table2> reward;         // values in [0, r_max]
  std::optional<Table3> ell_star;       // antisymmetric, values in [-1, 1]
  double r_max = 1.0;
  double v_max = 0.0;                   // computed diagnostic, not an input

  bool bt_mode() const { return reward.has_value(); }
  void validate() const;                // throws std::invalid_argument
};

struct TabularPolicy {
  Table2 probs;
  void validate() const;
};

// psi(x, a) in R^dim, stored flat.
struct FeatureMap {
  int num_contexts = 0, num_actions = 0, dim = 0;
  std::vector<double> psi;

  std::span<const double> at(int x, int a) const {
    return {psi.data() + (static_cast<std::size_t>(x) * num_actions + a) * dim,
            static_cast<std::size_t>(dim)};
  }
};

// pi_theta(a|x) = pi_ref(a|x) exp(theta . psi(x,a)) / Z_theta(x)
struct LogLinearPolicy {
  const FeatureMap* features = nullptr;
  std::vector<double> theta;
};

struct MixturePolicy {
  std::vector<TabularPolicy> members;   // uniform weights
};

using Policy = std::variant<TabularPolicy, LogLinearPolicy, MixturePolicy>;

struct FinitePolicyClass {
  std::vector<TabularPolicy> members;
};

struct LogLinearClass {
  FeatureMap features;
  std::vector<double> box_lo, box_hi;
};

struct PreferenceSample {
  int x = 0, a0 = 0, a1 = 0;
  int y = 0;  // observed bit after whatever channel applied
};

enum class PipelineTag { Clean, CorruptOnly, LDPOnly, CTL, LTC, CDPInput };

struct ObservedDataset {
  std::vector<PreferenceSample> samples;
  PipelineTag tag = PipelineTag::Clean;
  double epsilon = kInfEps;
  double alpha = 0.0;
};

double sigmoid(double z);

// BT preference probability sigma(r(x,a1) - r(x,a0)). Throws if the instance
// is not in BT mode.
double bt_preference_prob(const AlignmentInstance& inst, int x, int a1, int a0);

// (1 + ell*(x,a1,a0)) / 2 in general mode.
double general_preference_prob(const AlignmentInstance& inst, int x, int a1, int a0);

// P*(a1 > a0 | x) in whichever mode the instance carries.
double preference_prob(const AlignmentInstance& inst, int x, int a1, int a0);

// x ~ rho, a0,a1 ~ pi_ref(.|x) iid, y ~ Ber(P*).
std::vector<PreferenceSample> sample_preference_dataset(const AlignmentInstance& inst,
                                                        long n, RngStream& rng);

double policy_prob(const Policy& policy, const AlignmentInstance& inst, int x, int a);
double policy_prob(const TabularPolicy& policy, int x, int a);

// Materialize any policy as a table of conditional probabilities.
TabularPolicy to_tabular(const Policy& policy, const AlignmentInstance& inst);
TabularPolicy to_tabular(const LogLinearPolicy& policy, const Table2& pi_ref);

TabularPolicy greedy_policy(const AlignmentInstance& inst);  // per-context argmax of r*
TabularPolicy reference_policy(const AlignmentInstance& inst);

// Seed-generated instances: reward entries uniform in [0, r_max], pi_ref and
// rho rows Dirichlet(1).
AlignmentInstance generate_bt_instance(int num_contexts, int num_actions, double r_max,
                                       RngStream& rng);
AlignmentInstance generate_general_instance(int num_contexts, int num_actions,
                                            RngStream& rng);

// Instance spec file (JSON), arrays row-major.
AlignmentInstance load_instance_json(const std::string& path);
AlignmentInstance parse_instance_json(const std::string& text);
std::string instance_to_json(const AlignmentInstance& inst);

}  // namespace brier
