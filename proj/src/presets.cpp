#include "brier/presets.hpp"

#include <cmath>

#include "brier/rng.hpp"

namespace brier {

AlignmentInstance reference_instance() {
  RngStream rng(derive_stream_id(kPresetSeed, stable_hash("reference-bt-3x3"), "instance"));
  AlignmentInstance inst = generate_bt_instance(3, 3, 1.0, rng);
  return inst;
}

namespace {

// Per-context preference strengths: l*(x, 0, 1) = g_x. Context 0 favours
// action 0, context 1 favours action 1.
constexpr double kG0 = 0.6;
constexpr double kG1 = -0.4;

Table3 make_pref(double g0, double g1) {
  Table3 l(2, 2, 2, 0.0);
  l.at(0, 0, 1) = g0;
  l.at(0, 1, 0) = -g0;
  l.at(1, 0, 1) = g1;
  l.at(1, 1, 0) = -g1;
  return l;
}

// Ladder positions for the policy class, as multiples of the per-context
// preference strength in implicit-reward units. The spacing keeps each rung
// within reach of the previous one under the theorem schedules (the fit's
// pull target moves by at most ~2/T of the remaining distance per round), so
// the iterates climb to the absorbing top rung instead of stalling at pi_ref.
// The negative rungs are wrong-side members a misestimated model can drive
// the iterates toward.
constexpr double kLadder[] = {0.33, 0.62, 0.85, 1.0, -0.2, -0.4, -0.8};

// Winner probability at implicit-reward level v: root of 4p - 2 + log(p/(1-p)) = v
// (the two-action stationarity equation with a uniform reference).
double winner_prob(double v) {
  double lo = 1e-9, hi = 1.0 - 1e-9;
  for (int i = 0; i < 200; ++i) {
    const double p = 0.5 * (lo + hi);
    (4.0 * p - 2.0 + std::log(p / (1.0 - p)) < v ? lo : hi) = p;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

AlignmentInstance selfplay_instance() {
  AlignmentInstance inst;
  inst.num_contexts = 2;
  inst.num_actions = 2;
  inst.rho = {0.5, 0.5};
  inst.pi_ref = Table2(2, 2, 0.5);
  inst.ell_star = make_pref(kG0, kG1);
  inst.r_max = 1.0;
  inst.v_max = 2.0;
  inst.validate();
  return inst;
}

PreferenceModelClass selfplay_model_class() {
  PreferenceModelClass cls;
  cls.members.push_back(make_pref(kG0, kG1));  // l*
  // Distractors sit close enough to l* that small samples misselect them; the
  // weakened-context-0 members make the policy iterates stall near pi_ref.
  const double grid[][2] = {
      {0.32, kG1}, {0.28, kG1}, {0.24, kG1}, {kG0, kG1 + 0.25},
      {kG0, kG1 - 0.25}, {0.20, 0.20}, {-0.30, 0.30},
  };
  for (const auto& g : grid) cls.members.push_back(make_pref(g[0], g[1]));
  cls.validate(2, 2);
  return cls;
}

FinitePolicyClass selfplay_policy_class() {
  FinitePolicyClass cls;
  cls.members.push_back(TabularPolicy{Table2(2, 2, 0.5)});  // pi_ref
  for (const double u : kLadder) {
    const double p0 = winner_prob(kG0 * u);   // context 0 winner = action 0
    const double p1 = winner_prob(-kG1 * u);  // context 1 winner = action 1
    TabularPolicy pi{Table2(2, 2)};
    pi.probs.at(0, 0) = p0;
    pi.probs.at(0, 1) = 1.0 - p0;
    pi.probs.at(1, 0) = 1.0 - p1;
    pi.probs.at(1, 1) = p1;
    cls.members.push_back(std::move(pi));
  }
  return cls;
}

RegressionInstance regression_instance() {
  RegressionInstance inst;
  inst.rho_prime.assign(8, 0.125);
  inst.h_star = {0.8, -0.6, 0.4, -0.2, 0.6, -0.8, 0.2, -0.4};
  inst.H.push_back(inst.h_star);
  // 15 distractors shrunk toward zero on alternating halves of the domain,
  // with a geometric spectrum of exact generalization errors from 0.25 down
  // to 0.001 so misselection decays smoothly in n.
  const double ratio = std::pow(0.004, 1.0 / 14.0);
  double d2 = 0.25;
  for (int k = 1; k <= 15; ++k) {
    const double t = std::sqrt(2.0 * d2);
    std::vector<double> h = inst.h_star;
    for (int u = 0; u < 8; ++u)
      if ((u + k) % 2 == 0) h[static_cast<std::size_t>(u)] -= t * (h[u] > 0.0 ? 1.0 : -1.0);
    inst.H.push_back(std::move(h));
    d2 *= ratio;
  }
  inst.validate();
  return inst;
}

}  // namespace brier
