#include "brier/selfplay.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "brier/solvers.hpp"

namespace brier {

void PreferenceModelClass::validate(int num_contexts, int num_actions) const {
  if (members.empty()) throw std::invalid_argument("preference class: empty");
  for (const auto& l : members) {
    if (l.d0 != num_contexts || l.d1 != num_actions || l.d2 != num_actions)
      throw std::invalid_argument("preference class: member shape mismatch");
    for (double v : l.v)
      if (!(v >= -1.0 && v <= 1.0))
        throw std::invalid_argument("preference class: value outside [-1, 1]");
  }
}

void SelfPlayConfig::validate() const {
  if (!(beta > 0.0) || !(eta > 0.0) || T < 1 || m < 1)
    throw std::invalid_argument("selfplay config: all of beta, eta, T, m must be positive");
  setting.validate();
}

SelfPlayConfig SelfPlayConfig::theorem_schedule(int T, long m, const PipelineSetting& setting) {
  SelfPlayConfig cfg;
  cfg.T = T;
  cfg.m = m;
  cfg.beta = 1.0 / std::sqrt(static_cast<double>(T));
  cfg.eta = 1.0 / static_cast<double>(T);
  cfg.setting = setting;
  cfg.validate();
  return cfg;
}

int estimate_preference_model(const ObservedDataset& data, const PreferenceModelClass& cls,
                              const PipelineSetting& setting, RngStream& rng) {
  if (data.samples.empty()) throw std::invalid_argument("estimate_preference_model: empty data");
  if (cls.members.empty()) throw std::invalid_argument("estimate_preference_model: empty class");
  const bool central = setting.central_private();
  if (central != (data.tag == PipelineTag::CDPInput))
    throw std::invalid_argument(
        "estimate_preference_model: dataset pipeline does not match the setting's branch");
  // The label z points at a1, so the unbiased regression target pairs
  // c(eps) zbar with l(x, a1, a0).
  const double c = central ? 1.0 : c_factor(setting.local_private() ? setting.epsilon : kInfEps);
  std::vector<double> scores(cls.members.size(), 0.0);
  for (std::size_t k = 0; k < cls.members.size(); ++k) {
    double loss = 0.0;
    const Table3& l = cls.members[k];
    for (const auto& s : data.samples) {
      const double r = l.at(s.x, s.a1, s.a0) - c * (2.0 * s.y - 1.0);
      loss += r * r;
    }
    scores[k] = loss;
  }
  if (central) return exp_mechanism_sample(scores, setting.epsilon, 4.0, rng);
  int best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] < scores[best]) best = static_cast<int>(k);
  return best;
}

std::vector<UnlabeledTriple> sample_unlabeled(const AlignmentInstance& inst, long m,
                                              RngStream& rng) {
  if (m < 1) throw std::invalid_argument("sample_unlabeled: m must be >= 1");
  std::vector<UnlabeledTriple> out;
  out.reserve(static_cast<std::size_t>(m));
  for (long i = 0; i < m; ++i) {
    UnlabeledTriple t;
    t.x = rng.categorical(inst.rho);
    t.a = rng.categorical(inst.pi_ref.row(t.x));
    t.b = rng.categorical(inst.pi_ref.row(t.x));
    out.push_back(t);
  }
  return out;
}

SelfPlayResult iterative_squarechipo(const AlignmentInstance& inst, const Table3& ell_hat,
                                     const FinitePolicyClass& cls, const SelfPlayConfig& cfg,
                                     RngStream& rng) {
  cfg.validate();
  if (cls.members.empty()) throw std::invalid_argument("iterative_squarechipo: empty class");
  const auto triples = sample_unlabeled(inst, cfg.m, rng);

  SelfPlayResult res;
  TabularPolicy pi_t = reference_policy(inst);
  std::vector<int> b_t(static_cast<std::size_t>(inst.num_contexts), 0);
  for (int t = 1; t <= cfg.T; ++t) {
    res.mixture.members.push_back(pi_t);
    for (int x = 0; x < inst.num_contexts; ++x)
      b_t[static_cast<std::size_t>(x)] = rng.categorical(pi_t.probs.row(x));
    FitResult fit;
    try {
      fit = fit_finite(cls, [&](const TabularPolicy& pi) {
        return policy_opt_loss(pi, pi_t, ell_hat, triples, b_t, inst.pi_ref, cfg.beta, cfg.eta);
      });
    } catch (const std::exception& e) {
      throw std::runtime_error("iterative_squarechipo: iteration " + std::to_string(t) + ": " +
                               e.what());
    }
    res.chosen_indices.push_back(fit.index);
    res.losses.push_back(fit.loss);
    const TabularPolicy& next = cls.members[static_cast<std::size_t>(fit.index)];
    for (const auto& tr : triples)
      res.max_abs_f = std::max(res.max_abs_f,
                               std::abs(f_beta_eta(next, pi_t, inst.pi_ref, cfg.beta, cfg.eta,
                                                   tr.x, tr.a, tr.b)));
    pi_t = next;
  }
  return res;
}

}  // namespace brier
