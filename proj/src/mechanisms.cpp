#include "brier/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brier {

void Adversary::validate() const {
  if (kind == AdversaryKind::ConstantLabel && constant != 0 && constant != 1)
    throw std::invalid_argument("adversary: constant label must be 0 or 1");
  if (kind == AdversaryKind::BernoulliQ && (q < 0.0 || q > 1.0))
    throw std::invalid_argument("adversary: q outside [0,1]");
}

int Adversary::draw(int current_label, RngStream& rng) const {
  switch (kind) {
    case AdversaryKind::Flip:
      return 1 - current_label;
    case AdversaryKind::ConstantLabel:
      return constant;
    case AdversaryKind::BernoulliQ:
      return rng.bernoulli(q) ? 1 : 0;
  }
  throw std::logic_error("adversary: unknown kind");
}

void PipelineSetting::validate() const {
  adversary.validate();
  if (alpha < 0.0 || alpha > 0.5)
    throw std::invalid_argument("setting: alpha outside [0, 1/2]");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("setting: epsilon must be positive (or the infinity sentinel)");
  if (kind == SettingKind::CorruptOnly && alpha <= 0.0)
    throw std::invalid_argument("setting: corrupt-only requires alpha > 0");
}

PipelineTag PipelineSetting::tag() const {
  switch (kind) {
    case SettingKind::Clean: return PipelineTag::Clean;
    case SettingKind::CorruptOnly: return PipelineTag::CorruptOnly;
    case SettingKind::LDPOnly: return PipelineTag::LDPOnly;
    case SettingKind::CTL: return PipelineTag::CTL;
    case SettingKind::LTC: return PipelineTag::LTC;
    case SettingKind::CDP: return PipelineTag::CDPInput;
  }
  throw std::logic_error("setting: unknown kind");
}

bool PipelineSetting::corrupts() const {
  return kind == SettingKind::CorruptOnly || kind == SettingKind::CTL ||
         kind == SettingKind::LTC || kind == SettingKind::CDP;
}

bool PipelineSetting::local_private() const {
  return kind == SettingKind::LDPOnly || kind == SettingKind::CTL || kind == SettingKind::LTC;
}

bool PipelineSetting::central_private() const { return kind == SettingKind::CDP; }

std::string PipelineSetting::name() const {
  switch (kind) {
    case SettingKind::Clean: return "clean";
    case SettingKind::CorruptOnly: return "corrupt_only";
    case SettingKind::LDPOnly: return "ldp_only";
    case SettingKind::CTL: return "ctl";
    case SettingKind::LTC: return "ltc";
    case SettingKind::CDP: return "cdp";
  }
  throw std::logic_error("setting: unknown kind");
}

PipelineSetting parse_setting(const std::string& kind, double epsilon, double alpha,
                              const Adversary& adversary) {
  PipelineSetting s;
  if (kind == "clean") s.kind = SettingKind::Clean;
  else if (kind == "corrupt_only") s.kind = SettingKind::CorruptOnly;
  else if (kind == "ldp_only") s.kind = SettingKind::LDPOnly;
  else if (kind == "ctl") s.kind = SettingKind::CTL;
  else if (kind == "ltc") s.kind = SettingKind::LTC;
  else if (kind == "cdp") s.kind = SettingKind::CDP;
  else throw std::invalid_argument("setting: unknown kind '" + kind + "'");
  s.epsilon = epsilon;
  s.alpha = alpha;
  s.adversary = adversary;
  s.validate();
  return s;
}

double rr_keep_prob(double epsilon) {
  if (std::isinf(epsilon)) return 1.0;
  if (!(epsilon >= 0.0)) throw std::invalid_argument("rr_keep_prob: epsilon must be >= 0");
  const double e = std::exp(epsilon);
  return e / (1.0 + e);
}

int randomized_response(int y, double epsilon, RngStream& rng) {
  if (y != 0 && y != 1) throw std::invalid_argument("randomized_response: y must be a bit");
  if (std::isinf(epsilon)) return y;
  if (!(epsilon > 0.0)) throw std::invalid_argument("randomized_response: epsilon must be positive");
  return rng.bernoulli(rr_keep_prob(epsilon)) ? y : 1 - y;
}

int huber_corrupt_bit(int label, double alpha, const Adversary& adversary, RngStream& rng) {
  if (alpha < 0.0 || alpha > 0.5)
    throw std::invalid_argument("huber_corrupt: alpha outside [0, 1/2]");
  if (alpha > 0.0 && rng.bernoulli(alpha)) return adversary.draw(label, rng);
  return label;
}

int huber_corrupt(const PreferenceSample& sample, double alpha, const Adversary& adversary,
                  RngStream& rng) {
  return huber_corrupt_bit(sample.y, alpha, adversary, rng);
}

ObservedDataset apply_pipeline(const std::vector<PreferenceSample>& dataset,
                               const PipelineSetting& setting, RngStream& rng) {
  setting.validate();
  ObservedDataset out;
  out.tag = setting.tag();
  out.epsilon = setting.local_private() ? setting.epsilon : kInfEps;
  out.alpha = setting.corrupts() ? setting.alpha : 0.0;
  out.samples = dataset;
  for (auto& s : out.samples) {
    switch (setting.kind) {
      case SettingKind::Clean:
        break;
      case SettingKind::CorruptOnly:
      case SettingKind::CDP:
        s.y = huber_corrupt(s, setting.alpha, setting.adversary, rng);
        break;
      case SettingKind::LDPOnly:
        s.y = randomized_response(s.y, setting.epsilon, rng);
        break;
      case SettingKind::CTL:
        s.y = huber_corrupt(s, setting.alpha, setting.adversary, rng);
        s.y = randomized_response(s.y, setting.epsilon, rng);
        break;
      case SettingKind::LTC:
        s.y = randomized_response(s.y, setting.epsilon, rng);
        s.y = huber_corrupt(s, setting.alpha, setting.adversary, rng);
        break;
    }
  }
  return out;
}

double c_factor(double epsilon) {
  if (std::isinf(epsilon)) return 1.0;
  if (!(epsilon > 0.0)) throw std::invalid_argument("c_factor: epsilon must be positive");
  const double e = std::exp(epsilon);
  return (e + 1.0) / (e - 1.0);
}

namespace {

// Marginal through one corruption stage; Flip and ConstantLabel are
// deterministic functions of the incoming label, BernoulliQ ignores it.
double corrupt_marginal_one(double p, double alpha, const Adversary& adv) {
  double bad = 0.0;
  switch (adv.kind) {
    case AdversaryKind::Flip: bad = 1.0 - p; break;
    case AdversaryKind::ConstantLabel: bad = static_cast<double>(adv.constant); break;
    case AdversaryKind::BernoulliQ: bad = adv.q; break;
  }
  return (1.0 - alpha) * p + alpha * bad;
}

double rr_marginal_one(double p, double epsilon) {
  const double keep = rr_keep_prob(epsilon);
  return keep * p + (1.0 - keep) * (1.0 - p);
}

}  // namespace

double pipeline_marginal_one(double p_clean, const PipelineSetting& setting) {
  switch (setting.kind) {
    case SettingKind::Clean: return p_clean;
    case SettingKind::CorruptOnly:
    case SettingKind::CDP:
      return corrupt_marginal_one(p_clean, setting.alpha, setting.adversary);
    case SettingKind::LDPOnly: return rr_marginal_one(p_clean, setting.epsilon);
    case SettingKind::CTL:
      return rr_marginal_one(corrupt_marginal_one(p_clean, setting.alpha, setting.adversary),
                             setting.epsilon);
    case SettingKind::LTC:
      return corrupt_marginal_one(rr_marginal_one(p_clean, setting.epsilon), setting.alpha,
                                  setting.adversary);
  }
  throw std::logic_error("pipeline_marginal_one: unknown kind");
}

std::vector<double> exp_mechanism_probs(std::span<const double> scores, double epsilon,
                                        double delta) {
  if (scores.empty()) throw std::invalid_argument("exp_mechanism: empty score list");
  if (!(delta > 0.0)) throw std::invalid_argument("exp_mechanism: sensitivity must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("exp_mechanism: epsilon must be positive");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("exp_mechanism: non-finite score");
  const double scale = epsilon / (2.0 * delta);
  const double best = *std::min_element(scores.begin(), scores.end());
  std::vector<double> probs(scores.size());
  double z = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(-scale * (scores[i] - best));
    z += probs[i];
  }
  for (auto& p : probs) p /= z;
  return probs;
}

int exp_mechanism_sample(std::span<const double> scores, double epsilon, double delta,
                         RngStream& rng) {
  const auto probs = exp_mechanism_probs(scores, epsilon, delta);
  return rng.categorical(probs);
}

}  // namespace brier
