#pragma once

#include <span>
#include <string>
#include <vector>

#include "brier/domain.hpp"
#include "brier/rng.hpp"

namespace brier {

// Per-sample Huber channel B_i. All three kinds are memoryless functions of
// the current sample; Flip is the default strong choice.
enum class AdversaryKind { Flip, ConstantLabel, BernoulliQ };

struct Adversary {
  AdversaryKind kind = AdversaryKind::Flip;
  int constant = 1;   // ConstantLabel output
  double q = 0.5;     // BernoulliQ parameter

  int draw(int current_label, RngStream& rng) const;
  void validate() const;
};

enum class SettingKind { Clean, CorruptOnly, LDPOnly, CTL, LTC, CDP };

struct PipelineSetting {
  SettingKind kind = SettingKind::Clean;
  double epsilon = kInfEps;   // kInfEps is an exact no-noise sentinel
  double alpha = 0.0;
  Adversary adversary;

  void validate() const;
  PipelineTag tag() const;
  bool corrupts() const;
  bool local_private() const;     // an RR stage applies
  bool central_private() const;   // privacy comes from the learner's mechanism
  std::string name() const;
};

PipelineSetting parse_setting(const std::string& kind, double epsilon, double alpha,
                              const Adversary& adversary);

// e^eps / (1 + e^eps); 1 for the infinity sentinel.
double rr_keep_prob(double epsilon);

// Randomized response on one bit.
int randomized_response(int y, double epsilon, RngStream& rng);

// With probability alpha, replace the label by the adversary's draw.
int huber_corrupt_bit(int label, double alpha, const Adversary& adversary, RngStream& rng);
int huber_corrupt(const PreferenceSample& sample, double alpha, const Adversary& adversary,
                  RngStream& rng);

// Clean labels in, observed labels out, per the setting's stage order.
ObservedDataset apply_pipeline(const std::vector<PreferenceSample>& dataset,
                               const PipelineSetting& setting, RngStream& rng);

// Debiasing factor c(eps) = (e^eps + 1) / (e^eps - 1); 1 at infinity.
double c_factor(double epsilon);

// Closed-form marginal P(z=1) given the clean P(y=1), for channel-order
// arithmetic checks.
double pipeline_marginal_one(double p_clean, const PipelineSetting& setting);

// Exponential mechanism with score sensitivity delta: P(i) proportional to
// exp(-eps * scores[i] / (2 delta)), computed with a max-shift.
std::vector<double> exp_mechanism_probs(std::span<const double> scores, double epsilon,
                                        double delta);
int exp_mechanism_sample(std::span<const double> scores, double epsilon, double delta,
                         RngStream& rng);

}  // namespace brier
