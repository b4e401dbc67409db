#include "brier/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace brier {

namespace {

void check_simplex(std::span<const double> p, const char* what, bool strict_positive) {
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0 || (strict_positive && x <= 0.0))
      throw std::invalid_argument(std::string(what) + ": entry not positive");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(what) + ": row does not sum to 1");
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void AlignmentInstance::validate() const {
  if (num_contexts <= 0 || num_actions <= 0)
    throw std::invalid_argument("instance: dimensions must be positive");
  if (r_max <= 0.0) throw std::invalid_argument("instance: r_max must be positive");
  if (static_cast<int>(rho.size()) != num_contexts)
    throw std::invalid_argument("instance: rho size mismatch");
  check_simplex(rho, "rho", true);
  if (pi_ref.rows != num_contexts || pi_ref.cols != num_actions)
    throw std::invalid_argument("instance: pi_ref shape mismatch");
  for (int x = 0; x < num_contexts; ++x) check_simplex(pi_ref.row(x), "pi_ref", true);
  if (reward.has_value() == ell_star.has_value())
    throw std::invalid_argument("instance: exactly one of reward/ell_star must be present");
  if (reward) {
    if (reward->rows != num_contexts || reward->cols != num_actions)
      throw std::invalid_argument("instance: reward shape mismatch");
    for (double r : reward->v)
      if (r < 0.0 || r > r_max)
        throw std::invalid_argument("instance: reward outside [0, r_max]");
  }
  if (ell_star) {
    if (ell_star->d0 != num_contexts || ell_star->d1 != num_actions || ell_star->d2 != num_actions)
      throw std::invalid_argument("instance: ell_star shape mismatch");
    for (int x = 0; x < num_contexts; ++x)
      for (int a = 0; a < num_actions; ++a)
        for (int b = 0; b < num_actions; ++b) {
          const double l = ell_star->at(x, a, b);
          if (l < -1.0 || l > 1.0)
            throw std::invalid_argument("instance: ell_star outside [-1, 1]");
          if (std::abs(l + ell_star->at(x, b, a)) > 1e-12)
            throw std::invalid_argument("instance: ell_star not antisymmetric");
        }
  }
}

void TabularPolicy::validate() const {
  for (int x = 0; x < probs.rows; ++x) check_simplex(probs.row(x), "policy", false);
}

double bt_preference_prob(const AlignmentInstance& inst, int x, int a1, int a0) {
  if (!inst.bt_mode()) throw std::domain_error("bt_preference_prob: instance has no reward table");
  return sigmoid(inst.reward->at(x, a1) - inst.reward->at(x, a0));
}

double general_preference_prob(const AlignmentInstance& inst, int x, int a1, int a0) {
  if (!inst.ell_star) throw std::domain_error("general_preference_prob: instance has no ell_star");
  return 0.5 * (1.0 + inst.ell_star->at(x, a1, a0));
}

double preference_prob(const AlignmentInstance& inst, int x, int a1, int a0) {
  return inst.bt_mode() ? bt_preference_prob(inst, x, a1, a0)
                        : general_preference_prob(inst, x, a1, a0);
}

std::vector<PreferenceSample> sample_preference_dataset(const AlignmentInstance& inst,
                                                        long n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("sample_preference_dataset: n must be >= 1");
  std::vector<PreferenceSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    PreferenceSample s;
    s.x = rng.categorical(inst.rho);
    s.a0 = rng.categorical(inst.pi_ref.row(s.x));
    s.a1 = rng.categorical(inst.pi_ref.row(s.x));
    s.y = rng.bernoulli(preference_prob(inst, s.x, s.a1, s.a0)) ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

double policy_prob(const TabularPolicy& policy, int x, int a) { return policy.probs.at(x, a); }

double policy_prob(const Policy& policy, const AlignmentInstance& inst, int x, int a) {
  if (const auto* tab = std::get_if<TabularPolicy>(&policy)) return tab->probs.at(x, a);
  if (const auto* mix = std::get_if<MixturePolicy>(&policy)) {
    double sum = 0.0;
    for (const auto& m : mix->members) sum += m.probs.at(x, a);
    return sum / static_cast<double>(mix->members.size());
  }
  const auto& ll = std::get<LogLinearPolicy>(policy);
  const auto& fm = *ll.features;
  double z = 0.0, num = 0.0;
  for (int b = 0; b < inst.num_actions; ++b) {
    double dot = 0.0;
    auto f = fm.at(x, b);
    for (int k = 0; k < fm.dim; ++k) dot += ll.theta[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(k)];
    const double w = inst.pi_ref.at(x, b) * std::exp(dot);
    z += w;
    if (b == a) num = w;
  }
  return num / z;
}

TabularPolicy to_tabular(const LogLinearPolicy& policy, const Table2& pi_ref) {
  const auto& fm = *policy.features;
  TabularPolicy out{Table2(pi_ref.rows, pi_ref.cols)};
  for (int x = 0; x < pi_ref.rows; ++x) {
    double z = 0.0;
    for (int a = 0; a < pi_ref.cols; ++a) {
      double dot = 0.0;
      auto f = fm.at(x, a);
      for (int k = 0; k < fm.dim; ++k) dot += policy.theta[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(k)];
      out.probs.at(x, a) = pi_ref.at(x, a) * std::exp(dot);
      z += out.probs.at(x, a);
    }
    for (int a = 0; a < pi_ref.cols; ++a) out.probs.at(x, a) /= z;
  }
  return out;
}

TabularPolicy to_tabular(const Policy& policy, const AlignmentInstance& inst) {
  TabularPolicy out{Table2(inst.num_contexts, inst.num_actions)};
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a)
      out.probs.at(x, a) = policy_prob(policy, inst, x, a);
  return out;
}

TabularPolicy greedy_policy(const AlignmentInstance& inst) {
  if (!inst.bt_mode()) throw std::domain_error("greedy_policy: BT mode required");
  TabularPolicy out{Table2(inst.num_contexts, inst.num_actions)};
  for (int x = 0; x < inst.num_contexts; ++x) {
    int best = 0;
    for (int a = 1; a < inst.num_actions; ++a)
      if (inst.reward->at(x, a) > inst.reward->at(x, best)) best = a;
    out.probs.at(x, best) = 1.0;
  }
  return out;
}

TabularPolicy reference_policy(const AlignmentInstance& inst) {
  return TabularPolicy{inst.pi_ref};
}

AlignmentInstance generate_bt_instance(int num_contexts, int num_actions, double r_max,
                                       RngStream& rng) {
  AlignmentInstance inst;
  inst.num_contexts = num_contexts;
  inst.num_actions = num_actions;
  inst.r_max = r_max;
  inst.rho.resize(static_cast<std::size_t>(num_contexts));
  rng.dirichlet_unit(inst.rho);
  inst.pi_ref = Table2(num_contexts, num_actions);
  for (int x = 0; x < num_contexts; ++x) rng.dirichlet_unit(inst.pi_ref.row(x));
  inst.reward = Table2(num_contexts, num_actions);
  for (auto& r : inst.reward->v) r = rng.uniform(0.0, r_max);
  inst.validate();
  return inst;
}

AlignmentInstance generate_general_instance(int num_contexts, int num_actions, RngStream& rng) {
  AlignmentInstance inst;
  inst.num_contexts = num_contexts;
  inst.num_actions = num_actions;
  inst.r_max = 1.0;
  inst.rho.resize(static_cast<std::size_t>(num_contexts));
  rng.dirichlet_unit(inst.rho);
  inst.pi_ref = Table2(num_contexts, num_actions);
  for (int x = 0; x < num_contexts; ++x) rng.dirichlet_unit(inst.pi_ref.row(x));
  inst.ell_star = Table3(num_contexts, num_actions, num_actions);
  for (int x = 0; x < num_contexts; ++x)
    for (int a = 0; a < num_actions; ++a)
      for (int b = a + 1; b < num_actions; ++b) {
        const double l = rng.uniform(-1.0, 1.0);
        inst.ell_star->at(x, a, b) = l;
        inst.ell_star->at(x, b, a) = -l;
      }
  inst.validate();
  return inst;
}

AlignmentInstance parse_instance_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AlignmentInstance inst;
  inst.num_contexts = j.at("num_contexts").get<int>();
  inst.num_actions = j.at("num_actions").get<int>();
  inst.r_max = j.value("r_max", 1.0);
  inst.rho = j.at("rho").get<std::vector<double>>();
  inst.pi_ref = Table2(inst.num_contexts, inst.num_actions);
  inst.pi_ref.v = j.at("pi_ref").get<std::vector<double>>();
  if (inst.pi_ref.v.size() != static_cast<std::size_t>(inst.num_contexts) * inst.num_actions)
    throw std::invalid_argument("instance json: pi_ref length mismatch");
  if (j.contains("reward")) {
    inst.reward = Table2(inst.num_contexts, inst.num_actions);
    inst.reward->v = j.at("reward").get<std::vector<double>>();
    if (inst.reward->v.size() != static_cast<std::size_t>(inst.num_contexts) * inst.num_actions)
      throw std::invalid_argument("instance json: reward length mismatch");
  }
  if (j.contains("ell_star")) {
    inst.ell_star = Table3(inst.num_contexts, inst.num_actions, inst.num_actions);
    inst.ell_star->v = j.at("ell_star").get<std::vector<double>>();
    if (inst.ell_star->v.size() !=
        static_cast<std::size_t>(inst.num_contexts) * inst.num_actions * inst.num_actions)
      throw std::invalid_argument("instance json: ell_star length mismatch");
  }
  inst.validate();
  return inst;
}

AlignmentInstance load_instance_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance_json(ss.str());
}

std::string instance_to_json(const AlignmentInstance& inst) {
  nlohmann::json j;
  j["num_contexts"] = inst.num_contexts;
  j["num_actions"] = inst.num_actions;
  j["r_max"] = inst.r_max;
  j["rho"] = inst.rho;
  j["pi_ref"] = inst.pi_ref.v;
  if (inst.reward) j["reward"] = inst.reward->v;
  if (inst.ell_star) j["ell_star"] = inst.ell_star->v;
  return j.dump(2);
}

}  // namespace brier
