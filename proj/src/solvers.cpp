#include "brier/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "brier/mechanisms.hpp"

namespace brier {

FitResult fit_finite(const FinitePolicyClass& cls,
                     const std::function<double(const TabularPolicy&)>& loss) {
  if (cls.members.empty()) throw std::invalid_argument("fit_finite: empty class");
  FitResult best{0, 0.0};
  for (std::size_t i = 0; i < cls.members.size(); ++i) {
    double value;
    try {
      value = loss(cls.members[i]);
    } catch (const std::exception& e) {
      throw std::domain_error("fit_finite: loss failed on candidate " + std::to_string(i) +
                              ": " + e.what());
    }
    if (i == 0 || value < best.loss) best = {static_cast<int>(i), value};
  }
  return best;
}

GDResult fit_loglinear(const LogLinearClass& cls,
                       const std::function<double(const std::vector<double>&)>& loss,
                       const std::function<std::vector<double>(const std::vector<double>&)>& grad,
                       const GDConfig& cfg, std::vector<double> theta0) {
  const std::size_t d = static_cast<std::size_t>(cls.features.dim);
  if (theta0.size() != d) throw std::invalid_argument("fit_loglinear: theta0 dimension mismatch");
  if (!(cfg.step > 0.0) || !(cfg.grad_tol > 0.0))
    throw std::invalid_argument("fit_loglinear: step and tolerance must be positive");

  auto project = [&](std::vector<double>& th) {
    for (std::size_t k = 0; k < th.size(); ++k)
      th[k] = std::clamp(th[k], cls.box_lo[k], cls.box_hi[k]);
  };

  GDResult res;
  res.theta = std::move(theta0);
  project(res.theta);
  res.loss_trajectory.push_back(loss(res.theta));
  for (int t = 0; t < cfg.max_iters; ++t) {
    const auto g = grad(res.theta);
    double norm = 0.0;
    for (double gk : g) {
      if (!std::isfinite(gk)) throw std::runtime_error("fit_loglinear: non-finite gradient");
      norm += gk * gk;
    }
    norm = std::sqrt(norm);
    if (norm <= cfg.grad_tol) break;
    const double step = cfg.schedule == GDConfig::Schedule::Constant
                            ? cfg.step
                            : cfg.step / std::sqrt(static_cast<double>(t + 1));
    for (std::size_t k = 0; k < res.theta.size(); ++k) res.theta[k] -= step * g[k];
    project(res.theta);
    res.loss_trajectory.push_back(loss(res.theta));
    res.iters = t + 1;
  }
  return res;
}

int sample_policy_cdp(const FinitePolicyClass& cls, const Table2& pi_ref,
                      const ObservedDataset& data, const CentralScoreSpec& spec, double epsilon,
                      RngStream& rng) {
  if (cls.members.empty()) throw std::invalid_argument("sample_policy_cdp: empty class");
  std::vector<double> scores;
  scores.reserve(cls.members.size());
  for (const auto& pi : cls.members) scores.push_back(central_score(pi, pi_ref, data, spec));
  return exp_mechanism_sample(scores, epsilon, 4.0, rng);
}

double phi_inverse(double v) {
  if (!std::isfinite(v)) throw std::domain_error("phi_inverse: non-finite argument");
  // Deep in the left tail u + log u ~ log u, so u = e^v to double precision.
  if (v <= -700.0) return std::exp(v);
  // Bracket [lo, hi] with phi(lo) <= v <= phi(hi) by doubling/halving from 1.
  double lo = 1.0, hi = 1.0;
  if (phi(1.0) < v) {
    while (phi(hi) < v) hi *= 2.0;
    lo = hi * 0.5;
  } else {
    while (phi(lo) > v) lo *= 0.5;
    hi = lo * 2.0;
  }
  double u = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = phi(u) - v;
    if (f > 0.0) hi = u; else lo = u;
    const double step = f / phi_prime(u);
    double next = u - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
    if (std::abs(next - u) <= 1e-14 * std::abs(u)) { u = next; break; }
    u = next;
  }
  return u;
}

TabularPolicy solve_pi_beta_star(const AlignmentInstance& inst, double beta) {
  if (!inst.bt_mode()) throw std::domain_error("solve_pi_beta_star: BT mode required");
  if (!(beta > 0.0)) throw std::invalid_argument("solve_pi_beta_star: beta must be positive");
  TabularPolicy out{Table2(inst.num_contexts, inst.num_actions)};
  for (int x = 0; x < inst.num_contexts; ++x) {
    auto mass = [&](double z) {
      double s = 0.0;
      for (int a = 0; a < inst.num_actions; ++a)
        s += inst.pi_ref.at(x, a) * phi_inverse((inst.reward->at(x, a) - z) / beta);
      return s;
    };
    // mass is strictly decreasing in z; expand until it brackets 1.
    double lo = -beta, hi = beta;
    {
      double span = std::max(1.0, inst.r_max + beta);
      int tries = 0;
      while (mass(lo) < 1.0) {
        lo -= span;
        span *= 2.0;
        if (++tries > 200) throw std::runtime_error("solve_pi_beta_star: bracket failure (lo), context " + std::to_string(x));
      }
      span = std::max(1.0, inst.r_max + beta);
      tries = 0;
      while (mass(hi) > 1.0) {
        hi += span;
        span *= 2.0;
        if (++tries > 200) throw std::runtime_error("solve_pi_beta_star: bracket failure (hi), context " + std::to_string(x));
      }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mass(mid) >= 1.0) lo = mid; else hi = mid;
    }
    const double z = 0.5 * (lo + hi);
    double sum = 0.0;
    for (int a = 0; a < inst.num_actions; ++a) {
      out.probs.at(x, a) =
          inst.pi_ref.at(x, a) * phi_inverse((inst.reward->at(x, a) - z) / beta);
      sum += out.probs.at(x, a);
    }
    for (int a = 0; a < inst.num_actions; ++a) out.probs.at(x, a) /= sum;
  }
  return out;
}

FinitePolicyClass build_realizable_class(const AlignmentInstance& inst, double beta,
                                         int num_distractors, RngStream& rng) {
  if (num_distractors < 0)
    throw std::invalid_argument("build_realizable_class: num_distractors must be >= 0");
  FinitePolicyClass cls;
  cls.members.push_back(solve_pi_beta_star(inst, beta));
  std::vector<double> dir(static_cast<std::size_t>(inst.num_actions));
  for (int i = 0; i < num_distractors; ++i) {
    TabularPolicy p = cls.members.front();
    const double w = rng.uniform(0.1, 0.5);
    for (int x = 0; x < inst.num_contexts; ++x) {
      rng.dirichlet_unit(dir);
      double sum = 0.0;
      for (int a = 0; a < inst.num_actions; ++a) {
        p.probs.at(x, a) = (1.0 - w) * p.probs.at(x, a) + w * dir[static_cast<std::size_t>(a)];
        sum += p.probs.at(x, a);
      }
      for (int a = 0; a < inst.num_actions; ++a) p.probs.at(x, a) /= sum;
    }
    cls.members.push_back(std::move(p));
  }
  return cls;
}

double oracle_beta(double c_star, double err_stat, double v_max, double r_max) {
  if (!(c_star >= 1.0) || !(v_max > 0.0) || !(r_max > 0.0) || err_stat < 0.0)
    throw std::invalid_argument("oracle_beta: invalid inputs");
  if (err_stat == 0.0) return kOracleBetaFloor;
  return std::sqrt(2.0 / c_star) * v_max * err_stat / r_max;
}

}  // namespace brier
