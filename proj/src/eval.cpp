#include "brier/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "brier/objectives.hpp"

namespace brier {

double value_J(const TabularPolicy& policy, const AlignmentInstance& inst) {
  if (!inst.bt_mode()) throw std::domain_error("value_J: BT mode required");
  double v = 0.0;
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a)
      v += inst.rho[static_cast<std::size_t>(x)] * policy.probs.at(x, a) * inst.reward->at(x, a);
  return v;
}

double value_J(const Policy& policy, const AlignmentInstance& inst) {
  return value_J(to_tabular(policy, inst), inst);
}

double subopt_gap(const Policy& policy, const Policy& comparator, const AlignmentInstance& inst) {
  return value_J(comparator, inst) - value_J(policy, inst);
}

double concentrability(const TabularPolicy& policy, const AlignmentInstance& inst) {
  double c = 0.0;
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a) {
      const double p = policy.probs.at(x, a);
      c += inst.rho[static_cast<std::size_t>(x)] * p * p / inst.pi_ref.at(x, a);
    }
  return c;
}

double concentrability(const Policy& policy, const AlignmentInstance& inst) {
  return concentrability(to_tabular(policy, inst), inst);
}

double chi2_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("chi2_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0)) throw std::domain_error("chi2_divergence: q must be positive entrywise");
    const double t = p[i] / q[i] - 1.0;
    d += 0.5 * q[i] * t * t;
  }
  return d;
}

double kappa(double c_star, double v_max, double r_max) {
  if (!(c_star >= 1.0) || !(v_max > 0.0) || !(r_max > 0.0))
    throw std::invalid_argument("kappa: invalid inputs");
  return std::exp(2.0 * r_max) * (v_max / r_max) * std::sqrt(c_star);
}

double class_v_max(const FinitePolicyClass& cls, const Table2& pi_ref, double beta,
                   double r_max) {
  double v = r_max;
  for (const auto& pi : cls.members)
    for (int x = 0; x < pi_ref.rows; ++x) {
      double lo = 0.0, hi = 0.0;
      for (int a = 0; a < pi_ref.cols; ++a) {
        const double u = beta * phi(pi.probs.at(x, a) / pi_ref.at(x, a));
        if (a == 0) { lo = hi = u; }
        lo = std::min(lo, u);
        hi = std::max(hi, u);
      }
      v = std::max(v, hi - lo);
    }
  return v;
}

double err_stat(const TabularPolicy& pi_hat, const AlignmentInstance& inst, double beta,
                double r_max) {
  if (!inst.bt_mode()) throw std::domain_error("err_stat: BT mode required");
  const double R = 2.0 * r_max;
  Table2 rhat(inst.num_contexts, inst.num_actions);
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a) {
      const double p = pi_hat.probs.at(x, a);
      if (!(p > 0.0)) throw std::domain_error("err_stat: zero policy probability");
      rhat.at(x, a) = beta * phi(p / inst.pi_ref.at(x, a));
    }
  double e = 0.0;
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a)
      for (int b = 0; b < inst.num_actions; ++b) {
        const double w = inst.rho[static_cast<std::size_t>(x)] * inst.pi_ref.at(x, a) *
                         inst.pi_ref.at(x, b);
        const double dhat = clip(rhat.at(x, a) - rhat.at(x, b), R);
        const double dstar = clip(inst.reward->at(x, a) - inst.reward->at(x, b), R);
        e += w * (dhat - dstar) * (dhat - dstar);
      }
  return e;
}

double ell_value(const TabularPolicy& pi, const TabularPolicy& pi_prime,
                 const AlignmentInstance& inst) {
  if (inst.bt_mode()) throw std::domain_error("ell_value: general mode required");
  double v = 0.0;
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a) {
      const double pa = pi.probs.at(x, a);
      if (pa == 0.0) continue;
      for (int b = 0; b < inst.num_actions; ++b)
        v += inst.rho[static_cast<std::size_t>(x)] * pa * pi_prime.probs.at(x, b) *
             inst.ell_star->at(x, a, b);
    }
  return v;
}

double ell_value(const Policy& pi, const Policy& pi_prime, const AlignmentInstance& inst) {
  return ell_value(to_tabular(pi, inst), to_tabular(pi_prime, inst), inst);
}

double duality_gap(const Policy& policy, const AlignmentInstance& inst,
                   const FinitePolicyClass& cls) {
  if (cls.members.empty()) throw std::invalid_argument("duality_gap: empty class");
  const TabularPolicy hat = to_tabular(policy, inst);
  double best_vs = 0.0, best_for = 0.0;
  for (std::size_t i = 0; i < cls.members.size(); ++i) {
    const double vs = ell_value(cls.members[i], hat, inst);
    const double fr = ell_value(hat, cls.members[i], inst);
    if (i == 0) { best_vs = vs; best_for = fr; }
    best_vs = std::max(best_vs, vs);
    best_for = std::min(best_for, fr);
  }
  return best_vs - best_for;
}

namespace {

// Exact exploitability of (p, q) on M: best pure deviation for each side.
double game_gap(const Table2& M, const std::vector<double>& p, const std::vector<double>& q,
                int* best_row = nullptr, int* best_col = nullptr) {
  double row_best = 0.0, col_best = 0.0;
  for (int i = 0; i < M.rows; ++i) {
    double v = 0.0;
    for (int j = 0; j < M.cols; ++j) v += M.at(i, j) * q[static_cast<std::size_t>(j)];
    if (i == 0 || v > row_best) {
      row_best = v;
      if (best_row) *best_row = i;
    }
  }
  for (int j = 0; j < M.cols; ++j) {
    double v = 0.0;
    for (int i = 0; i < M.rows; ++i) v += M.at(i, j) * p[static_cast<std::size_t>(i)];
    if (j == 0 || v < col_best) {
      col_best = v;
      if (best_col) *best_col = j;
    }
  }
  return row_best - col_best;
}

double game_value(const Table2& M, const std::vector<double>& p, const std::vector<double>& q) {
  double v = 0.0;
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j)
      v += p[static_cast<std::size_t>(i)] * M.at(i, j) * q[static_cast<std::size_t>(j)];
  return v;
}

void mwu_step(std::vector<double>& w, const std::vector<double>& payoff,
              const std::vector<double>& prev_payoff, double eta, double sign) {
  // optimistic update: gradient 2 g_t - g_{t-1}
  double mx = -1e300;
  std::vector<double> logw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    logw[i] = std::log(w[i]) + sign * eta * (2.0 * payoff[i] - prev_payoff[i]);
    mx = std::max(mx, logw[i]);
  }
  double z = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(logw[i] - mx);
    z += w[i];
  }
  for (auto& x : w) x /= z;
}

}  // namespace

GameSolution solve_matrix_game(const Table2& payoff, int max_iters, double tol) {
  const int R = payoff.rows, C = payoff.cols;
  if (R <= 0 || C <= 0) throw std::invalid_argument("solve_matrix_game: empty payoff");
  for (double v : payoff.v)
    if (!std::isfinite(v)) throw std::invalid_argument("solve_matrix_game: non-finite entry");
  if (!(tol > 0.0) || max_iters < 1)
    throw std::invalid_argument("solve_matrix_game: bad iteration budget");

  GameSolution sol;
  std::vector<double> p(static_cast<std::size_t>(R), 1.0 / R);
  std::vector<double> q(static_cast<std::size_t>(C), 1.0 / C);
  std::vector<double> avg_p = p, avg_q = q;
  std::vector<double> gp(p.size(), 0.0), gq(q.size(), 0.0);  // current payoffs
  std::vector<double> gp_prev = gp, gq_prev = gq;

  double scale = 0.0;
  for (double v : payoff.v) scale = std::max(scale, std::abs(v));
  const double eta = scale > 0.0 ? 0.25 / scale : 0.25;

  std::vector<double> best_p = p, best_q = q;
  double best_gap = game_gap(payoff, p, q);
  sol.iters = 0;

  for (int t = 1; t <= max_iters && best_gap > tol; ++t) {
    for (int i = 0; i < R; ++i) {
      double v = 0.0;
      for (int j = 0; j < C; ++j) v += payoff.at(i, j) * q[static_cast<std::size_t>(j)];
      gp[static_cast<std::size_t>(i)] = v;
    }
    for (int j = 0; j < C; ++j) {
      double v = 0.0;
      for (int i = 0; i < R; ++i) v += payoff.at(i, j) * p[static_cast<std::size_t>(i)];
      gq[static_cast<std::size_t>(j)] = v;
    }
    mwu_step(p, gp, gp_prev, eta, +1.0);
    mwu_step(q, gq, gq_prev, eta, -1.0);
    gp_prev = gp;
    gq_prev = gq;
    const double w = 1.0 / static_cast<double>(t + 1);
    for (std::size_t i = 0; i < avg_p.size(); ++i) avg_p[i] = (1.0 - w) * avg_p[i] + w * p[i];
    for (std::size_t j = 0; j < avg_q.size(); ++j) avg_q[j] = (1.0 - w) * avg_q[j] + w * q[j];
    sol.iters = t;
    if (t % 16 == 0 || t == max_iters) {
      const double g_last = game_gap(payoff, p, q);
      if (g_last < best_gap) { best_gap = g_last; best_p = p; best_q = q; }
      const double g_avg = game_gap(payoff, avg_p, avg_q);
      if (g_avg < best_gap) { best_gap = g_avg; best_p = avg_p; best_q = avg_q; }
    }
  }

  // Purification: pure best responses against the found pair, kept only when
  // the exact certificate does not get worse.
  int br = 0, bc = 0;
  game_gap(payoff, best_p, best_q, &br, &bc);
  std::vector<double> pure_p(best_p.size(), 0.0), pure_q(best_q.size(), 0.0);
  pure_p[static_cast<std::size_t>(br)] = 1.0;
  pure_q[static_cast<std::size_t>(bc)] = 1.0;
  const std::pair<const std::vector<double>*, const std::vector<double>*> combos[] = {
      {&pure_p, &pure_q}, {&pure_p, &best_q}, {&best_p, &pure_q}};
  for (const auto& [cp, cq] : combos) {
    const double g = game_gap(payoff, *cp, *cq);
    if (g <= best_gap) { best_gap = g; best_p = *cp; best_q = *cq; break; }
  }

  sol.row_mix = best_p;
  sol.col_mix = best_q;
  sol.gap = best_gap;
  sol.value = game_value(payoff, best_p, best_q);
  return sol;
}

TabularPolicy mix_policy(const FinitePolicyClass& cls, std::span<const double> weights) {
  if (cls.members.size() != weights.size())
    throw std::invalid_argument("mix_policy: weight count mismatch");
  if (cls.members.empty()) throw std::invalid_argument("mix_policy: empty class");
  const auto& first = cls.members.front().probs;
  TabularPolicy out{Table2(first.rows, first.cols)};
  for (std::size_t k = 0; k < weights.size(); ++k)
    for (int x = 0; x < first.rows; ++x)
      for (int a = 0; a < first.cols; ++a)
        out.probs.at(x, a) += weights[k] * cls.members[k].probs.at(x, a);
  return out;
}

double unilateral_concentrability(const FinitePolicyClass& cls, const AlignmentInstance& inst,
                                  const TabularPolicy& pi_mw) {
  double c = 0.0;
  for (const auto& pi : cls.members)
    for (int x = 0; x < inst.num_contexts; ++x)
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_actions; ++b)
          c = std::max(c, pi.probs.at(x, a) * pi_mw.probs.at(x, b) /
                              (inst.pi_ref.at(x, a) * inst.pi_ref.at(x, b)));
  return c;
}

bool in_pi_c(const TabularPolicy& policy, const AlignmentInstance& inst, double c_bound) {
  for (int x = 0; x < inst.num_contexts; ++x)
    if (chi2_divergence(policy.probs.row(x), inst.pi_ref.row(x)) > c_bound) return false;
  return true;
}

double subopt_C(const Policy& policy, const AlignmentInstance& inst,
                const FinitePolicyClass& cls, double c_bound) {
  if (cls.members.empty()) throw std::invalid_argument("subopt_C: empty class");
  const TabularPolicy hat = to_tabular(policy, inst);
  double best_all = 0.0, best_c = 0.0;
  bool any_c = false;
  for (std::size_t i = 0; i < cls.members.size(); ++i) {
    const double v = ell_value(cls.members[i], hat, inst);
    if (i == 0 || v > best_all) best_all = v;
    if (in_pi_c(cls.members[i], inst, c_bound)) {
      if (!any_c || v > best_c) best_c = v;
      any_c = true;
    }
  }
  if (!any_c) throw std::domain_error("subopt_C: Pi_C is empty at C = " + std::to_string(c_bound));
  return best_all - best_c;
}

RateFit rate_fit(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("rate_fit: need at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw std::domain_error("rate_fit: nonpositive point");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::domain_error("rate_fit: degenerate abscissae");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace brier
