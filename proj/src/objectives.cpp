#include "brier/objectives.hpp"

#include <cmath>
#include <stdexcept>

#include "brier/mechanisms.hpp"

namespace brier {

double phi(double u) {
  if (!(u > 0.0)) throw std::domain_error("phi: argument must be positive");
  return u + std::log(u);
}

double phi_prime(double u) {
  if (!(u > 0.0)) throw std::domain_error("phi_prime: argument must be positive");
  return 1.0 + 1.0 / u;
}

double clip(double v, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("clip: radius must be positive");
  return std::max(std::min(v, R), -R);
}

namespace {

double ratio_checked(const TabularPolicy& policy, const Table2& pi_ref, int x, int a) {
  const double p = policy.probs.at(x, a);
  if (!(p > 0.0))
    throw std::domain_error("h_chipo: zero policy probability on a queried action");
  return p / pi_ref.at(x, a);
}

}  // namespace

double h_chipo(const TabularPolicy& policy, const Table2& pi_ref, int x, int a, int b) {
  if (a == b) return 0.0;
  return phi(ratio_checked(policy, pi_ref, x, a)) - phi(ratio_checked(policy, pi_ref, x, b));
}

double h_dpo(const TabularPolicy& policy, const Table2& pi_ref, int x, int a, int b) {
  if (a == b) return 0.0;
  return std::log(ratio_checked(policy, pi_ref, x, a)) -
         std::log(ratio_checked(policy, pi_ref, x, b));
}

Table3 prediction_table(const TabularPolicy& policy, const Table2& pi_ref, double beta,
                        double r_max) {
  const int X = pi_ref.rows, A = pi_ref.cols;
  // phi of each ratio once, differences after.
  Table2 phis(X, A);
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < A; ++a) phis.at(x, a) = phi(ratio_checked(policy, pi_ref, x, a));
  Table3 pred(X, A, A);
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < A; ++a)
      for (int b = 0; b < A; ++b) {
        const double h = phis.at(x, a) - phis.at(x, b);
        pred.at(x, a, b) = 2.0 * sigmoid(clip(beta * h, 2.0 * r_max)) - 1.0;
      }
  return pred;
}

double square_chipo_loss(const TabularPolicy& policy, const Table2& pi_ref,
                         const ObservedDataset& data, const SquareChiPOSpec& spec) {
  const double c = c_factor(spec.epsilon);
  const Table3 pred = prediction_table(policy, pi_ref, spec.beta, spec.r_max);
  double loss = 0.0;
  for (const auto& s : data.samples) {
    const double zbar = 2.0 * s.y - 1.0;
    const double r = pred.at(s.x, s.a1, s.a0) - c * zbar;
    loss += r * r;
  }
  return loss;
}

double central_score(const TabularPolicy& policy, const Table2& pi_ref,
                     const ObservedDataset& data, const CentralScoreSpec& spec) {
  return square_chipo_loss(policy, pi_ref, data,
                           SquareChiPOSpec{spec.beta, spec.r_max, kInfEps});
}

namespace {

// -log sigma(u) without cancellation for large |u|.
double neg_log_sigmoid(double u) {
  if (u >= 0.0) return std::log1p(std::exp(-u));
  return -u + std::log1p(std::exp(u));
}

double log_loss_impl(const TabularPolicy& policy, const Table2& pi_ref,
                     const ObservedDataset& data, double beta, bool chipo_link, double r_max) {
  const int X = pi_ref.rows, A = pi_ref.cols;
  Table2 links(X, A);
  for (int x = 0; x < X; ++x)
    for (int a = 0; a < A; ++a) {
      const double r = ratio_checked(policy, pi_ref, x, a);
      links.at(x, a) = chipo_link ? phi(r) : std::log(r);
    }
  double loss = 0.0;
  for (const auto& s : data.samples) {
    // a+ = a^z, a- = a^{1-z}
    const int aplus = s.y == 1 ? s.a1 : s.a0;
    const int aminus = s.y == 1 ? s.a0 : s.a1;
    double u = beta * (links.at(s.x, aplus) - links.at(s.x, aminus));
    if (chipo_link) u = clip(u, 2.0 * r_max);
    loss += neg_log_sigmoid(u);
  }
  return loss;
}

}  // namespace

double log_chipo_loss(const TabularPolicy& policy, const Table2& pi_ref,
                      const ObservedDataset& data, const LogChiPOSpec& spec) {
  return log_loss_impl(policy, pi_ref, data, spec.beta, true, spec.r_max);
}

double dpo_loss(const TabularPolicy& policy, const Table2& pi_ref, const ObservedDataset& data,
                const DPOSpec& spec) {
  return log_loss_impl(policy, pi_ref, data, spec.beta, false, 0.0);
}

double f_beta_eta(const TabularPolicy& pi, const TabularPolicy& pi_prime, const Table2& pi_ref,
                  double beta, double eta, int x, int a, int b) {
  if (!(beta > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("f_beta_eta: beta and eta must be positive");
  return (1.0 + 1.0 / eta) * beta * h_chipo(pi, pi_ref, x, a, b) -
         (beta / eta) * h_chipo(pi_prime, pi_ref, x, a, b);
}

namespace {

// phi table for one policy; the self-play loss needs the per-action values of
// both pi and pi_t.
Table2 phi_table(const TabularPolicy& policy, const Table2& pi_ref) {
  Table2 t(pi_ref.rows, pi_ref.cols);
  for (int x = 0; x < pi_ref.rows; ++x)
    for (int a = 0; a < pi_ref.cols; ++a)
      t.at(x, a) = phi(ratio_checked(policy, pi_ref, x, a));
  return t;
}

}  // namespace

double policy_opt_loss(const TabularPolicy& pi, const TabularPolicy& pi_t,
                       const Table3& ell_hat, std::span<const UnlabeledTriple> triples,
                       std::span<const int> b_t, const Table2& pi_ref, double beta, double eta) {
  if (!(beta > 0.0) || !(eta > 0.0))
    throw std::invalid_argument("policy_opt_loss: beta and eta must be positive");
  const Table2 phi_pi = phi_table(pi, pi_ref);
  const Table2 phi_pt = phi_table(pi_t, pi_ref);
  const double c1 = (1.0 + 1.0 / eta) * beta;
  const double c2 = beta / eta;
  double loss = 0.0;
  for (const auto& tr : triples) {
    const int bt = b_t[static_cast<std::size_t>(tr.x)];
    const double f = c1 * (phi_pi.at(tr.x, tr.a) - phi_pi.at(tr.x, tr.b)) -
                     c2 * (phi_pt.at(tr.x, tr.a) - phi_pt.at(tr.x, tr.b));
    const double target = ell_hat.at(tr.x, tr.a, bt) - ell_hat.at(tr.x, tr.b, bt);
    const double r = clip(f, 4.0) - target;
    loss += r * r;
  }
  return loss;
}

namespace {

struct LogLinearEval {
  TabularPolicy tab;
  // d pi(a|x) / d theta_k = pi(a|x) (psi_k(x,a) - mean_k(x))
  Table2 mean_features;  // X x dim
};

LogLinearEval eval_loglinear(const LogLinearPolicy& policy, const Table2& pi_ref) {
  LogLinearEval e;
  e.tab = to_tabular(policy, pi_ref);
  const auto& fm = *policy.features;
  e.mean_features = Table2(pi_ref.rows, fm.dim);
  for (int x = 0; x < pi_ref.rows; ++x)
    for (int a = 0; a < pi_ref.cols; ++a) {
      auto f = fm.at(x, a);
      for (int k = 0; k < fm.dim; ++k)
        e.mean_features.at(x, k) += e.tab.probs.at(x, a) * f[static_cast<std::size_t>(k)];
    }
  return e;
}

// d h_chipo(x,a,b) / d theta accumulated into grad with weight w.
void add_h_grad(const LogLinearEval& e, const LogLinearPolicy& policy, const Table2& pi_ref,
                int x, int a, int b, double w, std::vector<double>& grad) {
  const auto& fm = *policy.features;
  for (const int act : {a, b}) {
    const double sign = act == a ? 1.0 : -1.0;
    if (a == b) break;
    const double p = e.tab.probs.at(x, act);
    const double coeff = sign * w * phi_prime(p / pi_ref.at(x, act)) * p / pi_ref.at(x, act);
    auto f = fm.at(x, act);
    for (int k = 0; k < fm.dim; ++k)
      grad[static_cast<std::size_t>(k)] +=
          coeff * (f[static_cast<std::size_t>(k)] - e.mean_features.at(x, k));
  }
}

}  // namespace

double square_chipo_loss(const LogLinearPolicy& policy, const Table2& pi_ref,
                         const ObservedDataset& data, const SquareChiPOSpec& spec) {
  return square_chipo_loss(to_tabular(policy, pi_ref), pi_ref, data, spec);
}

std::vector<double> square_chipo_loss_grad(const LogLinearPolicy& policy, const Table2& pi_ref,
                                           const ObservedDataset& data,
                                           const SquareChiPOSpec& spec) {
  const LogLinearEval e = eval_loglinear(policy, pi_ref);
  const double c = c_factor(spec.epsilon);
  const double R = 2.0 * spec.r_max;
  std::vector<double> grad(policy.theta.size(), 0.0);
  for (const auto& s : data.samples) {
    const double h = h_chipo(e.tab, pi_ref, s.x, s.a1, s.a0);
    const double u = spec.beta * h;
    const double pred = 2.0 * sigmoid(clip(u, R)) - 1.0;
    const double resid = pred - c * (2.0 * s.y - 1.0);
    if (std::abs(u) >= R) continue;  // zero clip subgradient
    const double sig = sigmoid(u);
    const double w = 2.0 * resid * 2.0 * sig * (1.0 - sig) * spec.beta;
    add_h_grad(e, policy, pi_ref, s.x, s.a1, s.a0, w, grad);
  }
  return grad;
}

double policy_opt_loss(const LogLinearPolicy& pi, const TabularPolicy& pi_t,
                       const Table3& ell_hat, std::span<const UnlabeledTriple> triples,
                       std::span<const int> b_t, const Table2& pi_ref, double beta, double eta) {
  return policy_opt_loss(to_tabular(pi, pi_ref), pi_t, ell_hat, triples, b_t, pi_ref, beta, eta);
}

std::vector<double> policy_opt_loss_grad(const LogLinearPolicy& pi, const TabularPolicy& pi_t,
                                         const Table3& ell_hat,
                                         std::span<const UnlabeledTriple> triples,
                                         std::span<const int> b_t, const Table2& pi_ref,
                                         double beta, double eta) {
  const LogLinearEval e = eval_loglinear(pi, pi_ref);
  const double c1 = (1.0 + 1.0 / eta) * beta;
  const double c2 = beta / eta;
  std::vector<double> grad(pi.theta.size(), 0.0);
  for (const auto& tr : triples) {
    const int bt = b_t[static_cast<std::size_t>(tr.x)];
    const double f = c1 * h_chipo(e.tab, pi_ref, tr.x, tr.a, tr.b) -
                     c2 * h_chipo(pi_t, pi_ref, tr.x, tr.a, tr.b);
    const double target = ell_hat.at(tr.x, tr.a, bt) - ell_hat.at(tr.x, tr.b, bt);
    const double resid = clip(f, 4.0) - target;
    if (std::abs(f) >= 4.0) continue;
    add_h_grad(e, pi, pi_ref, tr.x, tr.a, tr.b, 2.0 * resid * c1, grad);
  }
  return grad;
}

}  // namespace brier
