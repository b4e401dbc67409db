#include "brier/regression.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace brier {

void RegressionInstance::validate() const {
  if (rho_prime.empty()) throw std::invalid_argument("regression: empty domain");
  double sum = 0.0;
  for (double p : rho_prime) {
    if (!(p > 0.0)) throw std::invalid_argument("regression: rho' entries must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("regression: rho' must sum to 1");
  if (h_star.size() != rho_prime.size())
    throw std::invalid_argument("regression: h* size mismatch");
  if (H.empty()) throw std::invalid_argument("regression: empty hypothesis class");
  for (const auto& h : H) {
    if (h.size() != rho_prime.size())
      throw std::invalid_argument("regression: hypothesis size mismatch");
    for (double v : h)
      if (!(v >= -1.0 && v <= 1.0))
        throw std::invalid_argument("regression: hypothesis value outside [-1, 1]");
  }
  for (double v : h_star)
    if (!(v >= -1.0 && v <= 1.0))
      throw std::invalid_argument("regression: h* value outside [-1, 1]");
  for (const auto& h : H)
    if (h == h_star) return;  // realizability
  throw std::invalid_argument("regression: h* must be a member of H");
}

std::vector<RegSample> gen_regression_data(const RegressionInstance& inst, long n,
                                           RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gen_regression_data: n must be >= 1");
  std::vector<RegSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const int u = rng.categorical(inst.rho_prime);
    const double p1 = 0.5 * (1.0 + inst.h_star[static_cast<std::size_t>(u)]);
    out.push_back({u, rng.bernoulli(p1) ? 1 : -1});
  }
  return out;
}

std::vector<RegSample> apply_reg_channel(const std::vector<RegSample>& data,
                                         const PipelineSetting& setting, RngStream& rng) {
  setting.validate();
  std::vector<RegSample> out = data;
  for (auto& s : out) {
    int bit = s.y > 0 ? 1 : 0;
    switch (setting.kind) {
      case SettingKind::Clean:
        break;
      case SettingKind::CorruptOnly:
      case SettingKind::CDP:
        bit = huber_corrupt_bit(bit, setting.alpha, setting.adversary, rng);
        break;
      case SettingKind::LDPOnly:
        bit = randomized_response(bit, setting.epsilon, rng);
        break;
      case SettingKind::CTL:
        bit = huber_corrupt_bit(bit, setting.alpha, setting.adversary, rng);
        bit = randomized_response(bit, setting.epsilon, rng);
        break;
      case SettingKind::LTC:
        bit = randomized_response(bit, setting.epsilon, rng);
        bit = huber_corrupt_bit(bit, setting.alpha, setting.adversary, rng);
        break;
    }
    s.y = bit == 1 ? 1 : -1;
  }
  return out;
}

namespace {

int argmin_square(const std::vector<RegSample>& data, const RegressionInstance& inst,
                  double target_scale, std::vector<double>* scores_out) {
  if (data.empty()) throw std::invalid_argument("regression fit: empty data");
  // Sufficient statistics per domain point: counts and label sums.
  const std::size_t U = inst.rho_prime.size();
  std::vector<double> cnt(U, 0.0), lab(U, 0.0);
  for (const auto& s : data) {
    cnt[static_cast<std::size_t>(s.u)] += 1.0;
    lab[static_cast<std::size_t>(s.u)] += target_scale * s.y;
  }
  int best = 0;
  double best_loss = 0.0;
  if (scores_out) scores_out->assign(inst.H.size(), 0.0);
  for (std::size_t k = 0; k < inst.H.size(); ++k) {
    // sum_i (h(u_i) - t_i)^2 = sum_u [cnt_u h_u^2 - 2 h_u lab_u] + const;
    // the constant sum t_i^2 is shared, so it can be dropped for the argmin
    // but must be kept when scores feed the exponential mechanism.
    double loss = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      const double h = inst.H[k][u];
      loss += cnt[u] * h * h - 2.0 * h * lab[u];
    }
    if (scores_out) {
      double tsq = 0.0;
      for (std::size_t u = 0; u < U; ++u)
        tsq += cnt[u] * target_scale * target_scale;
      (*scores_out)[k] = loss + tsq;
    }
    if (k == 0 || loss < best_loss) { best = static_cast<int>(k); best_loss = loss; }
  }
  return best;
}

}  // namespace

int fit_ls_local(const std::vector<RegSample>& data, const RegressionInstance& inst,
                 double epsilon) {
  return argmin_square(data, inst, c_factor(epsilon), nullptr);
}

int fit_ls_cdp(const std::vector<RegSample>& data, const RegressionInstance& inst,
               double epsilon, RngStream& rng) {
  std::vector<double> scores;
  argmin_square(data, inst, 1.0, &scores);
  return exp_mechanism_sample(scores, epsilon, 4.0, rng);
}

double gen_error(int h_index, const RegressionInstance& inst) {
  if (h_index < 0 || h_index >= static_cast<int>(inst.H.size()))
    throw std::invalid_argument("gen_error: hypothesis index out of range");
  double e = 0.0;
  for (std::size_t u = 0; u < inst.rho_prime.size(); ++u) {
    const double d = inst.H[static_cast<std::size_t>(h_index)][u] - inst.h_star[u];
    e += inst.rho_prime[u] * d * d;
  }
  return e;
}

std::vector<RegCurvePoint> bound_curve_experiment(const RegressionInstance& inst,
                                                  const PipelineSetting& setting,
                                                  const std::vector<long>& n_grid,
                                                  int num_seeds, std::uint64_t master_seed) {
  if (n_grid.empty() || num_seeds < 1)
    throw std::invalid_argument("bound_curve_experiment: empty grid or no seeds");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("bound_curve_experiment: n grid must be increasing");
  std::vector<RegCurvePoint> out;
  for (long n : n_grid) {
    RegCurvePoint pt;
    pt.n = n;
    for (int seed = 0; seed < num_seeds; ++seed) {
      const std::string cell = "reg|" + setting.name() + "|eps=" + std::to_string(setting.epsilon) +
                               "|alpha=" + std::to_string(setting.alpha) +
                               "|n=" + std::to_string(n) + "|seed=" + std::to_string(seed);
      RngStream data_rng(derive_stream_id(master_seed, stable_hash(cell), "data"));
      RngStream chan_rng(derive_stream_id(master_seed, stable_hash(cell), "channel"));
      RngStream fit_rng(derive_stream_id(master_seed, stable_hash(cell), "fit"));
      const auto clean = gen_regression_data(inst, n, data_rng);
      const auto obs = apply_reg_channel(clean, setting, chan_rng);
      const int idx = setting.kind == SettingKind::CDP
                          ? fit_ls_cdp(obs, inst, setting.epsilon, fit_rng)
                          : fit_ls_local(obs, inst,
                                         setting.local_private() ? setting.epsilon : kInfEps);
      pt.errs.push_back(gen_error(idx, inst));
    }
    double mean = std::accumulate(pt.errs.begin(), pt.errs.end(), 0.0) /
                  static_cast<double>(pt.errs.size());
    double var = 0.0;
    for (double e : pt.errs) var += (e - mean) * (e - mean);
    pt.mean_err2 = mean;
    pt.stderr_err2 = pt.errs.size() > 1
                         ? std::sqrt(var / (static_cast<double>(pt.errs.size()) *
                                            (static_cast<double>(pt.errs.size()) - 1.0)))
                         : 0.0;
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace brier
