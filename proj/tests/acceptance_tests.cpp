// Acceptance gate: one check per criterion, one PASS/FAIL line each.
// Exit status is the number of failed criteria.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "brier/domain.hpp"
#include "brier/eval.hpp"
#include "brier/experiment.hpp"
#include "brier/mechanisms.hpp"
#include "brier/objectives.hpp"
#include "brier/presets.hpp"
#include "brier/regression.hpp"
#include "brier/rng.hpp"
#include "brier/selfplay.hpp"
#include "brier/solvers.hpp"

using namespace brier;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
constexpr double kTCrit199 = 2.345;  // one-sided t critical value, 0.01, df = 199

double oracle_cell_beta(double c_star, const PipelineSetting& s, long n) {
  double c_eff = 1.0;
  if (s.local_private()) c_eff = c_factor(s.epsilon);
  else if (s.central_private()) c_eff = 1.0 + 1.0 / std::sqrt(s.epsilon);
  double corr = 0.0;
  if (s.corrupts() && s.alpha > 0.0)
    corr = s.kind == SettingKind::LTC ? std::sqrt(s.alpha * c_factor(s.epsilon))
                                      : std::sqrt(s.alpha);
  const double err = c_eff * std::sqrt(std::log(16.0 / 0.05) / static_cast<double>(n)) + corr;
  return oracle_beta(c_star, err, 2.0, 1.0);
}

struct AlignCtx {
  AlignmentInstance inst;
  TabularPolicy star;
  double c_star = 0.0;

  AlignCtx() : inst(reference_instance()), star(greedy_policy(inst)) {
    c_star = concentrability(star, inst);
  }
};

// One fitted cell of the alignment experiment; streams keyed by the cell
// parameters so every criterion sees independent draws.
double cell_sg(const AlignCtx& c, const PipelineSetting& set, long n, int seed, bool cdp) {
  const double beta = oracle_cell_beta(c.c_star, set, n);
  const std::string key = set.name() + "|e=" + std::to_string(set.epsilon) + "|n=" +
                          std::to_string(n) + "|s=" + std::to_string(seed) + (cdp ? "|cdp" : "");
  RngStream class_rng(derive_stream_id(kMasterSeed, stable_hash(key), "class"));
  RngStream data_rng(derive_stream_id(kMasterSeed, stable_hash(key), "data"));
  RngStream chan_rng(derive_stream_id(kMasterSeed, stable_hash(key), "channel"));
  RngStream mech_rng(derive_stream_id(kMasterSeed, stable_hash(key), "mech"));
  FinitePolicyClass cls = build_realizable_class(c.inst, beta, 15, class_rng);
  auto clean = sample_preference_dataset(c.inst, n, data_rng);
  ObservedDataset data = apply_pipeline(clean, set, chan_rng);
  int chosen;
  if (cdp) {
    chosen = sample_policy_cdp(cls, c.inst.pi_ref, data, CentralScoreSpec{beta, 1.0},
                               set.epsilon, mech_rng);
  } else {
    const double le = set.local_private() ? set.epsilon : kInfEps;
    chosen = fit_finite(cls, [&](const TabularPolicy& pi) {
               return square_chipo_loss(pi, c.inst.pi_ref, data, SquareChiPOSpec{beta, 1.0, le});
             }).index;
  }
  return value_J(c.star, c.inst) - value_J(cls.members[static_cast<std::size_t>(chosen)], c.inst);
}

double mean_sg(const AlignCtx& c, const PipelineSetting& set, long n, int seeds, bool cdp) {
  double acc = 0.0;
  for (int s = 0; s < seeds; ++s) acc += cell_sg(c, set, n, s, cdp);
  return acc / seeds;
}

struct PairedT {
  double mean = 0.0, t = 0.0;
};

PairedT paired_t(const std::vector<double>& a, const std::vector<double>& b) {
  PairedT out;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) out.mean += b[i] - a[i];
  out.mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = b[i] - a[i] - out.mean;
    var += d * d;
  }
  const double se = std::sqrt(var / (static_cast<double>(n) * (n - 1.0)));
  out.t = se > 0.0 ? out.mean / se : 0.0;
  return out;
}

double mean_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / v.size();
}

bool criterion1(const AlignCtx& c) {
  Adversary adv;
  const PipelineSetting clean = parse_setting("clean", kInfEps, 0.0, adv);
  std::vector<std::pair<double, double>> pts;
  for (int k = 7; k <= 13; ++k) {
    const long n = 1L << k;
    pts.emplace_back(static_cast<double>(n), mean_sg(c, clean, n, 100, false));
  }
  const double slope = rate_fit(pts).slope;
  const bool ok = slope >= -0.70 && slope <= -0.30;
  std::printf("criterion 1: %s — clean oracle-beta SG slope %.3f over n=2^7..2^13 "
              "(window [-0.70, -0.30])\n", ok ? "PASS" : "FAIL", slope);
  return ok;
}

bool criterion2(const AlignCtx& c) {
  Adversary adv;
  const PipelineSetting clean = parse_setting("clean", kInfEps, 0.0, adv);
  const double base = mean_sg(c, clean, 8192, 200, false);
  bool ok = true;
  std::string detail;
  for (double eps : {0.5, 1.0, 2.0}) {
    const PipelineSetting s = parse_setting("ctl", eps, 0.0, adv);
    const double r = mean_sg(c, s, 8192, 200, false) / base;
    const double ce = c_factor(eps);
    ok = ok && r >= ce / 3.0 && r <= 3.0 * ce;
    char buf[64];
    std::snprintf(buf, sizeof buf, " eps=%.1f ratio=%.2f c=%.2f", eps, r, ce);
    detail += buf;
  }
  std::printf("criterion 2: %s — LDP excess within x3 of c(eps) at n=2^13:%s\n",
              ok ? "PASS" : "FAIL", detail.c_str());
  return ok;
}

bool criterion3(const AlignCtx& c) {
  Adversary adv;
  const PipelineSetting ctl = parse_setting("ctl", 0.5, 0.1, adv);
  const PipelineSetting ltc = parse_setting("ltc", 0.5, 0.1, adv);
  std::vector<double> a, b;
  for (int s = 0; s < 200; ++s) {
    a.push_back(cell_sg(c, ctl, 8192, s, false));
    b.push_back(cell_sg(c, ltc, 8192, s, false));
  }
  const PairedT pt = paired_t(a, b);
  const bool ok = pt.t >= kTCrit199;
  std::printf("criterion 3: %s — paired SG(LTC) - SG(CTL) at eps=0.5 alpha=0.1 n=2^13: "
              "mean %.4f, t=%.2f (need >= %.3f)\n", ok ? "PASS" : "FAIL", pt.mean, pt.t,
              kTCrit199);
  return ok;
}

bool criterion4(const AlignCtx& c) {
  // (a) exact DP audit of the selection mechanism on a small instance.
  RngStream rng(derive_stream_id(kMasterSeed, stable_hash("dp-audit"), "class"));
  AlignmentInstance small = generate_bt_instance(2, 2, 1.0, rng);
  FinitePolicyClass cls = build_realizable_class(small, 0.5, 7, rng);
  ObservedDataset data;
  data.samples = sample_preference_dataset(small, 8, rng);
  const CentralScoreSpec spec{0.5, 1.0};
  auto scores_of = [&](const ObservedDataset& d) {
    std::vector<double> s;
    for (const auto& pi : cls.members) s.push_back(central_score(pi, small.pi_ref, d, spec));
    return s;
  };
  double worst = 0.0;
  bool audit = true;
  for (double eps : {0.5, 1.0, 2.0}) {
    const auto base = exp_mechanism_probs(scores_of(data), eps, 4.0);
    for (std::size_t j = 0; j < data.samples.size(); ++j)
      for (int x = 0; x < 2; ++x)
        for (int a0 = 0; a0 < 2; ++a0)
          for (int a1 = 0; a1 < 2; ++a1)
            for (int y = 0; y < 2; ++y) {
              ObservedDataset nb = data;
              nb.samples[j] = PreferenceSample{x, a0, a1, y};
              const auto probs = exp_mechanism_probs(scores_of(nb), eps, 4.0);
              for (std::size_t i = 0; i < probs.size(); ++i) {
                const double lr = std::abs(std::log(base[i] / probs[i]));
                worst = std::max(worst, lr / eps);
                audit = audit && lr <= eps + 1e-9;
              }
            }
  }

  // (b) the privacy cost is positive and shrinks with n.
  Adversary adv;
  const PipelineSetting clean = parse_setting("clean", kInfEps, 0.0, adv);
  const PipelineSetting cdp = parse_setting("cdp", 1.0, 0.0, adv);
  const double d13 = mean_sg(c, cdp, 8192, 200, true) - mean_sg(c, clean, 8192, 200, false);
  const double d15 = mean_sg(c, cdp, 32768, 200, true) - mean_sg(c, clean, 32768, 200, false);
  const bool shrink = d13 > 0.0 && d15 > 0.0 && d13 >= 2.0 * d15;
  const bool ok = audit && shrink;
  std::printf("criterion 4: %s — DP audit worst log-ratio/eps %.6f (<= 1); cdp eps=1 excess "
              "%.2e at n=2^13 vs %.2e at n=2^15 (shrink %.2fx, need >= 2)\n",
              ok ? "PASS" : "FAIL", worst, d13, d15, d15 > 0.0 ? d13 / d15 : -1.0);
  return ok;
}

bool criterion5() {
  const RegressionInstance inst = regression_instance();
  Adversary adv;
  const PipelineSetting clean = parse_setting("clean", kInfEps, 0.0, adv);
  auto errs = [&](const PipelineSetting& set, long n, int seeds) {
    return bound_curve_experiment(inst, set, {n}, seeds, kMasterSeed)[0].errs;
  };

  // (a) clean error curve decays roughly like 1/n.
  std::vector<std::pair<double, double>> pts;
  for (int k = 7; k <= 13; ++k) {
    const long n = 1L << k;
    pts.emplace_back(static_cast<double>(n), mean_of(errs(clean, n, 100)));
  }
  const double slope = rate_fit(pts).slope;
  const bool a_ok = slope >= -1.35 && slope <= -0.65;

  // (b) LDP inflates the error by about c(eps)^2.
  const double base = mean_of(errs(clean, 2048, 200));
  bool b_ok = true;
  for (double eps : {0.5, 1.0, 2.0}) {
    const double r = mean_of(errs(parse_setting("ldp_only", eps, 0.0, adv), 2048, 200)) / base;
    const double c2 = c_factor(eps) * c_factor(eps);
    b_ok = b_ok && r >= c2 / 3.0 && r <= 3.0 * c2;
  }

  // (c) corrupt-then-localize is never harder than localize-then-corrupt:
  // under the Flip adversary the two channels coincide in distribution, so
  // the test is one-sided — fail only if CTL is significantly worse.
  const auto ctl = errs(parse_setting("ctl", 0.5, 0.1, adv), 8192, 200);
  const auto ltc = errs(parse_setting("ltc", 0.5, 0.1, adv), 8192, 200);
  const PairedT pt = paired_t(ctl, ltc);  // mean of LTC - CTL
  const bool c_ok = pt.t >= -kTCrit199;

  // (d) the cdp excess tracks the 1/(n eps) + alpha envelope across a grid.
  const double base1024 = mean_of(errs(clean, 1024, 200));
  double rmin = 1e300, rmax = -1e300;
  bool pos = true;
  for (double eps : {0.5, 1.0})
    for (double al : {0.1, 0.2}) {
      const double diff =
          mean_of(errs(parse_setting("cdp", eps, al, adv), 1024, 200)) - base1024;
      if (diff <= 0.0) pos = false;
      const double r = diff / (1.0 / (1024.0 * eps) + al);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
  const bool d_ok = pos && rmax / rmin <= 3.0;

  const bool ok = a_ok && b_ok && c_ok && d_ok;
  std::printf("criterion 5: %s — regression lab: slope %.3f%s, LDP ratios%s, "
              "LTC-CTL t=%.2f%s, cdp envelope %.2f%s\n",
              ok ? "PASS" : "FAIL", slope, a_ok ? "+" : "-", b_ok ? "+" : "-", pt.t,
              c_ok ? "+" : "-", rmax / rmin, d_ok ? "+" : "-");
  return ok;
}

bool criterion6(const AlignCtx& c) {
  bool ok = true;

  // Concentrability = 2 D_chi2 + 1, rho-weighted, exactly.
  RngStream rng(derive_stream_id(kMasterSeed, stable_hash("identity-suite"), "class"));
  double worst_c = 0.0;
  for (int t = 0; t < 100; ++t) {
    TabularPolicy pi{Table2(c.inst.num_contexts, c.inst.num_actions)};
    for (int x = 0; x < c.inst.num_contexts; ++x) rng.dirichlet_unit(pi.probs.row(x));
    double d = 0.0;
    for (int x = 0; x < c.inst.num_contexts; ++x)
      d += c.inst.rho[static_cast<std::size_t>(x)] *
           chi2_divergence(pi.probs.row(x), c.inst.pi_ref.row(x));
    worst_c = std::max(worst_c, std::abs(concentrability(pi, c.inst) - (2.0 * d + 1.0)));
  }
  ok = ok && worst_c <= 1e-10;

  // pi*_beta stationarity and err_stat closure.
  double worst_resid = 0.0, worst_err = 0.0;
  for (double beta : {0.05, 0.3, 1.0}) {
    const TabularPolicy star = solve_pi_beta_star(c.inst, beta);
    for (int x = 0; x < c.inst.num_contexts; ++x) {
      double mean = 0.0;
      std::vector<double> resid(static_cast<std::size_t>(c.inst.num_actions));
      for (int a = 0; a < c.inst.num_actions; ++a) {
        resid[static_cast<std::size_t>(a)] =
            c.inst.reward->at(x, a) - beta * phi(star.probs.at(x, a) / c.inst.pi_ref.at(x, a));
        mean += resid[static_cast<std::size_t>(a)];
      }
      mean /= c.inst.num_actions;
      for (double r : resid) worst_resid = std::max(worst_resid, std::abs(r - mean));
    }
    worst_err = std::max(worst_err, err_stat(star, c.inst, beta, c.inst.r_max));
  }
  ok = ok && worst_resid <= 1e-8 && worst_err <= 1e-6;

  // Mean-value bound for the sigmoid on [-R, R], with the frozen spot value.
  bool lemma = true;
  RngStream lrng(derive_stream_id(kMasterSeed, stable_hash("identity-suite"), "data"));
  for (double R : {1.0, 2.0, 4.0}) {
    const double bound = std::exp(-R) + 2.0 + std::exp(R);
    for (int i = 0; i < 10000; ++i) {
      const double z = lrng.uniform(-R, R), z2 = lrng.uniform(-R, R);
      lemma = lemma &&
              std::abs(z - z2) <= bound * std::abs(sigmoid(z) - sigmoid(z2)) + 1e-12;
    }
  }
  const double spot =
      (std::exp(-1.0) + 2.0 + std::exp(1.0)) * std::abs(sigmoid(1.0) - sigmoid(-1.0));
  lemma = lemma && std::abs(spot - 2.3501) <= 1e-3 && spot >= 2.0;
  ok = ok && lemma;

  std::printf("criterion 6: %s — identity suite: concentrability gap %.1e, stationarity "
              "residual %.1e, err_stat(pi*) %.1e, sigmoid bound %s (spot %.4f)\n",
              ok ? "PASS" : "FAIL", worst_c, worst_resid, worst_err, lemma ? "holds" : "fails",
              spot);
  return ok;
}

bool criterion7() {
  RngStream rng(derive_stream_id(kMasterSeed, stable_hash("grad-check"), "class"));
  AlignmentInstance inst = generate_bt_instance(2, 3, 1.0, rng);
  FeatureMap fm;
  fm.num_contexts = 2;
  fm.num_actions = 3;
  fm.dim = 3;
  for (int i = 0; i < 2 * 3 * 3; ++i) fm.psi.push_back(rng.uniform(-1.0, 1.0));
  ObservedDataset data;
  data.samples = sample_preference_dataset(inst, 20, rng);
  Table3 ell(2, 3, 3, 0.0);
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < a; ++b) {
        const double v = rng.uniform(-0.8, 0.8);
        ell.at(x, a, b) = v;
        ell.at(x, b, a) = -v;
      }
  std::vector<UnlabeledTriple> triples;
  for (int i = 0; i < 25; ++i)
    triples.push_back({static_cast<int>(rng.next_u64() % 2), static_cast<int>(rng.next_u64() % 3),
                       static_cast<int>(rng.next_u64() % 3)});
  const std::vector<int> bt = {1, 2};
  const SquareChiPOSpec spec{0.6, 1.0, kInfEps};
  const double sp_beta = 0.5, sp_eta = 0.25;
  const TabularPolicy pi_t = reference_policy(inst);
  const double step = 1e-5;

  double worst_sq = 0.0, worst_po = 0.0;
  int n_sq = 0, n_po = 0, guard = 0;
  while ((n_sq < 20 || n_po < 20) && ++guard < 500) {
    LogLinearPolicy pol;
    pol.features = &fm;
    for (int k = 0; k < fm.dim; ++k) pol.theta.push_back(rng.uniform(-0.8, 0.8));
    const TabularPolicy tab = to_tabular(pol, inst.pi_ref);

    bool near_sq = false, near_po = false;
    for (const auto& s : data.samples) {
      const double u = spec.beta * h_chipo(tab, inst.pi_ref, s.x, s.a1, s.a0);
      near_sq = near_sq || std::abs(std::abs(u) - 2.0 * spec.r_max) < 1e-3;
    }
    for (const auto& tr : triples) {
      const double f = f_beta_eta(tab, pi_t, inst.pi_ref, sp_beta, sp_eta, tr.x, tr.a, tr.b);
      near_po = near_po || std::abs(std::abs(f) - 4.0) < 1e-3;
    }

    auto rel_err = [](const std::vector<double>& g, const std::vector<double>& fd) {
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        num += (g[k] - fd[k]) * (g[k] - fd[k]);
        den += fd[k] * fd[k];
      }
      return std::sqrt(num) / std::max(std::sqrt(den), 1e-8);
    };

    if (n_sq < 20 && !near_sq) {
      const auto g = square_chipo_loss_grad(pol, inst.pi_ref, data, spec);
      std::vector<double> fd(pol.theta.size());
      for (std::size_t k = 0; k < pol.theta.size(); ++k) {
        LogLinearPolicy up = pol, dn = pol;
        up.theta[k] += step;
        dn.theta[k] -= step;
        fd[k] = (square_chipo_loss(up, inst.pi_ref, data, spec) -
                 square_chipo_loss(dn, inst.pi_ref, data, spec)) / (2.0 * step);
      }
      worst_sq = std::max(worst_sq, rel_err(g, fd));
      ++n_sq;
    }
    if (n_po < 20 && !near_po) {
      const auto g = policy_opt_loss_grad(pol, pi_t, ell, triples, bt, inst.pi_ref, sp_beta,
                                          sp_eta);
      std::vector<double> fd(pol.theta.size());
      for (std::size_t k = 0; k < pol.theta.size(); ++k) {
        LogLinearPolicy up = pol, dn = pol;
        up.theta[k] += step;
        dn.theta[k] -= step;
        fd[k] = (policy_opt_loss(up, pi_t, ell, triples, bt, inst.pi_ref, sp_beta, sp_eta) -
                 policy_opt_loss(dn, pi_t, ell, triples, bt, inst.pi_ref, sp_beta, sp_eta)) /
                (2.0 * step);
      }
      worst_po = std::max(worst_po, rel_err(g, fd));
      ++n_po;
    }
  }
  const bool ok = n_sq == 20 && n_po == 20 && worst_sq <= 1e-4 && worst_po <= 1e-4;
  std::printf("criterion 7: %s — finite-difference gradients: square loss rel err %.2e, "
              "policy-opt loss rel err %.2e over 20 points each (<= 1e-4)\n",
              ok ? "PASS" : "FAIL", worst_sq, worst_po);
  return ok;
}

bool criterion8() {
  AlignmentInstance inst = selfplay_instance();
  PreferenceModelClass models = selfplay_model_class();
  FinitePolicyClass policies = selfplay_policy_class();
  Adversary adv;
  const PipelineSetting clean = parse_setting("clean", kInfEps, 0.0, adv);
  const double dg_ref = duality_gap(Policy{reference_policy(inst)}, inst, policies);

  double mean_small = 0.0, mean_big = 0.0;
  int le_ref_big = 0;
  for (long nm : {128L, 4096L}) {
    double acc = 0.0;
    for (int seed = 0; seed < 50; ++seed) {
      const std::string key = "sp|n=" + std::to_string(nm) + "|s=" + std::to_string(seed);
      RngStream data_rng(derive_stream_id(kMasterSeed, stable_hash(key), "data"));
      RngStream chan_rng(derive_stream_id(kMasterSeed, stable_hash(key), "channel"));
      RngStream mech_rng(derive_stream_id(kMasterSeed, stable_hash(key), "mech"));
      RngStream play_rng(derive_stream_id(kMasterSeed, stable_hash(key), "selfplay"));
      auto raw = sample_preference_dataset(inst, nm, data_rng);
      ObservedDataset data = apply_pipeline(raw, clean, chan_rng);
      const int idx = estimate_preference_model(data, models, clean, mech_rng);
      const SelfPlayConfig cfg = SelfPlayConfig::theorem_schedule(32, nm, clean);
      const SelfPlayResult res = iterative_squarechipo(
          inst, models.members[static_cast<std::size_t>(idx)], policies, cfg, play_rng);
      const double dg = duality_gap(Policy{res.mixture}, inst, policies);
      acc += dg;
      if (nm == 4096) le_ref_big += dg <= dg_ref + 1e-12;
    }
    (nm == 128 ? mean_small : mean_big) = acc / 50.0;
  }
  const bool ok = mean_big <= 0.5 * mean_small && le_ref_big == 50;
  std::printf("criterion 8: %s — self-play duality gap: mean %.4f at n=m=2^7 vs %.4f at "
              "n=m=2^12 (ratio %.2f, need >= 2); DG <= DG(pi_ref) in %d/50 large-n seeds\n",
              ok ? "PASS" : "FAIL", mean_small, mean_big,
              mean_big > 0.0 ? mean_small / mean_big : -1.0, le_ref_big);
  return ok;
}

bool criterion9() {
  Table2 dom(2, 2);
  dom.at(0, 0) = 0.0;
  dom.at(0, 1) = 1.0;
  dom.at(1, 0) = -1.0;
  dom.at(1, 1) = 0.0;
  const GameSolution a = solve_matrix_game(dom, 20000, 1e-6);
  const bool dom_ok = a.gap <= 1e-4 && std::abs(a.value) <= 1e-4 &&
                      std::abs(a.row_mix[0] - 1.0) <= 1e-4;

  Table2 mp(2, 2);
  mp.at(0, 0) = 1.0;
  mp.at(0, 1) = -1.0;
  mp.at(1, 0) = -1.0;
  mp.at(1, 1) = 1.0;
  const GameSolution b = solve_matrix_game(mp, 50000, 1e-5);
  const bool mp_ok = b.gap <= 1e-4 && std::abs(b.value) <= 1e-4 &&
                     std::abs(b.row_mix[0] - 0.5) <= 2e-2 && std::abs(b.col_mix[0] - 0.5) <= 2e-2;

  Table2 one(1, 1, 0.7);
  const GameSolution t = solve_matrix_game(one, 10, 1e-9);
  const bool one_ok = t.gap == 0.0 && t.value == 0.7;

  const bool ok = dom_ok && mp_ok && one_ok;
  std::printf("criterion 9: %s — game oracles: dominant-row gap %.1e, matching-pennies gap "
              "%.1e (mix %.3f/%.3f), 1x1 value %.1f\n", ok ? "PASS" : "FAIL", a.gap, b.gap,
              b.row_mix[0], b.col_mix[0], t.value);
  return ok;
}

bool criterion10() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "brier_acceptance_cli";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "config.json";
  {
    std::ofstream out(cfg_path);
    out << R"({"schema_version":1,"algorithm":"square_chipo","n_grid":[64,128],
               "beta":{"mode":"fixed","value":0.25},"seeds":3,"master_seed":7})";
  }
  auto run = [&](const std::string& out_dir) {
    const std::string cmd = std::string(CLI_PATH) + " run --config " + cfg_path.string() +
                            " --out " + out_dir + " --jobs 2 > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const int rc1 = run((base / "a").string());
  const int rc2 = run((base / "b").string());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string csv1 = slurp(base / "a" / "records.csv");
  const std::string csv2 = slurp(base / "b" / "records.csv");
  const bool ok = rc1 == 0 && rc2 == 0 && !csv1.empty() && csv1 == csv2;
  std::printf("criterion 10: %s — CLI rerun byte-identical records.csv (%zu bytes, exit codes "
              "%d/%d)\n", ok ? "PASS" : "FAIL", csv1.size(), rc1, rc2);
  fs::remove_all(base);
  return ok;
}

}  // namespace

int main() {
  const AlignCtx ctx;
  int failures = 0;
  failures += !criterion1(ctx);
  failures += !criterion2(ctx);
  failures += !criterion3(ctx);
  failures += !criterion4(ctx);
  failures += !criterion5();
  failures += !criterion6(ctx);
  failures += !criterion7();
  failures += !criterion8();
  failures += !criterion9();
  failures += !criterion10();
  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
