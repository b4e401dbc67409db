#include "brier/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "brier/eval.hpp"
#include "brier/objectives.hpp"
#include "brier/presets.hpp"
#include "brier/regression.hpp"
#include "brier/rng.hpp"
#include "brier/selfplay.hpp"
#include "brier/solvers.hpp"

namespace brier {

namespace {

const char* kAlgoNames[] = {"square_chipo", "log_chipo", "dpo",
                            "cdp_sample",   "selfplay",  "regression_lab"};

}  // namespace

std::string algorithm_name(Algorithm a) { return kAlgoNames[static_cast<int>(a)]; }

Algorithm parse_algorithm(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kAlgoNames[i]) return static_cast<Algorithm>(i);
  throw std::invalid_argument("config: unknown algorithm '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (schema_version != 1) throw std::invalid_argument("config.schema_version: must be 1");
  if (algorithms.empty()) throw std::invalid_argument("config.algorithm: empty");
  if (n_grid.empty()) throw std::invalid_argument("config.n_grid: empty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw std::invalid_argument("config.n_grid: entries must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("config.n_grid: must be strictly increasing");
  }
  if (seeds < 1) throw std::invalid_argument("config.seeds: must be >= 1");
  if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("config.zeta: must be in (0,1)");
  if (num_distractors < 0)
    throw std::invalid_argument("config.num_distractors: must be >= 0");
  if (beta.mode == BetaSpec::Mode::Fixed && !(beta.value > 0.0))
    throw std::invalid_argument("config.beta.value: must be positive");
  if (beta.mode == BetaSpec::Mode::Grid) {
    if (beta.grid.empty()) throw std::invalid_argument("config.beta.grid: empty");
    for (double b : beta.grid)
      if (!(b > 0.0)) throw std::invalid_argument("config.beta.grid: entries must be positive");
  }
  for (double e : epsilon_axis)
    if (!(e > 0.0)) throw std::invalid_argument("config.sweep.epsilon: entries must be positive");
  for (double a : alpha_axis)
    if (a < 0.0 || a > 0.5)
      throw std::invalid_argument("config.sweep.alpha: entries must be in [0, 1/2]");
  const bool bt_instance =
      instance.source == InstanceSpec::Source::Generate ? instance.mode == "bt"
                                                        : instance.preset == "reference_bt";
  for (Algorithm a : algorithms) {
    if (a == Algorithm::SelfPlay) {
      if (m < 1 || T < 1)
        throw std::invalid_argument("config: selfplay requires m >= 1 and T >= 1");
      if (instance.source == InstanceSpec::Source::Preset && instance.preset != "selfplay_2x2")
        throw std::invalid_argument("config.instance.preset: selfplay needs selfplay_2x2");
      if (instance.source == InstanceSpec::Source::Generate && instance.mode != "general")
        throw std::invalid_argument("config.instance.mode: selfplay needs general mode");
    } else if (a != Algorithm::RegressionLab) {
      if (instance.source != InstanceSpec::Source::File && !bt_instance)
        throw std::invalid_argument("config.instance: BT-mode instance required for " +
                                    algorithm_name(a));
    }
    if (a == Algorithm::CdpSample && setting_kind != "cdp")
      throw std::invalid_argument("config.setting.kind: cdp_sample requires the cdp setting");
    if (a != Algorithm::CdpSample && a != Algorithm::RegressionLab && setting_kind == "cdp")
      throw std::invalid_argument("config.setting.kind: cdp setting requires cdp_sample");
  }
}

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : allowed)
      if (key == k) { ok = true; break; }
    if (!ok) throw std::invalid_argument("config" + path + ": unknown field '" + key + "'");
  }
}

double parse_eps(const nlohmann::json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfEps;
    throw std::invalid_argument("config" + path + ": expected a number or \"inf\"");
  }
  return j.get<double>();
}

Adversary parse_adversary(const nlohmann::json& j) {
  reject_unknown(j, {"kind", "constant", "q"}, ".setting.adversary");
  Adversary adv;
  const std::string kind = j.value("kind", "flip");
  if (kind == "flip") adv.kind = AdversaryKind::Flip;
  else if (kind == "constant") adv.kind = AdversaryKind::ConstantLabel;
  else if (kind == "bernoulli") adv.kind = AdversaryKind::BernoulliQ;
  else throw std::invalid_argument("config.setting.adversary.kind: unknown '" + kind + "'");
  adv.constant = j.value("constant", 1);
  adv.q = j.value("q", 0.5);
  adv.validate();
  return adv;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  reject_unknown(j,
                 {"schema_version", "instance", "algorithm", "setting", "sweep", "beta", "n_grid",
                  "m", "T", "num_distractors", "seeds", "master_seed", "zeta", "out"},
                 "");
  ExperimentConfig cfg;
  cfg.schema_version = j.value("schema_version", 0);

  if (j.contains("instance")) {
    const auto& ji = j.at("instance");
    reject_unknown(ji, {"source", "preset", "path", "mode", "num_contexts", "num_actions",
                        "r_max", "seed"},
                   ".instance");
    const std::string src = ji.value("source", "preset");
    if (src == "preset") cfg.instance.source = InstanceSpec::Source::Preset;
    else if (src == "file") cfg.instance.source = InstanceSpec::Source::File;
    else if (src == "generate") cfg.instance.source = InstanceSpec::Source::Generate;
    else throw std::invalid_argument("config.instance.source: unknown '" + src + "'");
    cfg.instance.preset = ji.value("preset", "reference_bt");
    cfg.instance.path = ji.value("path", "");
    cfg.instance.mode = ji.value("mode", "bt");
    cfg.instance.num_contexts = ji.value("num_contexts", 3);
    cfg.instance.num_actions = ji.value("num_actions", 3);
    cfg.instance.r_max = ji.value("r_max", 1.0);
    cfg.instance.seed = ji.value("seed", std::uint64_t{0});
  }

  const auto& ja = j.at("algorithm");
  if (ja.is_string()) cfg.algorithms = {parse_algorithm(ja.get<std::string>())};
  else
    for (const auto& a : ja) cfg.algorithms.push_back(parse_algorithm(a.get<std::string>()));

  if (j.contains("setting")) {
    const auto& js = j.at("setting");
    reject_unknown(js, {"kind", "epsilon", "alpha", "adversary"}, ".setting");
    cfg.setting_kind = js.value("kind", "clean");
    if (js.contains("epsilon")) cfg.epsilon = parse_eps(js.at("epsilon"), ".setting.epsilon");
    cfg.alpha = js.value("alpha", 0.0);
    if (js.contains("adversary")) cfg.adversary = parse_adversary(js.at("adversary"));
  }

  if (j.contains("sweep")) {
    const auto& jw = j.at("sweep");
    reject_unknown(jw, {"epsilon", "alpha"}, ".sweep");
    if (jw.contains("epsilon"))
      for (const auto& e : jw.at("epsilon"))
        cfg.epsilon_axis.push_back(parse_eps(e, ".sweep.epsilon"));
    if (jw.contains("alpha")) cfg.alpha_axis = jw.at("alpha").get<std::vector<double>>();
  }

  if (j.contains("beta")) {
    const auto& jb = j.at("beta");
    reject_unknown(jb, {"mode", "value", "grid"}, ".beta");
    const std::string mode = jb.value("mode", "fixed");
    if (mode == "oracle") cfg.beta.mode = BetaSpec::Mode::Oracle;
    else if (mode == "fixed") cfg.beta.mode = BetaSpec::Mode::Fixed;
    else if (mode == "grid") cfg.beta.mode = BetaSpec::Mode::Grid;
    else throw std::invalid_argument("config.beta.mode: unknown '" + mode + "'");
    cfg.beta.value = jb.value("value", 0.25);
    if (jb.contains("grid")) cfg.beta.grid = jb.at("grid").get<std::vector<double>>();
  }

  cfg.n_grid = j.at("n_grid").get<std::vector<long>>();
  cfg.m = j.value("m", 0L);
  cfg.T = j.value("T", 0);
  cfg.num_distractors = j.value("num_distractors", 15);
  cfg.seeds = j.value("seeds", 1);
  cfg.master_seed = j.value("master_seed", std::uint64_t{1});
  cfg.zeta = j.value("zeta", 0.05);
  cfg.out_dir = j.value("out", "");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

AlignmentInstance build_instance(const ExperimentConfig& cfg) {
  switch (cfg.instance.source) {
    case InstanceSpec::Source::File:
      return load_instance_json(cfg.instance.path);
    case InstanceSpec::Source::Generate: {
      RngStream rng(derive_stream_id(cfg.instance.seed, stable_hash("generated-instance"),
                                     "instance"));
      return cfg.instance.mode == "bt"
                 ? generate_bt_instance(cfg.instance.num_contexts, cfg.instance.num_actions,
                                        cfg.instance.r_max, rng)
                 : generate_general_instance(cfg.instance.num_contexts,
                                             cfg.instance.num_actions, rng);
    }
    case InstanceSpec::Source::Preset:
      if (cfg.instance.preset == "reference_bt") return reference_instance();
      if (cfg.instance.preset == "selfplay_2x2") return selfplay_instance();
      if (cfg.instance.preset == "regression_lab") return selfplay_instance();  // unused shell
      throw std::invalid_argument("config.instance.preset: unknown '" + cfg.instance.preset +
                                  "'");
  }
  throw std::logic_error("build_instance: unreachable");
}

std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg) {
  std::vector<double> eps_axis =
      cfg.epsilon_axis.empty() ? std::vector<double>{cfg.epsilon} : cfg.epsilon_axis;
  std::vector<double> alpha_axis =
      cfg.alpha_axis.empty() ? std::vector<double>{cfg.alpha} : cfg.alpha_axis;
  std::vector<std::optional<double>> betas;
  if (cfg.beta.mode == BetaSpec::Mode::Oracle) betas.push_back(std::nullopt);
  else if (cfg.beta.mode == BetaSpec::Mode::Fixed) betas.push_back(cfg.beta.value);
  else
    for (double b : cfg.beta.grid) betas.push_back(b);

  std::vector<CellSpec> cells;
  for (Algorithm algo : cfg.algorithms)
    for (double eps : eps_axis)
      for (double alpha : alpha_axis)
        for (const auto& b : betas)
          for (long n : cfg.n_grid)
            for (long seed = 0; seed < cfg.seeds; ++seed) {
              CellSpec c;
              c.algorithm = algo;
              c.setting = parse_setting(cfg.setting_kind, eps, alpha, cfg.adversary);
              c.fixed_beta = b;
              c.n = n;
              c.seed = seed;
              cells.push_back(c);
            }
  return cells;
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string cell_key(const CellSpec& cell) {
  std::string key = "align|" + algorithm_name(cell.algorithm) + "|" + cell.setting.name() +
                    "|eps=" + fmt_double(cell.setting.epsilon) +
                    "|alpha=" + fmt_double(cell.setting.alpha);
  if (cell.fixed_beta) key += "|beta=" + fmt_double(*cell.fixed_beta);
  key += "|n=" + std::to_string(cell.n) + "|seed=" + std::to_string(cell.seed);
  return key;
}

double oracle_cell_beta(const ExperimentConfig& cfg, const AlignmentInstance& inst,
                        const CellSpec& cell, double c_star) {
  const auto& s = cell.setting;
  double c_eff = 1.0;
  if (s.local_private()) c_eff = c_factor(s.epsilon);
  else if (s.central_private()) c_eff = 1.0 + 1.0 / std::sqrt(s.epsilon);
  double corr = 0.0;
  if (s.corrupts() && s.alpha > 0.0)
    corr = s.kind == SettingKind::LTC ? std::sqrt(s.alpha * c_factor(s.epsilon))
                                      : std::sqrt(s.alpha);
  const double cls_size = static_cast<double>(cfg.num_distractors + 1);
  const double err_est =
      c_eff * std::sqrt(std::log(cls_size / cfg.zeta) / static_cast<double>(cell.n)) + corr;
  return oracle_beta(c_star, err_est, 2.0 * inst.r_max, inst.r_max);
}

RunRecord run_bt_cell(const ExperimentConfig& cfg, const AlignmentInstance& inst,
                      const CellSpec& cell) {
  const std::string key = cell_key(cell);
  RngStream class_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "class"));
  RngStream data_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "data"));
  RngStream chan_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "channel"));
  RngStream mech_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "mech"));

  const TabularPolicy star = greedy_policy(inst);
  const double c_star = concentrability(star, inst);
  const double beta =
      cell.fixed_beta ? *cell.fixed_beta : oracle_cell_beta(cfg, inst, cell, c_star);

  FinitePolicyClass cls =
      build_realizable_class(inst, beta, cfg.num_distractors, class_rng);
  const auto clean = sample_preference_dataset(inst, cell.n, data_rng);
  const ObservedDataset data = apply_pipeline(clean, cell.setting, chan_rng);

  int chosen = 0;
  switch (cell.algorithm) {
    case Algorithm::SquareChiPO: {
      const double loss_eps = cell.setting.local_private() ? cell.setting.epsilon : kInfEps;
      chosen = fit_finite(cls, [&](const TabularPolicy& pi) {
                 return square_chipo_loss(pi, inst.pi_ref, data,
                                          SquareChiPOSpec{beta, inst.r_max, loss_eps});
               }).index;
      break;
    }
    case Algorithm::LogChiPO:
      chosen = fit_finite(cls, [&](const TabularPolicy& pi) {
                 return log_chipo_loss(pi, inst.pi_ref, data, LogChiPOSpec{beta, inst.r_max});
               }).index;
      break;
    case Algorithm::DPO:
      chosen = fit_finite(cls, [&](const TabularPolicy& pi) {
                 return dpo_loss(pi, inst.pi_ref, data, DPOSpec{beta});
               }).index;
      break;
    case Algorithm::CdpSample:
      chosen = sample_policy_cdp(cls, inst.pi_ref, data, CentralScoreSpec{beta, inst.r_max},
                                 cell.setting.epsilon, mech_rng);
      break;
    default:
      throw std::logic_error("run_bt_cell: non-BT algorithm");
  }

  const TabularPolicy& fitted = cls.members[static_cast<std::size_t>(chosen)];
  RunRecord rec;
  rec.algorithm = algorithm_name(cell.algorithm);
  rec.setting = cell.setting.name();
  rec.epsilon = cell.setting.epsilon;
  rec.alpha = cell.setting.alpha;
  rec.n = cell.n;
  rec.seed = cell.seed;
  rec.beta = beta;
  rec.chosen_index = chosen;
  rec.sg = value_J(star, inst) - value_J(fitted, inst);
  rec.err_stat = err_stat(fitted, inst, beta, inst.r_max);
  rec.c_star = c_star;
  return rec;
}

RunRecord run_selfplay_cell(const ExperimentConfig& cfg, const AlignmentInstance& inst,
                            const CellSpec& cell) {
  const std::string key = cell_key(cell);
  RngStream data_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "data"));
  RngStream chan_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "channel"));
  RngStream mech_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "mech"));
  RngStream play_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "selfplay"));

  const PreferenceModelClass models = selfplay_model_class();
  const FinitePolicyClass policies = selfplay_policy_class();

  const auto clean = sample_preference_dataset(inst, cell.n, data_rng);
  const ObservedDataset data = apply_pipeline(clean, cell.setting, chan_rng);
  const int ell_idx = estimate_preference_model(data, models, cell.setting, mech_rng);
  const Table3& ell_hat = models.members[static_cast<std::size_t>(ell_idx)];

  const SelfPlayConfig sp = SelfPlayConfig::theorem_schedule(cfg.T, cfg.m, cell.setting);
  const SelfPlayResult res = iterative_squarechipo(inst, ell_hat, policies, sp, play_rng);

  double err2 = 0.0;
  for (int x = 0; x < inst.num_contexts; ++x)
    for (int a = 0; a < inst.num_actions; ++a)
      for (int b = 0; b < inst.num_actions; ++b) {
        const double d = ell_hat.at(x, a, b) - inst.ell_star->at(x, a, b);
        err2 += inst.rho[static_cast<std::size_t>(x)] * inst.pi_ref.at(x, a) *
                inst.pi_ref.at(x, b) * d * d;
      }

  RunRecord rec;
  rec.algorithm = algorithm_name(cell.algorithm);
  rec.setting = cell.setting.name();
  rec.epsilon = cell.setting.epsilon;
  rec.alpha = cell.setting.alpha;
  rec.n = cell.n;
  rec.m = cfg.m;
  rec.T = cfg.T;
  rec.seed = cell.seed;
  rec.beta = sp.beta;
  rec.chosen_index = ell_idx;
  rec.dg = duality_gap(Policy{res.mixture}, inst, policies);
  rec.err2_gen = err2;
  return rec;
}

RunRecord run_regression_cell(const ExperimentConfig& cfg, const CellSpec& cell) {
  const RegressionInstance inst = regression_instance();
  const std::string key = cell_key(cell);
  RngStream data_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "data"));
  RngStream chan_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "channel"));
  RngStream fit_rng(derive_stream_id(cfg.master_seed, stable_hash(key), "fit"));
  const auto clean = gen_regression_data(inst, cell.n, data_rng);
  const auto obs = apply_reg_channel(clean, cell.setting, chan_rng);
  const int idx =
      cell.setting.kind == SettingKind::CDP
          ? fit_ls_cdp(obs, inst, cell.setting.epsilon, fit_rng)
          : fit_ls_local(obs, inst,
                         cell.setting.local_private() ? cell.setting.epsilon : kInfEps);
  RunRecord rec;
  rec.algorithm = algorithm_name(cell.algorithm);
  rec.setting = cell.setting.name();
  rec.epsilon = cell.setting.epsilon;
  rec.alpha = cell.setting.alpha;
  rec.n = cell.n;
  rec.seed = cell.seed;
  rec.chosen_index = idx;
  rec.err2_gen = gen_error(idx, inst);
  return rec;
}

}  // namespace

RunRecord run_cell(const ExperimentConfig& cfg, const AlignmentInstance& inst,
                   const CellSpec& cell) {
  switch (cell.algorithm) {
    case Algorithm::SelfPlay:
      return run_selfplay_cell(cfg, inst, cell);
    case Algorithm::RegressionLab:
      return run_regression_cell(cfg, cell);
    default:
      return run_bt_cell(cfg, inst, cell);
  }
}

namespace {

bool record_less(const RunRecord& a, const RunRecord& b) {
  return std::tie(a.algorithm, a.setting, a.epsilon, a.alpha, a.beta, a.n, a.seed) <
         std::tie(b.algorithm, b.setting, b.epsilon, b.alpha, b.beta, b.n, b.seed);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  const AlignmentInstance inst = build_instance(cfg);
  const std::vector<CellSpec> cells = expand_cells(cfg);
  ExperimentResult result;
  result.records.resize(cells.size());
  std::vector<char> ok(cells.size(), 0);
  std::mutex fail_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const auto start = std::chrono::steady_clock::now();
      try {
        result.records[i] = run_cell(cfg, inst, cells[i]);
        result.records[i].wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        ok[i] = 1;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(fail_mu);
        result.failures.push_back(cell_key(cells[i]) + ": " + e.what());
      }
    }
  };

  const int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<RunRecord> kept;
  kept.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (ok[i]) kept.push_back(std::move(result.records[i]));
  std::sort(kept.begin(), kept.end(), record_less);
  std::sort(result.failures.begin(), result.failures.end());
  result.records = std::move(kept);
  return result;
}

namespace {

constexpr const char* kCsvHeader =
    "setting,epsilon,alpha,n,m,T,seed,beta,chosen_index,sg,dg,err_stat,err2_gen,c_star";

std::string record_row(const RunRecord& r) {
  std::string row = r.setting;
  row += ',';
  row += fmt_double(r.epsilon);
  row += ',';
  row += fmt_double(r.alpha);
  row += ',';
  row += std::to_string(r.n);
  row += ',';
  if (r.m >= 0) row += std::to_string(r.m);
  row += ',';
  if (r.T >= 0) row += std::to_string(r.T);
  row += ',';
  row += std::to_string(r.seed);
  row += ',';
  row += fmt_double(r.beta);
  row += ',';
  if (r.chosen_index >= 0) row += std::to_string(r.chosen_index);
  row += ',';
  row += fmt_double(r.sg);
  row += ',';
  row += fmt_double(r.dg);
  row += ',';
  row += fmt_double(r.err_stat);
  row += ',';
  row += fmt_double(r.err2_gen);
  row += ',';
  row += fmt_double(r.c_star);
  return row;
}

}  // namespace

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += record_row(r);
    out += '\n';
  }
  return out;
}

std::string timings_to_csv(const std::vector<RunRecord>& records) {
  std::string out = "algorithm,setting,epsilon,alpha,n,seed,wall_ms\n";
  for (const auto& r : records) {
    out += r.algorithm + ',' + r.setting + ',' + fmt_double(r.epsilon) + ',' +
           fmt_double(r.alpha) + ',' + std::to_string(r.n) + ',' + std::to_string(r.seed) +
           ',' + fmt_double(r.wall_ms) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double_field(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return kInfEps;
  if (s == "-inf") return -kInfEps;
  return std::stod(s);
}

}  // namespace

std::vector<RunRecord> parse_records_csv(const std::string& text) {
  std::vector<RunRecord> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file");
  if (line != kCsvHeader) throw std::invalid_argument("csv: unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 14) throw std::invalid_argument("csv: malformed row '" + line + "'");
    RunRecord r;
    r.setting = f[0];
    r.epsilon = parse_double_field(f[1]);
    r.alpha = parse_double_field(f[2]);
    r.n = std::stol(f[3]);
    r.m = f[4].empty() ? -1 : std::stol(f[4]);
    r.T = f[5].empty() ? -1 : std::stoi(f[5]);
    r.seed = std::stol(f[6]);
    r.beta = parse_double_field(f[7]);
    r.chosen_index = f[8].empty() ? -1 : std::stoi(f[8]);
    r.sg = parse_double_field(f[9]);
    r.dg = parse_double_field(f[10]);
    r.err_stat = parse_double_field(f[11]);
    r.err2_gen = parse_double_field(f[12]);
    r.c_star = parse_double_field(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

// The headline scalar of a record: sg for BT fits, dg for self-play,
// err2_gen for the regression lab.
double headline(const RunRecord& r) {
  if (!std::isnan(r.sg)) return r.sg;
  if (!std::isnan(r.dg)) return r.dg;
  return r.err2_gen;
}

struct SeriesKey {
  std::string algorithm, setting;
  double epsilon, alpha;
  bool operator<(const SeriesKey& o) const {
    return std::tie(algorithm, setting, epsilon, alpha) <
           std::tie(o.algorithm, o.setting, o.epsilon, o.alpha);
  }
};

struct SeriesStats {
  std::vector<long> ns;
  std::vector<double> means, stderrs, q95s;
};

std::map<SeriesKey, SeriesStats> aggregate(const std::vector<RunRecord>& records) {
  std::map<SeriesKey, std::map<long, std::vector<double>>> groups;
  for (const auto& r : records)
    groups[{r.algorithm, r.setting, r.epsilon, r.alpha}][r.n].push_back(headline(r));
  std::map<SeriesKey, SeriesStats> out;
  for (auto& [key, by_n] : groups) {
    SeriesStats s;
    for (auto& [n, vals] : by_n) {
      std::sort(vals.begin(), vals.end());
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      const double se = vals.size() > 1 ? std::sqrt(var / (static_cast<double>(vals.size()) *
                                                           (vals.size() - 1.0)))
                                        : 0.0;
      const std::size_t qi = static_cast<std::size_t>(
          std::ceil(0.95 * static_cast<double>(vals.size()))) - 1;
      s.ns.push_back(n);
      s.means.push_back(mean);
      s.stderrs.push_back(se);
      s.q95s.push_back(vals[std::min(qi, vals.size() - 1)]);
    }
    out[key] = std::move(s);
  }
  return out;
}

}  // namespace

std::string summary_json(const std::vector<RunRecord>& records, double zeta) {
  const auto series = aggregate(records);
  nlohmann::json j;
  j["zeta"] = zeta;
  j["rows"] = records.size();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [key, s] : series) {
    nlohmann::json e;
    e["algorithm"] = key.algorithm;
    e["setting"] = key.setting;
    e["epsilon"] = std::isinf(key.epsilon) ? nlohmann::json("inf") : nlohmann::json(key.epsilon);
    e["alpha"] = key.alpha;
    e["n"] = s.ns;
    e["mean"] = s.means;
    e["stderr"] = s.stderrs;
    e["q95"] = s.q95s;
    bool positive = s.ns.size() >= 3;
    for (double m : s.means) positive = positive && m > 0.0;
    if (positive) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < s.ns.size(); ++i)
        pts.emplace_back(static_cast<double>(s.ns[i]), s.means[i]);
      e["slope"] = rate_fit(pts).slope;
    } else {
      e["slope"] = nullptr;
    }
    arr.push_back(std::move(e));
  }
  j["series"] = std::move(arr);
  return j.dump(2) + "\n";
}

namespace {

std::string svg_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

}  // namespace

std::string render_svg(const std::vector<RunRecord>& records) {
  const auto series = aggregate(records);
  const double W = 640, H = 480, L = 70, R = 20, Tm = 20, B = 50;
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& [key, s] : series)
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
      if (!(s.means[i] > 0.0)) continue;
      min_x = std::min(min_x, std::log10(static_cast<double>(s.ns[i])));
      max_x = std::max(max_x, std::log10(static_cast<double>(s.ns[i])));
      min_y = std::min(min_y, std::log10(s.means[i]));
      max_y = std::max(max_y, std::log10(s.means[i]));
    }
  if (min_x > max_x) { min_x = 0; max_x = 1; min_y = 0; max_y = 1; }
  if (max_x - min_x < 1e-9) max_x = min_x + 1;
  if (max_y - min_y < 1e-9) max_y = min_y + 1;
  auto px = [&](double lx) { return L + (lx - min_x) / (max_x - min_x) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - min_y) / (max_y - min_y) * (H - Tm - B); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
                    "viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<line x1=\"" + fmt_double(L) + "\" y1=\"" + fmt_double(H - B) + "\" x2=\"" +
         fmt_double(W - R) + "\" y2=\"" + fmt_double(H - B) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt_double(L) + "\" y1=\"" + fmt_double(Tm) + "\" x2=\"" +
         fmt_double(L) + "\" y2=\"" + fmt_double(H - B) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt_double(W / 2) + "\" y=\"" + fmt_double(H - 12) +
         "\" font-size=\"13\" text-anchor=\"middle\">log10 n</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt_double(H / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt_double(H / 2) + ")\">log10 mean</text>\n";

  std::size_t si = 0;
  double legend_y = Tm + 14;
  for (const auto& [key, s] : series) {
    const std::string color = svg_color(si++);
    std::string pts;
    for (std::size_t i = 0; i < s.ns.size(); ++i) {
      if (!(s.means[i] > 0.0)) continue;
      const double x = px(std::log10(static_cast<double>(s.ns[i])));
      const double y = py(std::log10(s.means[i]));
      pts += fmt_double(x) + "," + fmt_double(y) + " ";
      // stderr whiskers in log space
      const double lo = s.means[i] - s.stderrs[i], hi = s.means[i] + s.stderrs[i];
      if (lo > 0.0) {
        svg += "<line x1=\"" + fmt_double(x) + "\" y1=\"" + fmt_double(py(std::log10(lo))) +
               "\" x2=\"" + fmt_double(x) + "\" y2=\"" + fmt_double(py(std::log10(hi))) +
               "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
      }
      svg += "<circle cx=\"" + fmt_double(x) + "\" cy=\"" + fmt_double(y) +
             "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
    }
    if (!pts.empty())
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    std::string label = key.algorithm + " " + key.setting;
    if (!std::isinf(key.epsilon)) label += " eps=" + fmt_double(key.epsilon);
    if (key.alpha > 0.0) label += " alpha=" + fmt_double(key.alpha);
    svg += "<text x=\"" + fmt_double(W - R - 240) + "\" y=\"" + fmt_double(legend_y) +
           "\" font-size=\"11\" fill=\"" + color + "\">" + label + "</text>\n";
    legend_y += 14;
  }
  svg += "</svg>\n";
  return svg;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, int jobs, long budget) {
  const std::vector<CellSpec> cells = expand_cells(cfg);
  if (budget > 0 && static_cast<long>(cells.size()) > budget) {
    std::fprintf(stderr, "refusing to run %zu cells over the budget of %ld\n", cells.size(),
                 budget);
    return 3;
  }
  const ExperimentResult res = run_experiment(cfg, jobs);
  const std::filesystem::path dir = out_dir.empty() ? cfg.out_dir : out_dir;
  if (dir.empty()) throw std::invalid_argument("config.out: no output directory given");
  std::filesystem::create_directories(dir);
  write_file(dir / "records.csv", records_to_csv(res.records));
  {
    // The regression lab additionally reports its own flat schema.
    std::string reg = "n,seed,setting,epsilon,alpha,err2\n";
    bool any = false;
    for (const auto& r : res.records) {
      if (r.algorithm != "regression_lab") continue;
      any = true;
      reg += std::to_string(r.n) + ',' + std::to_string(r.seed) + ',' + r.setting + ',' +
             fmt_double(r.epsilon) + ',' + fmt_double(r.alpha) + ',' + fmt_double(r.err2_gen) +
             '\n';
    }
    if (any) write_file(dir / "regression.csv", reg);
  }
  write_file(dir / "timings.csv", timings_to_csv(res.records));
  write_file(dir / "summary.json", summary_json(res.records, cfg.zeta));
  write_file(dir / "plot.svg", render_svg(res.records));
  if (!res.failures.empty()) {
    std::string msg;
    for (const auto& f : res.failures) msg += f + "\n";
    write_file(dir / "failures.txt", msg);
    std::fprintf(stderr, "%zu cell(s) failed; see failures.txt\n", res.failures.size());
    return 4;
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& csv_paths, const std::string& out_dir) {
  std::vector<RunRecord> all;
  for (const auto& p : csv_paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::invalid_argument("report: cannot open " + p);
    std::stringstream ss;
    ss << in.rdbuf();
    auto recs = parse_records_csv(ss.str());
    for (auto& r : recs) {
      // The main CSV does not carry the algorithm; recover it from the row
      // shape so aggregation can still separate series.
      if (!std::isnan(r.sg)) r.algorithm = "bt_fit";
      else if (!std::isnan(r.dg)) r.algorithm = "selfplay";
      else r.algorithm = "regression_lab";
    }
    all.insert(all.end(), recs.begin(), recs.end());
  }
  std::filesystem::create_directories(out_dir);
  write_file(std::filesystem::path(out_dir) / "summary.json", summary_json(all, kZeta));
  write_file(std::filesystem::path(out_dir) / "plot.svg", render_svg(all));

  const auto series = aggregate(all);
  for (const auto& [key, s] : series) {
    std::string line = key.algorithm + " " + key.setting;
    if (!std::isinf(key.epsilon)) line += " eps=" + fmt_double(key.epsilon);
    if (key.alpha > 0.0) line += " alpha=" + fmt_double(key.alpha);
    bool positive = s.ns.size() >= 3;
    for (double m : s.means) positive = positive && m > 0.0;
    if (positive) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < s.ns.size(); ++i)
        pts.emplace_back(static_cast<double>(s.ns[i]), s.means[i]);
      const double slope = rate_fit(pts).slope;
      line += ": slope=" + fmt_double(slope);
      if (key.setting == "clean") {
        const bool reg = key.algorithm == "regression_lab";
        const double lo = reg ? -1.35 : -0.70, hi = reg ? -0.65 : -0.30;
        line += std::string(" rate_shape=") +
                (slope >= lo && slope <= hi ? "PASS" : "FAIL");
      }
    } else {
      line += ": slope=n/a";
    }
    std::printf("%s\n", line.c_str());
  }
  return 0;
}

}  // namespace brier
