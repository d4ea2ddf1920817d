#include "core/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "core/dynamics.hpp"
#include "core/greedy.hpp"
#include "core/nn_policy.hpp"
#include "core/rate_region.hpp"
#include "core/sampling.hpp"
#include "core/util.hpp"

namespace vumac {

namespace {

class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const SystemParams& params) : params_(params) {}
  std::string name() const override { return "greedy"; }
  Action act(const SystemState& state, int) override { return greedy_act(state, params_); }

 private:
  SystemParams params_;
};

class MdpPolicy final : public Policy {
 public:
  explicit MdpPolicy(MdpTable table) : table_(std::move(table)) {}
  std::string name() const override { return "mdp"; }
  Action act(const SystemState& state, int t) override { return mdp_act(table_, state, t); }

 private:
  MdpTable table_;
};

class NnPolicy final : public Policy {
 public:
  NnPolicy(MlpModel model, const SystemParams& params)
      : model_(std::move(model)), params_(params) {}
  std::string name() const override { return "nn"; }
  Action act(const SystemState& state, int t) override {
    (void)t;
    return nn_act(state, model_, params_);
  }

 private:
  MlpModel model_;
  SystemParams params_;
};

}  // namespace

class OfflinePolicy final : public Policy {
 public:
  OfflinePolicy(const SystemParams& params, double ktol) : params_(params), ktol_(ktol) {}
  std::string name() const override { return "offline"; }
  void begin_episode(const SamplePath& path) override {
    sol_ = solve_offline(path, params_, ktol_);
  }
  Action act(const SystemState& state, int t) override {
    // The replayed trajectory must match the program's own bookkeeping.
    for (int i = 0; i < params_.num_users; ++i)
      if (std::abs(state.battery[i] - sol_.battery[t][i]) > 1e-6 ||
          std::abs(state.bits[i] - sol_.bits[t][i]) > 1e-6)
        throw VumacError("offline replay diverged from the planned trajectory");
    return Action{sol_.power[t], sol_.rate[t]};
  }
  const OfflineSolution& last_solution() const { return sol_; }

 private:
  SystemParams params_;
  double ktol_;
  OfflineSolution sol_;
};

std::unique_ptr<Policy> make_greedy_policy(const SystemParams& params) {
  return std::make_unique<GreedyPolicy>(params);
}
std::unique_ptr<Policy> make_mdp_policy(MdpTable table) {
  return std::make_unique<MdpPolicy>(std::move(table));
}
std::unique_ptr<Policy> make_nn_policy(MlpModel model, const SystemParams& params) {
  return std::make_unique<NnPolicy>(std::move(model), params);
}
std::unique_ptr<Policy> make_offline_policy(const SystemParams& params, double ktol) {
  return std::make_unique<OfflinePolicy>(params, ktol);
}

EpisodeResult simulate_episode(Policy& policy, const SamplePath& path,
                               const SystemParams& params) {
  const int T = params.horizon, M = params.num_users;
  if (static_cast<int>(path.energy.size()) != T)
    throw VumacError("simulate_episode: path horizon mismatch");
  SystemState state = initial_state(params);
  advance_state(state, zero_action(params), path, 0, params);
  policy.begin_episode(path);
  EpisodeResult out;
  out.slot_cost.resize(T);
  KahanSum total;
  for (int t = 0; t < T; ++t) {
    Action a = policy.act(state, t);
    if (static_cast<int>(a.power.size()) != M || static_cast<int>(a.rate.size()) != M)
      throw VumacError("policy-infeasible-action: " + policy.name() + " returned wrong arity");
    if (!is_energy_feasible(state, a))
      throw VumacError("policy-infeasible-action: " + policy.name() + " overdraws the battery at slot " +
                       std::to_string(t));
    if (!is_bit_feasible(state, a))
      throw VumacError("policy-infeasible-action: " + policy.name() + " transmits more bits than remain at slot " +
                       std::to_string(t));
    if (!is_rate_feasible(params.rate_fn, state.gain, a.power, a.rate))
      throw VumacError("policy-infeasible-action: " + policy.name() + " leaves the rate region at slot " +
                       std::to_string(t));
    double c = stage_cost(state, a, params);
    out.slot_cost[t] = c;
    total.add(c);
    if (t + 1 < T) advance_state(state, a, path, t + 1, params);
  }
  out.objective = total.value() / (static_cast<double>(T) * M);
  return out;
}

EvalResult evaluate_policy(Policy& policy, const StochasticModel& model,
                           const SystemParams& params, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw VumacError("evaluate_policy: episodes must be >= 1");
  std::vector<double> obj(episodes);
  KahanSum sum;
  for (int e = 0; e < episodes; ++e) {
    SamplePath path = sample_path(model, params, derive_seed(seed, e));
    obj[e] = simulate_episode(policy, path, params).objective;
    sum.add(obj[e]);
  }
  EvalResult res;
  res.episodes = episodes;
  res.mean = sum.value() / episodes;
  if (episodes > 1) {
    KahanSum sq;
    for (double v : obj) sq.add((v - res.mean) * (v - res.mean));
    res.stderr_ = std::sqrt(sq.value() / (episodes - 1) / episodes);
  }
  return res;
}

StochasticModel apply_sweep(const StochasticModel& base, const std::string& param, double value) {
  StochasticModel m = base;
  if (param.empty() || param == "none") return m;
  if (value < 0.0 || value > 1.0)
    throw VumacError("sweep value for " + param + " must lie in [0, 1]");
  if (param == "version_prob") {
    // Importance draw W in {lo, hi} with P(hi) = value.
    if (m.weight.support.size() != 2)
      throw VumacError("version_prob sweep needs a two-point importance support");
    m.weight.probs = {1.0 - value, value};
  } else if (param == "energy_prob") {
    for (auto& en : m.energy) {
      if (en.support.size() != 2)
        throw VumacError("energy_prob sweep needs two-point energy supports");
      en.probs = {1.0 - value, value};
    }
  } else if (param == "arrival_prob") {
    for (auto& p : m.arrival_prob) p = value;
  } else {
    throw VumacError("unknown sweep parameter '" + param + "'");
  }
  return m;
}

std::vector<ExperimentRow> run_experiment(const SystemParams& params,
                                          const StochasticModel& base_model,
                                          const ExperimentSpec& spec,
                                          const std::function<void(const std::string&)>& log) {
  params.validate();
  base_model.validate(params);
  if (spec.policies.empty()) throw VumacError("run_experiment: no policies requested");
  if (spec.episodes < 1) throw VumacError("run_experiment: episodes must be >= 1");
  std::vector<double> values = spec.sweep_values;
  if (values.empty()) values.push_back(0.0);
  auto say = [&](const std::string& s) {
    if (log) log(s);
  };

  std::vector<ExperimentRow> rows;
  for (std::size_t k = 0; k < values.size(); ++k) {
    StochasticModel model = apply_sweep(base_model, spec.sweep_param, values[k]);
    model.validate(params);
    say("sweep " + (spec.sweep_param.empty() ? std::string("none") : spec.sweep_param) + " = " +
        std::to_string(values[k]));

    bool want_offline = false;
    std::vector<std::unique_ptr<Policy>> pols;
    OfflinePolicy* offline = nullptr;
    for (const auto& pname : spec.policies) {
      if (pname == "offline") {
        auto p = make_offline_policy(params, spec.offline_ktol);
        offline = static_cast<OfflinePolicy*>(p.get());
        pols.push_back(std::move(p));
        want_offline = true;
      } else if (pname == "greedy") {
        pols.push_back(make_greedy_policy(params));
      } else if (pname == "mdp") {
        say("  solving dynamic program...");
        pols.push_back(make_mdp_policy(solve_mdp(params, model, spec.disc, true)));
      } else if (pname == "nn") {
        say("  building imitation corpus (" + std::to_string(spec.offline_paths) + " paths)...");
        TrainingDataset ds = generate_dataset(model, params, spec.offline_paths,
                                              derive_seed(spec.seed ^ 0xDA7A5EEDULL, k));
        say("  training network...");
        TrainResult tr =
            train_mlp(ds.X, ds.Y, ds.path_seed, spec.train, derive_seed(spec.seed ^ 0x7EA1ULL, k));
        say("  best validation mse " + std::to_string(tr.history.best_val) + " at epoch " +
            std::to_string(tr.history.best_epoch));
        pols.push_back(make_nn_policy(std::move(tr.model), params));
      } else {
        throw VumacError("unknown policy '" + pname + "'");
      }
    }

    std::size_t offline_idx = pols.size();
    for (std::size_t p = 0; p < pols.size(); ++p)
      if (pols[p].get() == offline) offline_idx = p;

    std::vector<KahanSum> sums(pols.size());
    std::vector<std::vector<double>> objs(pols.size(),
                                          std::vector<double>(spec.episodes));
    for (int e = 0; e < spec.episodes; ++e) {
      SamplePath path = sample_path(model, params, derive_seed(spec.seed, e));
      // The non-causal baseline goes first so every online policy can be
      // checked against it on this very path.
      double offline_obj = 0.0;
      if (want_offline) {
        double obj = simulate_episode(*pols[offline_idx], path, params).objective;
        objs[offline_idx][e] = obj;
        sums[offline_idx].add(obj);
        offline_obj = offline->last_solution().objective;
        if (std::abs(obj - offline_obj) > 1e-9)
          throw VumacError("offline replay objective mismatch");
      }
      for (std::size_t p = 0; p < pols.size(); ++p) {
        if (p == offline_idx) continue;
        double obj = simulate_episode(*pols[p], path, params).objective;
        objs[p][e] = obj;
        sums[p].add(obj);
        if (want_offline && obj < offline_obj - 1e-6)
          throw VumacError("per-path bound violated: " + pols[p]->name() + " beat the offline optimum by " +
                           std::to_string(offline_obj - obj) + " on path " +
                           std::to_string(path.seed));
      }
      if ((e + 1) % 1000 == 0)
        say("  " + std::to_string(e + 1) + "/" + std::to_string(spec.episodes) + " episodes");
    }
    for (std::size_t p = 0; p < pols.size(); ++p) {
      ExperimentRow row;
      row.sweep_param = spec.sweep_param.empty() ? "none" : spec.sweep_param;
      row.sweep_value = values[k];
      row.policy = pols[p]->name();
      row.episodes = spec.episodes;
      row.mean_cost = sums[p].value() / spec.episodes;
      if (spec.episodes > 1) {
        KahanSum sq;
        for (double v : objs[p]) sq.add((v - row.mean_cost) * (v - row.mean_cost));
        row.stderr_ = std::sqrt(sq.value() / (spec.episodes - 1) / spec.episodes);
      }
      rows.push_back(row);
      say("  " + row.policy + ": " + std::to_string(row.mean_cost) + " +- " +
          std::to_string(row.stderr_));
    }
  }
  return rows;
}

void export_results(const std::vector<ExperimentRow>& rows, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw VumacError("cannot open '" + file + "' for writing");
  out << "sweep_param,sweep_value,policy,mean_cost,stderr,episodes\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%s,%.17g,%.17g,%d", r.sweep_param.c_str(),
                  r.sweep_value, r.policy.c_str(), r.mean_cost, r.stderr_, r.episodes);
    out << buf << '\n';
  }
  if (!out) throw VumacError("write failed for '" + file + "'");
}

}  // namespace vumac
