#include <benchmark/benchmark.h>

#include "memrl/credit.hpp"
#include "memrl/env.hpp"
#include "memrl/optim.hpp"
#include "memrl/rng.hpp"
#include "memrl/trajectory.hpp"

using namespace memrl;

namespace {

void BM_GenerateEpisode(benchmark::State& state) {
  EnvConfig cfg;
  cfg.n_items = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Episode ep = generate_episode(++seed, cfg);
    benchmark::DoNotOptimize(ep);
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_items);
}
BENCHMARK(BM_GenerateEpisode)->Arg(40)->Arg(160)->Arg(640);

void BM_SampleGroup(benchmark::State& state) {
  EnvConfig cfg;
  RewardConfig rcfg;
  Episode ep = generate_episode(7, cfg);
  Rng init(3);
  PolicySet policies = init_policies(cfg, false, 0.3, &init);
  const int group_size = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    TrajectoryGroup group = sample_group(policies, ep, group_size, rcfg.k, rcfg, ++seed);
    benchmark::DoNotOptimize(group);
  }
  state.SetItemsProcessed(state.iterations() * group_size);
}
BENCHMARK(BM_SampleGroup)->Arg(8)->Arg(32);

void BM_NdcgConsistency(benchmark::State& state) {
  Rng rng(11);
  const int n = static_cast<int>(state.range(0));
  std::vector<double> local(n), global(n);
  for (double& x : local) x = rng.next_double();
  for (double& x : global) x = static_cast<double>(rng.next_int(2));
  for (auto _ : state) benchmark::DoNotOptimize(ndcg_consistency(local, global));
}
BENCHMARK(BM_NdcgConsistency)->Arg(8)->Arg(64)->Arg(512);

void BM_UpdateAgent(benchmark::State& state) {
  EnvConfig cfg;
  RewardConfig rcfg;
  auto episodes = generate_dataset(5, 8, cfg);
  Rng init(9);
  PolicySet policies = init_policies(cfg, false, 0.3, &init);
  GrpoConfig gcfg;

  std::vector<UpdateSample> batch;
  for (const Episode& ep : episodes) {
    TrajectoryGroup group =
        sample_group(policies, ep, gcfg.group_size, rcfg.k, rcfg, ep.episode_id);
    CreditWeights w = credit_weights(consistency_scores(group));
    FinalRewards finals = integrate_rewards(group, w);
    auto adv = group_advantages(finals.per_agent[0], gcfg.std_floor);
    for (std::size_t i = 0; i < group.trajectories.size(); ++i)
      batch.push_back({StepState{&ep, {}, {}, 0}, group.trajectories[i].actions[0].action,
                       group.trajectories[i].actions[0].logprob, adv[i]});
  }
  PolicyParams params = policies.params_for(AgentId::extraction);
  for (auto _ : state) {
    auto [updated, stats] = update_agent(params, batch, gcfg);
    benchmark::DoNotOptimize(updated);
  }
  state.SetItemsProcessed(state.iterations() * batch.size());
}
BENCHMARK(BM_UpdateAgent);

}  // namespace

BENCHMARK_MAIN();
