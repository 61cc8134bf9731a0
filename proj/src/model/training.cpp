#include "sttraj/model/training.hpp"

#include "sttraj/autodiff/ops.hpp"
#include "sttraj/autodiff/tape.hpp"
#include "sttraj/errors.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <thread>

namespace sttraj::model {

std::vector<TrainingSample> prepare_samples(const data::TrajectoryScene& scene, CoordMode mode,
                                            int stride) {
  std::vector<TrainingSample> out;
  const auto windows = data::window_sequences(scene, data::kObservedSteps, data::kPredictedSteps, stride);
  out.reserve(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    auto [obs, fut] = data::to_graph_tensor(windows[i], mode);
    out.push_back({std::move(obs), std::move(fut), windows[i].obs, windows[i].fut, windows[i].ped_ids,
                   scene.name, i});
  }
  return out;
}

void Schedule::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(lr_initial > 0.0) || !(lr_after > 0.0)) throw ConfigError("learning rates must be positive");
  if (lr_switch_epoch >= epochs) throw ConfigError("lr_switch_epoch must be smaller than epochs");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must be in [0, 1)");
}

double learning_rate(const Schedule& schedule, int epoch) {
  return epoch <= schedule.lr_switch_epoch ? schedule.lr_initial : schedule.lr_after;
}

Trainer::Trainer(Model& model, TrainingState& state, Schedule schedule)
    : model_(model), state_(state), schedule_(schedule), params_(model.trainable()),
      gradient_seen_(params_.size(), false) {
  schedule_.validate();
}

namespace {

CounterRng epoch_stream(std::uint64_t seed, std::uint64_t epoch) { return CounterRng(seed).split(epoch); }

}  // namespace

EpochStats Trainer::run_epoch(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw ContractError("training requires at least one sample");
  const int epoch = static_cast<int>(state_.epoch) + 1;
  const CounterRng stream = epoch_stream(state_.seed, static_cast<std::uint64_t>(epoch));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng shuffle_rng = stream.split(0);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  const CounterRng loss_rng = stream.split(1);

  EpochStats stats;
  stats.epoch = epoch;
  stats.lr = learning_rate(schedule_, epoch);
  const auto& config = model_.config();
  const std::size_t batch = static_cast<std::size_t>(schedule_.batch_size);

  ad::zero_grads(params_);
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const std::size_t end = std::min(order.size(), begin + batch);
    const double scale = 1.0 / static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      const TrainingSample& s = samples[order[i]];
      ad::Tape tape;
      ad::Tape::Scope scope(tape);
      const auto field = model_.forward(s.obs);
      const auto terms = loss::total_loss(field, s.fut.values, config.loss, loss_rng.split(i));
      stats.nll += terms.nll.item();
      stats.mmd += terms.mmd.item();
      stats.total += terms.total.item();
      tape.backward(terms.total * scale);
    }
    for (std::size_t p = 0; p < params_.size(); ++p) {
      if (!gradient_seen_[p] && params_[p].has_grad() && !params_[p].node()->grad.isZero(0.0)) {
        gradient_seen_[p] = true;
      }
    }
    clip_grad_norm(params_, schedule_.clip_norm);
    sgd_step(params_, state_.optimizer, stats.lr, schedule_.momentum);
    ad::zero_grads(params_);
    stats.batch_sizes.push_back(static_cast<int>(end - begin));
  }
  const auto count = static_cast<double>(samples.size());
  stats.nll /= count;
  stats.mmd /= count;
  stats.total /= count;
  state_.epoch = static_cast<std::uint64_t>(epoch);
  return stats;
}

EpochStats Trainer::evaluate_loss(const std::vector<TrainingSample>& samples) const {
  EpochStats stats;
  stats.epoch = static_cast<int>(state_.epoch);
  if (samples.empty()) return stats;
  // Fixed stream so validation losses are comparable across epochs.
  const CounterRng rng = CounterRng(state_.seed).split(~std::uint64_t{0});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto field = model_.forward(samples[i].obs);
    const auto terms = loss::total_loss(field, samples[i].fut.values, model_.config().loss, rng.split(i));
    stats.nll += terms.nll.item();
    stats.mmd += terms.mmd.item();
    stats.total += terms.total.item();
  }
  const auto count = static_cast<double>(samples.size());
  stats.nll /= count;
  stats.mmd /= count;
  stats.total /= count;
  return stats;
}

std::vector<loss::BestOfK> evaluate_windows(const Model& model,
                                            const std::vector<TrainingSample>& samples, int k,
                                            std::uint64_t seed, unsigned threads) {
  std::vector<loss::BestOfK> out(samples.size());
  const CounterRng root(seed);
  auto work = [&](std::size_t i) {
    const auto& s = samples[i];
    const auto field = model.forward(s.obs);
    const std::uint64_t window_seed = root.split(i).key();
    out[i] = loss::best_of_k_metrics(field, s.fut_abs, k, window_seed, s.obs_abs.last(),
                                     model.config().coord_mode);
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, samples.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < samples.size(); ++i) work(i);
    return out;
  }
  std::vector<std::exception_ptr> failures(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < samples.size(); i += threads) work(i);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

loss::SceneMetrics pool_scene(const std::vector<loss::BestOfK>& windows) {
  loss::SceneAccumulator acc;
  for (const auto& w : windows) acc.add(w.errors);
  return acc.finish();
}

}  // namespace sttraj::model
