#include "ecdnn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

#include "ecdnn/aggregation.hpp"
#include "ecdnn/compression.hpp"
#include "ecdnn/error.hpp"
#include "ecdnn/memory_probe.hpp"
#include "ecdnn/rng.hpp"
#include "ecdnn/training.hpp"

namespace ecdnn {

namespace {

constexpr std::uint64_t kStreamPartition = 0x11;
constexpr std::uint64_t kStreamInit = 0x22;
constexpr std::uint64_t kStreamBatch = 0x33;
constexpr std::uint64_t kStreamCompress = 0x44;
constexpr std::uint64_t kStreamRelabel = 0x55;

struct Worker {
    std::size_t id = 0;
    LabeledBatch shard;
    DenseNet net;
    OptState opt;
    BatchSampler sampler;
    std::optional<std::vector<Vector>> zbar;
    MemoryProbe probe;
    std::vector<double> losses;
};

struct Evaluation {
    double error_global = 0.0;
    double loss_global = 0.0;
    std::vector<double> local_errors;
    std::vector<double> local_losses;  // test CE
    std::vector<double> train_losses;  // full training set CE
    std::size_t chosen = 0;
};

double ensemble_error(const EnsembleModel& ens, const LabeledBatch& data, double* loss) {
    std::size_t wrong = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Vector p = ens.predict(data.inputs[i]);
        if (argmax(p) != data.labels[i]) ++wrong;
        total += loss_ce(p, data.labels[i]);
    }
    if (loss) *loss = total / static_cast<double>(data.size());
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

class Simulation {
public:
    Simulation(const TrainConfig& cfg, const Dataset& data, const RunOptions& options)
        : cfg_(cfg), data_(data), start_(std::chrono::steady_clock::now()) {
        cfg_.validate();
        const std::size_t K = cfg_.effective_workers();
        if (data_.train.size() < K) throw ConfigError("train.workers", "more workers than training examples");
        if (!options.initial_models.empty() && options.initial_models.size() != K)
            throw ConfigError("initial_models", "expected one starting model per worker");

        std::vector<std::size_t> sizes{data_.input_dim};
        sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
        sizes.push_back(data_.num_classes);
        const Layout layout(sizes);

        compression_steps_ = cfg_.strategy == Strategy::ecdnn ? cfg_.effective_compression_steps() : 0;
        total_syncs_ = cfg_.synchronizes() ? cfg_.total_iterations / cfg_.tau : 0;

        std::vector<LabeledBatch> shards;
        if (cfg_.partition == PartitionMode::disjoint) {
            shards = partition(data_.train, K, derive_seed({cfg_.seed, kStreamPartition}));
        } else {
            shards = partition(data_.train, 1, derive_seed({cfg_.seed, kStreamPartition}));
            shards.resize(K, shards.front());
        }

        const bool shared_init = cfg_.init == InitMode::shared ||
                                 (cfg_.init == InitMode::automatic && cfg_.strategy == Strategy::madnn);
        workers_.reserve(K);
        for (std::size_t k = 0; k < K; ++k) {
            const std::uint64_t stream = cfg_.worker_streams == WorkerStreams::identical ? 0 : k;
            DenseNet net = !options.initial_models.empty()
                               ? options.initial_models[k]
                               : DenseNet::initialize(layout, derive_seed({cfg_.seed, shared_init ? 0 : stream,
                                                                           kStreamInit}));
            if (!(net.layout() == layout))
                throw ConfigError("initial_models", "starting model does not match the configured layout");
            OptState opt = OptState::for_params(net.params(), cfg_.learning_rate, cfg_.momentum, cfg_.l2);
            BatchSampler sampler(shards[k].size(), cfg_.batch_size, derive_seed({cfg_.seed, stream, kStreamBatch}));
            workers_.push_back(Worker{k, std::move(shards[k]), std::move(net), std::move(opt), std::move(sampler),
                                      std::nullopt, MemoryProbe{}, {}});
        }
        if (cfg_.strategy == Strategy::ecdnn && total_syncs_ > 0) {
            const RelabelPlan plan{cfg_.mu, 0, cfg_.beta_schedule};
            for (const auto& w : workers_) plan.subset_size(w.shard.size());
        }

        record_.config = cfg_;
        record_.run_id = options.run_id.empty() ? default_run_id(cfg_) : options.run_id;
        record_.compression_steps = compression_steps_;
    }

    RunRecord run() {
        const std::size_t total = cfg_.total_iterations;
        const std::size_t eval_every = cfg_.effective_eval_every();
        add_curve_point();
        std::size_t t = 0;
        while (t < total) {
            std::size_t next = std::min(total, (t / eval_every + 1) * eval_every);
            if (total_syncs_ > 0) next = std::min(next, (t / cfg_.tau + 1) * cfg_.tau);
            const std::size_t steps = next - t;
            for_each_worker([&](Worker& w) {
                for (std::size_t i = 0; i < steps; ++i) local_step(w);
            });
            t = next;
            t_ = t;
            if (total_syncs_ > 0 && t % cfg_.tau == 0) synchronize();
            if (t % eval_every == 0 || t == total) add_curve_point();
        }
        if (cfg_.strategy == Strategy::ednn && workers_.size() > 1) final_comms_ = 1;
        finalize();
        return std::move(record_);
    }

private:
    void for_each_worker(const std::function<void(Worker&)>& fn) {
        if (!cfg_.parallel_workers || workers_.size() == 1) {
            for (auto& w : workers_) fn(w);
            return;
        }
        std::vector<std::exception_ptr> errors(workers_.size());
        {
            std::vector<std::jthread> threads;
            threads.reserve(workers_.size());
            for (auto& w : workers_)
                threads.emplace_back([&fn, &w, &errors] {
                    try {
                        fn(w);
                    } catch (...) {
                        errors[w.id] = std::current_exception();
                    }
                });
        }
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    void local_step(Worker& w) {
        const auto indices = w.sampler.next();
        LabeledBatch batch = gather(w.shard, indices);
        LossSpec loss = PlainLoss{};
        if (cfg_.strategy == Strategy::ecdnn && cfg_.alpha > 0.0 && w.zbar) {
            std::vector<Vector> rows;
            rows.reserve(indices.size());
            for (auto i : indices) rows.push_back((*w.zbar)[i]);
            batch.soft_targets = std::move(rows);
            loss = DiversityLoss{cfg_.alpha};
        }
        w.losses.push_back(train_step(w.net, batch, loss, w.opt));
    }

    double sim_time() const {
        const CostModel& c = cfg_.cost;
        const double comm = cfg_.strategy == Strategy::madnn ? c.comm_ma : c.comm_ec;
        return static_cast<double>(t_ + compression_steps_done_) * c.step +
               static_cast<double>(record_.syncs.size() + final_comms_) * comm +
               static_cast<double>(forward_examples_) * c.forward;
    }

    double host_seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

    std::vector<DenseNet> snapshot_models() const {
        std::vector<DenseNet> out;
        out.reserve(workers_.size());
        for (const auto& w : workers_) out.push_back(w.net);
        return out;
    }

    void measure_locals(SyncRecord& s) {
        s.error_local.assign(workers_.size(), 0.0);
        s.loss_local.assign(workers_.size(), 0.0);
        for_each_worker([&](Worker& w) {
            s.error_local[w.id] = error_rate(w.net, data_.test);
            s.loss_local[w.id] = mean_loss(w.net, data_.test);
        });
    }

    void synchronize() {
        SyncRecord s;
        s.t = t_;
        measure_locals(s);
        if (cfg_.strategy == Strategy::madnn) {
            std::vector<ParameterVector> params;
            params.reserve(workers_.size());
            for (const auto& w : workers_) params.push_back(w.net.params());
            const DenseNet global(ma_aggregate(params));
            s.error_global = error_rate(global, data_.test);
            s.loss_global = mean_loss(global, data_.test);
            for (auto& w : workers_) w.net = global;
        } else {
            synchronize_ensemble(s);
        }
        record_.syncs.push_back(std::move(s));
        record_.syncs.back().sim_time = sim_time();
        record_.syncs.back().host_seconds = host_seconds();
    }

    void synchronize_ensemble(SyncRecord& s) {
        const std::size_t sync_index = record_.syncs.size();
        const std::vector<DenseNet> members = snapshot_models();
        const EnsembleModel ensemble(members);
        s.error_global = ensemble_error(ensemble, data_.test, &s.loss_global);

        s.error_compressed.assign(workers_.size(), 0.0);
        s.loss_compressed.assign(workers_.size(), 0.0);
        std::vector<std::size_t> relabeled(workers_.size(), 0);
        for_each_worker([&](Worker& w) {
            w.probe.reset_peaks();
            const std::uint64_t stream = cfg_.worker_streams == WorkerStreams::identical ? 0 : w.id;
            const RelabelPlan plan{cfg_.mu, derive_seed({cfg_.seed, stream, sync_index, kStreamRelabel}),
                                   cfg_.beta_schedule};
            CompressOptions opts;
            opts.batch_size = cfg_.batch_size;
            opts.shuffle_seed = derive_seed({cfg_.seed, stream, sync_index, kStreamCompress});
            if (cfg_.beta_progress == BetaProgress::rounds)
                opts.round_progress = static_cast<double>(sync_index) / static_cast<double>(total_syncs_);
            opts.probe = &w.probe;
            CompressResult res = compress(w.net.params(), members, w.shard, plan, compression_steps_, w.opt, opts);
            relabeled[w.id] = res.relabeled.size();
            w.net.params() = std::move(res.params);
            s.error_compressed[w.id] = error_rate(w.net, data_.test);
            s.loss_compressed[w.id] = mean_loss(w.net, data_.test);
        });
        compression_steps_done_ += compression_steps_;
        record_.relabel_passes += members.size();
        const std::size_t max_relabeled = *std::max_element(relabeled.begin(), relabeled.end());
        forward_examples_ += members.size() * max_relabeled;

        if (cfg_.alpha > 0.0) {
            const std::vector<DenseNet> compressed = snapshot_models();
            std::size_t max_shard = 0;
            for_each_worker([&](Worker& w) {
                ModelHold own(&w.probe);
                w.zbar = make_pseudo_labels(compressed, w.shard.inputs, &w.probe);
            });
            for (const auto& w : workers_) max_shard = std::max(max_shard, w.shard.size());
            forward_examples_ += compressed.size() * max_shard;
        }
        for (const auto& w : workers_) {
            record_.peak_models = std::max(record_.peak_models, w.probe.peak_models());
            record_.peak_sums = std::max(record_.peak_sums, w.probe.peak_sums());
        }
    }

    Evaluation evaluate() {
        Evaluation e;
        const std::size_t K = workers_.size();
        e.local_errors.assign(K, 0.0);
        e.local_losses.assign(K, 0.0);
        e.train_losses.assign(K, 0.0);
        for_each_worker([&](Worker& w) {
            e.local_errors[w.id] = error_rate(w.net, data_.test);
            e.local_losses[w.id] = mean_loss(w.net, data_.test);
            e.train_losses[w.id] = mean_loss(w.net, data_.train);
        });
        e.chosen = static_cast<std::size_t>(std::min_element(e.train_losses.begin(), e.train_losses.end()) -
                                            e.train_losses.begin());
        switch (cfg_.strategy) {
            case Strategy::sdnn:
                e.error_global = e.local_errors[0];
                e.loss_global = e.local_losses[0];
                break;
            case Strategy::madnn: {
                std::vector<ParameterVector> params;
                for (const auto& w : workers_) params.push_back(w.net.params());
                const DenseNet global(ma_aggregate(params));
                e.error_global = error_rate(global, data_.test);
                e.loss_global = mean_loss(global, data_.test);
                break;
            }
            case Strategy::ednn:
            case Strategy::ecdnn: {
                const EnsembleModel ens(snapshot_models());
                e.error_global = ensemble_error(ens, data_.test, &e.loss_global);
                break;
            }
        }
        return e;
    }

    void add_curve_point() {
        const Evaluation e = evaluate();
        record_.curve.push_back(CurvePoint{t_, sim_time(), e.error_global, e.local_errors[e.chosen]});
    }

    void finalize() {
        const Evaluation e = evaluate();
        FinalRecord& f = record_.final;
        f.error_global = e.error_global;
        f.loss_global = e.loss_global;
        f.chosen_worker = e.chosen;
        f.error_local = e.local_errors[e.chosen];
        f.loss_local = e.local_losses[e.chosen];
        f.local_errors = e.local_errors;
        f.local_train_losses = e.train_losses;
        if (!record_.curve.empty()) {
            record_.curve.back().sim_time = sim_time();
            record_.curve.back().error_global = e.error_global;
        }
        record_.sim_time = sim_time();
        record_.host_seconds = host_seconds();
        for (auto& w : workers_) {
            record_.train_loss.push_back(std::move(w.losses));
            record_.final_models.push_back(std::move(w.net));
        }
    }

    TrainConfig cfg_;
    const Dataset& data_;
    std::chrono::steady_clock::time_point start_;
    std::vector<Worker> workers_;
    RunRecord record_;
    std::size_t compression_steps_ = 0;
    std::size_t total_syncs_ = 0;
    std::size_t t_ = 0;
    std::size_t compression_steps_done_ = 0;
    std::size_t forward_examples_ = 0;
    std::size_t final_comms_ = 0;
};

}  // namespace

std::vector<std::vector<std::size_t>> partition_indices(std::size_t n, std::size_t workers, std::uint64_t seed) {
    if (workers == 0) throw InvalidInput("need at least one worker");
    if (workers > n) throw InvalidInput("more workers (" + std::to_string(workers) + ") than examples (" +
                                        std::to_string(n) + ")");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> shards(workers);
    const std::size_t base = n / workers;
    const std::size_t extra = n % workers;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < workers; ++k) {
        const std::size_t len = base + (k < extra ? 1 : 0);
        shards[k].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return shards;
}

std::vector<LabeledBatch> partition(const LabeledBatch& data, std::size_t workers, std::uint64_t seed) {
    std::vector<LabeledBatch> out;
    for (const auto& idx : partition_indices(data.size(), workers, seed)) out.push_back(gather(data, idx));
    return out;
}

std::string default_run_id(const TrainConfig& cfg) {
    std::string id = to_string(cfg.strategy) + "_K" + std::to_string(cfg.effective_workers());
    if (cfg.strategy == Strategy::madnn || cfg.strategy == Strategy::ecdnn)
        id += "_tau" + (cfg.tau == kNeverSync ? std::string("inf") : std::to_string(cfg.tau));
    id += "_seed" + std::to_string(cfg.seed);
    return id;
}

RunRecord run_strategy(const TrainConfig& cfg, const Dataset& data, const RunOptions& options) {
    return Simulation(cfg, data, options).run();
}

namespace {
RunRecord run_as(Strategy s, TrainConfig cfg, const Dataset& data, const RunOptions& options) {
    cfg.strategy = s;
    return run_strategy(cfg, data, options);
}
}  // namespace

RunRecord run_sdnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options) {
    return run_as(Strategy::sdnn, cfg, data, options);
}
RunRecord run_ednn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options) {
    return run_as(Strategy::ednn, cfg, data, options);
}
RunRecord run_madnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options) {
    return run_as(Strategy::madnn, cfg, data, options);
}
RunRecord run_ecdnn(const TrainConfig& cfg, const Dataset& data, const RunOptions& options) {
    return run_as(Strategy::ecdnn, cfg, data, options);
}

}  // namespace ecdnn
