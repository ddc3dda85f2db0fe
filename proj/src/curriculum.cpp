#include "gvp/curriculum.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

namespace gvp {
namespace {

std::uint64_t id_hash(const std::string& id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : id) h = (h ^ c) * 0x100000001b3ULL;
    return h;
}

}  // namespace

TaskPool::TaskPool(std::vector<Instance> instances) {
    records_.reserve(instances.size());
    for (auto& inst : instances) {
        TaskRecord rec;
        rec.instance = std::move(inst);
        records_.push_back(std::move(rec));
    }
}

std::size_t TaskPool::solved_count() const {
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.solved; }));
}

std::vector<Instance> TaskPool::instances() const {
    std::vector<Instance> out;
    for (const auto& r : records_) out.push_back(r.instance);
    return out;
}

std::vector<std::size_t> sample_instances(const TaskPool& pool, std::size_t batch, std::mt19937_64& rng) {
    if (pool.empty()) throw Error("sample_instances: empty pool");
    if (batch < 1) throw Error("sample_instances: batch must be at least 1");
    // Exponential race: the order of log(u) / w equals sequential weighted
    // draws without replacement.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, std::size_t>> keys;
    keys.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const double w = pool.records()[i].weight;
        if (!(w > 0.0)) throw Error("sample_instances: non-positive weight");
        double u = unit(rng);
        while (u == 0.0) u = unit(rng);
        keys.emplace_back(std::log(u) / w, i);
    }
    std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const std::size_t n = std::min(batch, pool.size());
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(keys[i].second);
    return out;
}

std::vector<std::size_t> update_pool(TaskPool& pool, std::span<const std::size_t> indices,
                                     std::span<const SearchOutcome> outcomes, const WeightRule& rule) {
    if (indices.size() != outcomes.size()) throw Error("update_pool: result count mismatch");
    std::vector<std::size_t> fresh;
    for (std::size_t k = 0; k < indices.size(); ++k) {
        auto& rec = pool.records().at(indices[k]);
        const auto& out = outcomes[k];
        ++rec.attempts;
        rec.last_solved = out.solved;
        rec.last_counters = out.counters;
        if (out.solved) {
            if (!out.plan) throw PlanError(rec.instance.id + ": solved outcome without a plan");
            replay(*out.plan, rec.instance);  // throws on an invalid plan
            if (!rec.solved) fresh.push_back(indices[k]);
            rec.solved = true;
            if (!rec.best_plan || out.plan->length() < rec.best_plan->length()) rec.best_plan = out.plan;
            rec.weight = std::max(rec.weight * rule.decay, rule.min_weight);
        } else {
            rec.weight = rule.reset;
        }
    }
    return fresh;
}

CurriculumRng::CurriculumRng(std::uint64_t seed)
    : sampler(mix64(seed ^ 0x73616d706c6572ULL)),
      trainer(mix64(seed ^ 0x747261696e6572ULL)),
      search_seed(mix64(seed ^ 0x736561726368ULL)) {}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, n); ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        f(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

IterationReport run_iteration(TaskPool& pool, Estimator& est, ReplayBuffer& buffers, const CurriculumConfig& cfg,
                              CurriculumRng& rng, int iteration, IterationOptions options) {
    const auto t0 = std::chrono::steady_clock::now();
    IterationReport report;
    report.iteration = iteration;

    // Sample.
    const auto picked = sample_instances(pool, cfg.batch_instances, rng.sampler);
    for (auto i : picked) report.attempted.push_back(pool.records()[i].instance.id);

    // Search, against a frozen estimator.
    std::vector<SearchOutcome> outcomes(picked.size());
    const Estimator& frozen = est;
    parallel_for(picked.size(), cfg.workers, [&](std::size_t k) {
        const auto& rec = pool.records()[picked[k]];
        SearchConfig sc = cfg.search;
        sc.seed = mix64(rng.search_seed ^ mix64(static_cast<std::uint64_t>(iteration)) ^ id_hash(rec.instance.id));
        if (rec.best_plan) sc.best_known_length = static_cast<int>(rec.best_plan->length());
        outcomes[k] = restart_loop(rec.instance, frozen, sc);
    });

    // Labels: GVI over every graph, plan labels for every plan.
    std::vector<std::vector<TrainingSample>> samples(picked.size());
    const bool use_gvi = cfg.p > 0.0;
    parallel_for(picked.size(), cfg.workers, [&](std::size_t k) {
        const auto& inst = pool.records()[picked[k]].instance;
        auto& out = samples[k];
        if (use_gvi) {
            for (std::size_t g = 0; g < outcomes[k].graphs.size(); ++g) {
                auto labels = gvi_labels(outcomes[k].graphs[g], cfg.gvi);
                for (auto& l : labels) l.graph = static_cast<std::int32_t>(g);
                auto s = to_training_samples(labels, cfg.cap, inst.rules);
                out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
            }
        }
        if (outcomes[k].solved) {
            const auto states = replay(*outcomes[k].plan, inst);
            auto s = plan_to_samples(*outcomes[k].plan, states, inst.rules);
            out.insert(out.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
        }
    });
    for (const auto& s : samples) buffers.insert(s);

    // Train.
    double loss_before = 0.0, loss_after = 0.0;
    for (int step = 0; step < cfg.train_steps; ++step) {
        const auto batch = sample_mixed_batch(buffers, cfg.train_batch, cfg.p, rng.trainer);
        if (batch.empty()) break;
        const auto r = est.fit_batch(batch);
        ++report.train_steps;
        loss_before += r.loss_before;
        loss_after += r.loss_after;
        report.train.batch_size += r.batch_size;
        report.train.plan_samples += r.plan_samples;
        report.train.gvi_samples += r.gvi_samples;
    }
    if (report.train_steps > 0) {
        report.train.loss_before = loss_before / report.train_steps;
        report.train.loss_after = loss_after / report.train_steps;
    }

    // Weights and bookkeeping.
    const auto fresh = update_pool(pool, picked, outcomes, cfg.weights);
    for (auto i : fresh) report.newly_solved.push_back(pool.records()[i].instance.id);
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& o = outcomes[k];
        report.counters += o.counters;
        report.runs.push_back({report.attempted[k], o.solved, o.plan ? o.plan->length() : 0, o.counters});
    }
    report.solved_total = pool.solved_count();
    report.plan_buffer = buffers.plan().size();
    report.gvi_buffer = buffers.gvi().size();
    report.estimator_digest = est.digest();
    if (options.keep_outcomes) report.outcomes = std::move(outcomes);
    report.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

CurriculumSummary run_until_stall(TaskPool& pool, Estimator& est, ReplayBuffer& buffers, const CurriculumConfig& cfg,
                                  CurriculumRng& rng, const IterationCallback& on_iteration, IterationOptions options) {
    if (cfg.stall_window < 1) throw Error("stall window must be at least 1");
    CurriculumSummary summary;
    int quiet = 0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        auto report = run_iteration(pool, est, buffers, cfg, rng, it, options);
        summary.iterations = it;
        quiet = report.newly_solved.empty() ? quiet + 1 : 0;
        if (on_iteration) on_iteration(report, pool, est);
        report.outcomes.clear();
        summary.reports.push_back(std::move(report));
        if (quiet >= cfg.stall_window) {
            summary.stalled = true;
            break;
        }
    }
    return summary;
}

}  // namespace gvp
