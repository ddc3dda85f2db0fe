#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gvp/estimator.hpp"
#include "gvp/gvi.hpp"
#include "gvp/search.hpp"

namespace gvp {

struct TaskRecord {
    Instance instance;
    double weight = 1.0;
    bool solved = false;
    std::optional<Plan> best_plan;
    int attempts = 0;
    bool last_solved = false;
    SearchCounters last_counters;
};

struct WeightRule {
    double decay = 0.5;
    double min_weight = 0.05;
    double reset = 1.0;
};

class TaskPool {
public:
    TaskPool() = default;
    explicit TaskPool(std::vector<Instance> instances);

    std::vector<TaskRecord>& records() noexcept { return records_; }
    const std::vector<TaskRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    std::size_t solved_count() const;
    std::vector<Instance> instances() const;

private:
    std::vector<TaskRecord> records_;
};

/// Indices of `batch` records drawn without replacement, each draw with
/// probability proportional to weight. The whole pool when it is smaller.
std::vector<std::size_t> sample_instances(const TaskPool& pool, std::size_t batch, std::mt19937_64& rng);

/// Records outcome i against pool record indices[i]. Returns the indices that
/// became solved for the first time. Throws PlanError on an invalid plan.
std::vector<std::size_t> update_pool(TaskPool& pool, std::span<const std::size_t> indices,
                                     std::span<const SearchOutcome> outcomes, const WeightRule& rule = {});

struct CurriculumConfig {
    SearchConfig search;
    std::size_t batch_instances = 32;
    int train_steps = 64;
    std::size_t train_batch = 256;
    double p = 0.6;
    CapPolicy cap;
    GviOptions gvi;
    WeightRule weights;
    int stall_window = 10;
    int max_iterations = 1000;
    int workers = 1;
    std::uint64_t seed = 0;
};

/// Random streams of one curriculum run, all derived from the root seed.
struct CurriculumRng {
    explicit CurriculumRng(std::uint64_t seed);

    std::mt19937_64 sampler;
    std::mt19937_64 trainer;
    std::uint64_t search_seed;
};

/// Counters of one instance attempt.
struct RunRecord {
    std::string instance_id;
    bool solved = false;
    std::size_t plan_length = 0;
    SearchCounters counters;
};

struct IterationReport {
    int iteration = 0;
    std::vector<std::string> attempted;
    std::vector<std::string> newly_solved;
    std::size_t solved_total = 0;
    SearchCounters counters;
    /// Training over all steps of the iteration: mean losses, summed sample counts.
    TrainReport train;
    int train_steps = 0;
    std::size_t plan_buffer = 0;
    std::size_t gvi_buffer = 0;
    std::uint64_t estimator_digest = 0;
    double wall_time_ms = 0.0;
    std::vector<RunRecord> runs;
    /// Search outcomes in `attempted` order; kept only when requested, and
    /// only until the iteration callback returns.
    std::vector<SearchOutcome> outcomes;
};

struct IterationOptions {
    bool keep_outcomes = false;
};

/// sample -> search -> GVI -> train -> update weights.
IterationReport run_iteration(TaskPool& pool, Estimator& est, ReplayBuffer& buffers, const CurriculumConfig& cfg,
                              CurriculumRng& rng, int iteration, IterationOptions options = {});

struct CurriculumSummary {
    int iterations = 0;
    bool stalled = false;
    std::vector<IterationReport> reports;
};

using IterationCallback = std::function<void(const IterationReport&, const TaskPool&, const Estimator&)>;

/// Iterates until `stall_window` consecutive iterations solve nothing new or
/// `max_iterations` is reached.
CurriculumSummary run_until_stall(TaskPool& pool, Estimator& est, ReplayBuffer& buffers, const CurriculumConfig& cfg,
                                  CurriculumRng& rng, const IterationCallback& on_iteration = {},
                                  IterationOptions options = {});

/// Runs f(i) for i in [0, n) on `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f);

}  // namespace gvp
