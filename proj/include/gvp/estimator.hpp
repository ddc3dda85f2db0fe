#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <random>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gvp/gvi.hpp"
#include "gvp/heuristic.hpp"
#include "gvp/mlp.hpp"

namespace gvp {

enum class Backend : std::uint8_t { tabular, net };

std::string_view to_string(Backend backend);
Backend parse_backend(std::string_view name);

struct EstimatorConfig {
    Backend backend = Backend::net;
    double init_range = 50.0;  // tabular: fresh entries ~ U(0, init_range)
    double learning_rate = 1e-3;
    int hidden = 128;
    /// Net only: rescale the gradient when its L2 norm exceeds this; 0 disables.
    double max_grad_norm = 0.0;
    /// Outputs are clamped to [0, max_output].
    double max_output = 1e9;
    std::uint64_t seed = 0;
    /// Net only: board shape all inputs are encoded to.
    EncodingShape shape{};
    std::size_t input_size = 0;
};

struct TrainReport {
    std::size_t batch_size = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    std::size_t plan_samples = 0;
    std::size_t gvi_samples = 0;
};

struct GradientCheck {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    /// Coordinates whose perturbation flips a ReLU; finite differences are
    /// not defined across the kink, so they are left out.
    std::size_t skipped = 0;
};

/// Compares the analytic gradient of the MSE loss with central differences.
GradientCheck gradient_check(const Mlp<double>& net, const Mlp<double>::Matrix& x,
                             const Mlp<double>::RowVector& targets, double step = 1e-4);

/// The learned heuristic h(s). Evaluation is const and safe for concurrent
/// readers; fit_batch needs exclusive access.
class Estimator final : public Heuristic {
public:
    explicit Estimator(EstimatorConfig config);

    /// Net estimator whose input layout fits every instance in `instances`.
    static EstimatorConfig net_config_for(std::span<const Instance> instances, EstimatorConfig base = {});

    const EstimatorConfig& config() const noexcept { return config_; }
    Backend backend() const noexcept { return config_.backend; }

    void evaluate_batch(std::span<const State> states, const Instance& inst, std::span<double> out) const override;
    double evaluate_state(const State& s, const Rules& rules) const;

    /// One training step on the batch (MSE). Throws on an empty batch or a
    /// non-finite target.
    TrainReport fit_batch(std::span<const TrainingSample> batch);
    double loss(std::span<const TrainingSample> batch) const;

    /// Net backend: gradient check at the current parameters on `samples`.
    /// Tabular backend: 0.
    GradientCheck gradient_check(std::span<const TrainingSample> samples, double step = 1e-4) const;

    void save(const std::filesystem::path& path) const;
    static Estimator load(const std::filesystem::path& path);

    /// Hash of every parameter bit; changes whenever training changes anything.
    std::uint64_t digest() const;

    const Mlp<float>& net() const noexcept { return net_; }
    std::size_t table_size() const noexcept { return table_.size(); }

private:
    double tabular_value(const State& s) const;
    double clamp(double v) const;
    void check_rules(const Rules& rules) const;
    Mlp<float>::Matrix encode_dense(std::span<const TrainingSample> batch) const;
    Mlp<float>::RowVector targets_of(std::span<const TrainingSample> batch) const;

    EstimatorConfig config_;
    Mlp<float> net_;
    std::unordered_map<State, double, StateHash> table_;
};

/// Two bounded FIFO buffers of training samples, one per source.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t plan_capacity = 200000, std::size_t gvi_capacity = 200000);

    void insert(TrainingSample sample);
    void insert(std::span<const TrainingSample> samples);

    const std::deque<TrainingSample>& plan() const noexcept { return plan_; }
    const std::deque<TrainingSample>& gvi() const noexcept { return gvi_; }
    std::uint64_t plan_inserted() const noexcept { return plan_inserted_; }
    std::uint64_t gvi_inserted() const noexcept { return gvi_inserted_; }

private:
    std::size_t plan_capacity_, gvi_capacity_;
    std::deque<TrainingSample> plan_, gvi_;
    std::uint64_t plan_inserted_ = 0, gvi_inserted_ = 0;
};

/// round(p · batch_size) samples from the gvi buffer, the rest from the plan
/// buffer, uniformly with replacement. When one buffer is empty its share
/// comes from the other.
std::vector<TrainingSample> sample_mixed_batch(const ReplayBuffer& buffers, std::size_t batch_size, double p,
                                               std::mt19937_64& rng);

}  // namespace gvp
