#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gvp/curriculum.hpp"
#include "gvp/grid.hpp"

namespace gvp {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Every setting of one harness run. Serialized as flat JSON into each run
/// directory; fields missing from a file keep their defaults.
struct RunConfig {
    DomainKind domain = DomainKind::sokoban;
    Engine engine = Engine::bfs;
    Backend backend = Backend::net;

    // search
    int budget = 500;
    double weight = 2.0;
    int sims_per_move = 100;
    int move_cap = 0;
    int runs = 1;

    // training
    double p = 0.6;
    std::size_t batch_instances = 32;
    int train_steps = 64;
    std::size_t train_batch = 256;
    double learning_rate = 1e-3;
    double init_range = 50.0;
    int hidden = 128;
    double max_grad_norm = 0.0;
    std::size_t plan_buffer = 200000;
    std::size_t gvi_buffer = 200000;
    double cap_multiplier = 2.0;
    double cap_floor = 0.0;
    bool freeze_open_labels = false;

    // loop
    std::uint64_t seed = 0;
    int stall_window = 10;
    int max_iterations = 1000;
    int workers = 0;  // 0: all available cores
    int checkpoint_every = 10;

    // inputs and outputs
    std::string out_dir = "runs/latest";
    std::vector<std::string> levels;
    int first_level = 1;
    int last_level = 0;  // 0: through the last level
    GridSpec grid;
    int npuzzle_side = 3;

    // experiment recipes
    int quality_per_k = 50;
    int quality_k_max = 30;
    std::vector<double> ablate_p{0.0, 0.6, 1.0};
    int grid_max_iterations = 200;
    int grid_followup = 10;
    int frame_every = 1;
    std::int64_t oracle_node_cap = 50'000'000;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws ConfigError naming the first field outside its range.
void validate(const RunConfig& cfg);

std::string to_json(const RunConfig& cfg);
/// Parses and validates. Unknown keys are an error.
RunConfig config_from_json(std::string_view text);

RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

int resolved_workers(const RunConfig& cfg);
CurriculumConfig curriculum_config(const RunConfig& cfg);
/// Estimator settings; the net input layout is fitted to `instances`.
EstimatorConfig estimator_config(const RunConfig& cfg, std::span<const Instance> instances);

/// Named substreams of the root seed.
std::uint64_t substream(std::uint64_t seed, std::string_view name);

}  // namespace gvp
