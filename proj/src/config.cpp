#include "gvp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace gvp {
namespace {

using nlohmann::json;

template <class Config, class F>
void for_each_field(Config& c, F&& f) {
    f("domain", c.domain);
    f("engine", c.engine);
    f("backend", c.backend);
    f("budget", c.budget);
    f("weight", c.weight);
    f("sims_per_move", c.sims_per_move);
    f("move_cap", c.move_cap);
    f("runs", c.runs);
    f("p", c.p);
    f("batch_instances", c.batch_instances);
    f("train_steps", c.train_steps);
    f("train_batch", c.train_batch);
    f("learning_rate", c.learning_rate);
    f("init_range", c.init_range);
    f("hidden", c.hidden);
    f("max_grad_norm", c.max_grad_norm);
    f("plan_buffer", c.plan_buffer);
    f("gvi_buffer", c.gvi_buffer);
    f("cap_multiplier", c.cap_multiplier);
    f("cap_floor", c.cap_floor);
    f("freeze_open_labels", c.freeze_open_labels);
    f("seed", c.seed);
    f("stall_window", c.stall_window);
    f("max_iterations", c.max_iterations);
    f("workers", c.workers);
    f("checkpoint_every", c.checkpoint_every);
    f("out_dir", c.out_dir);
    f("levels", c.levels);
    f("first_level", c.first_level);
    f("last_level", c.last_level);
    f("grid", c.grid);
    f("npuzzle_side", c.npuzzle_side);
    f("quality_per_k", c.quality_per_k);
    f("quality_k_max", c.quality_k_max);
    f("ablate_p", c.ablate_p);
    f("grid_max_iterations", c.grid_max_iterations);
    f("grid_followup", c.grid_followup);
    f("frame_every", c.frame_every);
    f("oracle_node_cap", c.oracle_node_cap);
}

template <class T>
json encode_field(const T& v) {
    if constexpr (std::is_same_v<T, DomainKind> || std::is_same_v<T, Engine> || std::is_same_v<T, Backend>) {
        return std::string(to_string(v));
    } else if constexpr (std::is_same_v<T, GridSpec>) {
        return json{{"height", v.height}, {"width", v.width}, {"start", v.start}, {"goal", v.goal}};
    } else {
        return v;
    }
}

template <class T>
void decode_field(const json& j, T& v) {
    if constexpr (std::is_same_v<T, DomainKind>) {
        v = parse_domain(j.get<std::string>());
    } else if constexpr (std::is_same_v<T, Engine>) {
        v = parse_engine(j.get<std::string>());
    } else if constexpr (std::is_same_v<T, Backend>) {
        v = parse_backend(j.get<std::string>());
    } else if constexpr (std::is_same_v<T, GridSpec>) {
        for (const auto& [key, value] : j.items()) {
            if (key == "height") v.height = value.template get<int>();
            else if (key == "width") v.width = value.template get<int>();
            else if (key == "start") v.start = value.template get<std::array<int, 2>>();
            else if (key == "goal") v.goal = value.template get<std::array<int, 2>>();
            else throw ConfigError("grid: unknown key '" + key + "'");
        }
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!j.is_number_integer()) throw ConfigError("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0)
                throw ConfigError("expected a non-negative integer");
        }
        v = j.get<T>();
    } else {
        v = j.get<T>();
    }
}

void require(bool ok, const char* field, const char* range) {
    if (!ok) throw ConfigError(std::string(field) + " must be " + range);
}

bool in_cell(const std::array<int, 2>& c, const GridSpec& g) {
    return c[0] >= 0 && c[0] < g.height && c[1] >= 0 && c[1] < g.width;
}

}  // namespace

void validate(const RunConfig& c) {
    require(c.budget >= 1, "budget", ">= 1");
    require(c.weight >= 0.0, "weight", ">= 0");
    require(c.sims_per_move >= 1, "sims_per_move", ">= 1");
    require(c.move_cap >= 0, "move_cap", ">= 0");
    require(c.runs >= 1, "runs", ">= 1");
    require(c.p >= 0.0 && c.p <= 1.0, "p", "in [0, 1]");
    require(c.batch_instances >= 1, "batch_instances", ">= 1");
    require(c.train_steps >= 0, "train_steps", ">= 0");
    require(c.train_batch >= 1, "train_batch", ">= 1");
    require(c.learning_rate > 0.0 && c.learning_rate <= 1.0, "learning_rate", "in (0, 1]");
    require(c.init_range > 0.0, "init_range", "> 0");
    require(c.hidden >= 1, "hidden", ">= 1");
    require(c.max_grad_norm >= 0.0, "max_grad_norm", ">= 0");
    require(c.plan_buffer >= 1, "plan_buffer", ">= 1");
    require(c.gvi_buffer >= 1, "gvi_buffer", ">= 1");
    require(c.cap_multiplier >= 1.0, "cap_multiplier", ">= 1");
    require(c.cap_floor >= 0.0, "cap_floor", ">= 0");
    require(c.stall_window >= 1, "stall_window", ">= 1");
    require(c.max_iterations >= 1, "max_iterations", ">= 1");
    require(c.workers >= 0, "workers", ">= 0");
    require(c.checkpoint_every >= 0, "checkpoint_every", ">= 0");
    require(!c.out_dir.empty(), "out_dir", "non-empty");
    require(c.first_level >= 1, "first_level", ">= 1");
    require(c.last_level == 0 || c.last_level >= c.first_level, "last_level", "0 or >= first_level");
    require(c.grid.height >= 1 && c.grid.width >= 1, "grid", "at least 1x1");
    require(in_cell(c.grid.start, c.grid) && in_cell(c.grid.goal, c.grid), "grid start and goal", "on the board");
    require(c.npuzzle_side >= 2 && c.npuzzle_side <= 6, "npuzzle_side", "in [2, 6]");
    require(c.quality_per_k >= 1, "quality_per_k", ">= 1");
    require(c.quality_k_max >= 1, "quality_k_max", ">= 1");
    require(c.ablate_p.size() >= 2, "ablate_p", "a list of at least two values");
    for (double p : c.ablate_p) require(p >= 0.0 && p <= 1.0, "ablate_p", "a list of values in [0, 1]");
    require(c.grid_max_iterations >= 1, "grid_max_iterations", ">= 1");
    require(c.grid_followup >= 0, "grid_followup", ">= 0");
    require(c.frame_every >= 0, "frame_every", ">= 0");
    require(c.oracle_node_cap >= 1, "oracle_node_cap", ">= 1");
}

std::string to_json(const RunConfig& cfg) {
    json j = json::object();
    for_each_field(cfg, [&](const char* name, const auto& v) { j[name] = encode_field(v); });
    return j.dump(2) + "\n";
}

RunConfig config_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    RunConfig cfg;
    std::set<std::string> known;
    for_each_field(cfg, [&](const char* name, auto& v) {
        known.insert(name);
        if (!j.contains(name)) return;
        try {
            decode_field(j.at(name), v);
        } catch (const json::exception& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        } catch (const Error& e) {
            throw ConfigError(std::string(name) + ": " + e.what());
        }
    });
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");
    validate(cfg);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return config_from_json(text.str());
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json(cfg);
}

int resolved_workers(const RunConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::uint64_t substream(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) h = (h ^ ch) * 0x100000001b3ULL;
    return mix64(seed ^ h);
}

CurriculumConfig curriculum_config(const RunConfig& c) {
    CurriculumConfig out;
    out.search.engine = c.engine;
    out.search.budget = c.budget;
    out.search.weight = c.weight;
    out.search.sims_per_move = c.sims_per_move;
    out.search.move_cap = c.move_cap;
    out.search.runs = c.runs;
    out.batch_instances = c.batch_instances;
    out.train_steps = c.train_steps;
    out.train_batch = c.train_batch;
    out.p = c.p;
    out.cap = CapPolicy{c.cap_multiplier, c.cap_floor};
    out.gvi.freeze_open_labels = c.freeze_open_labels;
    out.stall_window = c.stall_window;
    out.max_iterations = c.max_iterations;
    out.workers = resolved_workers(c);
    out.seed = c.seed;
    return out;
}

EstimatorConfig estimator_config(const RunConfig& c, std::span<const Instance> instances) {
    EstimatorConfig base;
    base.backend = c.backend;
    base.init_range = c.init_range;
    base.learning_rate = c.learning_rate;
    base.hidden = c.hidden;
    base.max_grad_norm = c.max_grad_norm;
    base.seed = substream(c.seed, "estimator");
    if (c.backend == Backend::net) return Estimator::net_config_for(instances, base);
    return base;
}

}  // namespace gvp
