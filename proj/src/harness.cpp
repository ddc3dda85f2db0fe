#include "gvp/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "gvp/npuzzle.hpp"
#include "gvp/sokoban.hpp"

namespace gvp {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::string padded(int it) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", it);
    return buf;
}

std::vector<fs::path> level_files(const std::vector<std::string>& entries) {
    std::vector<fs::path> files;
    for (const auto& e : entries) {
        const fs::path p(e);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& f : fs::directory_iterator(p))
                if (f.is_regular_file() && f.path().extension() != ".md") found.push_back(f.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    return files;
}

void log_line(std::ostream* log, const std::string& line) {
    if (log) *log << line << std::endl;
}

}  // namespace

std::vector<Instance> scramble_pool(const RunConfig& cfg) {
    const auto goal = make_npuzzle_goal_instance(cfg.npuzzle_side);
    const auto seed = substream(cfg.seed, "scrambler");
    std::vector<Instance> out;
    for (int k = 1; k <= cfg.quality_k_max; ++k) {
        for (int j = 0; j < cfg.quality_per_k; ++j) {
            const auto key = static_cast<std::uint64_t>(k) * 1000003ULL + static_cast<std::uint64_t>(j);
            auto inst = scramble(goal, k, mix64(seed ^ mix64(key)));
            inst.id = "k" + std::to_string(k) + "-" + std::to_string(j);
            out.push_back(std::move(inst));
        }
    }
    return out;
}

LoadedInstances load_instances(const RunConfig& cfg) {
    LoadedInstances out;
    if (cfg.domain == DomainKind::grid) {
        out.instances.push_back(make_grid_instance(cfg.grid));
        return out;
    }
    if (cfg.domain == DomainKind::npuzzle && cfg.levels.empty()) {
        out.instances = scramble_pool(cfg);
        return out;
    }
    std::vector<Instance> all;
    for (const auto& file : level_files(cfg.levels)) {
        try {
            const auto text = read_file(file);
            const auto prefix = file.stem().string();
            auto parsed = cfg.domain == DomainKind::sokoban ? parse_xsb_collection(text, prefix)
                                                            : parse_npuzzle_file(text, prefix);
            if (parsed.empty()) throw Error("no levels");
            for (auto& inst : parsed) all.push_back(std::move(inst));
        } catch (const ParseError& e) {
            out.errors.push_back(file.string() + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                                 ": " + e.what());
        } catch (const Error& e) {
            out.errors.push_back(file.string() + ": " + e.what());
        }
    }
    const auto first = static_cast<std::size_t>(cfg.first_level - 1);
    const auto last = cfg.last_level == 0 ? all.size() : std::min(all.size(), static_cast<std::size_t>(cfg.last_level));
    for (std::size_t i = first; i < last; ++i) out.instances.push_back(std::move(all[i]));
    if (out.instances.empty()) {
        std::string msg = "no instances loaded";
        for (const auto& e : out.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return out;
}

void write_plans(const fs::path& path, const TaskPool& pool) {
    auto out = open_out(path);
    for (const auto& rec : pool.records())
        if (rec.solved) out << rec.instance.id << '\t' << format_plan(*rec.best_plan, rec.instance) << '\n';
}

std::vector<PlanEntry> read_plans(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<PlanEntry> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("plans: expected id<TAB>plan", number, 1);
        out.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    return out;
}

ValidationReport validate_plans(std::span<const PlanEntry> plans, std::span<const Instance> instances) {
    ValidationReport report;
    for (const auto& entry : plans) {
        ++report.checked;
        const auto it = std::find_if(instances.begin(), instances.end(),
                                     [&](const Instance& inst) { return inst.id == entry.id; });
        if (it == instances.end()) {
            report.failures.push_back({entry.id, "unknown instance"});
            continue;
        }
        try {
            replay(parse_plan(entry.text, *it), *it);
        } catch (const Error& e) {
            report.failures.push_back({entry.id, e.what()});
        }
    }
    return report;
}

std::string metrics_header() {
    return "iteration,attempted,newly_solved,solved_total,expanded,generated,unique_states,duplicate_hits,"
           "unique_over_expanded,expanded_over_unique,train_steps,loss_before,loss_after,plan_samples,gvi_samples,"
           "plan_buffer,gvi_buffer,estimator_digest";
}

std::string metrics_row(const IterationReport& r) {
    const auto& c = r.counters;
    const double expanded = static_cast<double>(c.expanded), unique = static_cast<double>(c.unique_states);
    std::string row;
    row += std::to_string(r.iteration) + ',' + std::to_string(r.attempted.size()) + ',' +
           std::to_string(r.newly_solved.size()) + ',' + std::to_string(r.solved_total) + ',';
    row += std::to_string(c.expanded) + ',' + std::to_string(c.generated) + ',' + std::to_string(c.unique_states) +
           ',' + std::to_string(c.duplicate_hits) + ',';
    row += num(expanded > 0 ? unique / expanded : 0.0) + ',' + num(unique > 0 ? expanded / unique : 0.0) + ',';
    row += std::to_string(r.train_steps) + ',' + num(r.train.loss_before) + ',' + num(r.train.loss_after) + ',';
    row += std::to_string(r.train.plan_samples) + ',' + std::to_string(r.train.gvi_samples) + ',';
    row += std::to_string(r.plan_buffer) + ',' + std::to_string(r.gvi_buffer) + ',' + hex(r.estimator_digest);
    return row;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream fields(line);
        while (std::getline(fields, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (!rows.empty() && cells.size() != rows.front().size())
            throw ParseError("csv: row has " + std::to_string(cells.size()) + " cells", static_cast<int>(rows.size()) + 1, 1);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string run_records_jsonl(const IterationReport& report, Engine engine) {
    std::string out;
    for (const auto& run : report.runs) {
        nlohmann::json j{{"iteration", report.iteration},
                         {"instance_id", run.instance_id},
                         {"engine", to_string(engine)},
                         {"solved", run.solved},
                         {"plan_len", run.plan_length},
                         {"expanded", run.counters.expanded},
                         {"generated", run.counters.generated},
                         {"unique_states", run.counters.unique_states},
                         {"duplicate_hits", run.counters.duplicate_hits},
                         {"wall_time_ms", run.counters.wall_time_ms}};
        out += j.dump() + '\n';
    }
    return out;
}

CurriculumRun run_curriculum(const RunConfig& cfg, std::vector<Instance> instances, const fs::path& run_dir,
                             std::ostream* log) {
    if (instances.empty()) throw ConfigError("no instances to train on");
    fs::create_directories(run_dir / "checkpoints");
    save_config(cfg, run_dir / "config.json");

    CurriculumRun result;
    Estimator est(estimator_config(cfg, instances));
    result.pool = TaskPool(std::move(instances));
    ReplayBuffer buffers(cfg.plan_buffer, cfg.gvi_buffer);
    CurriculumRng rng(cfg.seed);
    const auto cc = curriculum_config(cfg);

    auto metrics = open_out(run_dir / "metrics.csv");
    auto runs = open_out(run_dir / "runs.jsonl");
    metrics << metrics_header() << '\n';
    result.summary = run_until_stall(result.pool, est, buffers, cc, rng,
                                     [&](const IterationReport& r, const TaskPool& pool, const Estimator& e) {
                                         metrics << metrics_row(r) << '\n' << std::flush;
                                         runs << run_records_jsonl(r, cfg.engine) << std::flush;
                                         result.plan_samples += r.train.plan_samples;
                                         result.gvi_samples += r.train.gvi_samples;
                                         if (cfg.checkpoint_every > 0 && r.iteration % cfg.checkpoint_every == 0)
                                             e.save(run_dir / "checkpoints" / ("iter_" + padded(r.iteration) + ".bin"));
                                         log_line(log, "iteration " + std::to_string(r.iteration) + ": solved " +
                                                           std::to_string(pool.solved_count()) + "/" +
                                                           std::to_string(pool.size()) + " (+" +
                                                           std::to_string(r.newly_solved.size()) + "), loss " +
                                                           num(r.train.loss_after));
                                     });
    // Reports are on disk; keep only the summary rows needed by callers.
    for (auto& r : result.summary.reports) r.runs.clear();
    est.save(run_dir / "checkpoints" / "final.bin");
    result.final_digest = est.digest();
    write_plans(run_dir / "plans.tsv", result.pool);

    nlohmann::json solved = nlohmann::json::array();
    for (const auto& rec : result.pool.records()) {
        if (!rec.solved) continue;
        nlohmann::json entry{{"id", rec.instance.id}, {"plan_len", rec.best_plan->length()}};
        if (rec.instance.domain() == DomainKind::sokoban) {
            entry["pushes"] = rec.best_plan->length();
            entry["moves"] = format_plan(*rec.best_plan, rec.instance).size();
        }
        solved.push_back(std::move(entry));
    }
    nlohmann::json summary{{"instances", result.pool.size()},
                           {"solved", result.pool.solved_count()},
                           {"iterations", result.summary.iterations},
                           {"stalled", result.summary.stalled},
                           {"plan_samples", result.plan_samples},
                           {"gvi_samples", result.gvi_samples},
                           {"estimator_digest", hex(result.final_digest)},
                           {"plans", std::move(solved)}};
    open_out(run_dir / "summary.json") << summary.dump(2) << '\n';
    return result;
}

SolveResult cmd_solve(const RunConfig& cfg, std::ostream* log) {
    auto loaded = load_instances(cfg);
    for (const auto& e : loaded.errors) log_line(log, "skipped " + e);
    log_line(log, "loaded " + std::to_string(loaded.instances.size()) + " instances");
    SolveResult out;
    out.load_errors = std::move(loaded.errors);
    out.run = run_curriculum(cfg, std::move(loaded.instances), cfg.out_dir, log);
    return out;
}

std::vector<std::uint8_t> expanded_mask(const GridSpec& grid, std::span<const SearchOutcome> outcomes) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.height * grid.width), 0);
    for (const auto& o : outcomes)
        for (const auto& g : o.graphs)
            for (const auto& node : g.nodes())
                if (node.status == NodeStatus::closed)
                    mask[static_cast<std::size_t>(node.state[0] * grid.width + node.state[1])] = 1;
    return mask;
}

bool connected_from(const GridSpec& grid, std::span<const std::uint8_t> mask, std::array<int, 2> start) {
    const int w = grid.width;
    const auto at = [&](int r, int c) { return static_cast<std::size_t>(r * w + c); };
    if (!mask[at(start[0], start[1])]) return false;
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::queue<std::array<int, 2>> todo;
    todo.push(start);
    seen[at(start[0], start[1])] = 1;
    std::size_t reached = 1;
    while (!todo.empty()) {
        const auto [r, c] = todo.front();
        todo.pop();
        const int dr[] = {1, -1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
            const int nr = r + dr[d], nc = c + dc[d];
            if (nr < 0 || nr >= grid.height || nc < 0 || nc >= w) continue;
            const auto i = at(nr, nc);
            if (!mask[i] || seen[i]) continue;
            seen[i] = 1;
            ++reached;
            todo.push({nr, nc});
        }
    }
    return reached == static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

namespace {

void write_frame(const fs::path& path, const GridSpec& grid, const std::function<std::string(int, int)>& cell) {
    auto out = open_out(path);
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) out << (c ? " " : "") << cell(r, c);
        out << '\n';
    }
}

}  // namespace

GridDemoResult cmd_grid_demo(const RunConfig& cfg, std::ostream* log) {
    if (cfg.backend != Backend::tabular) throw ConfigError("grid-demo needs the tabular backend");
    const fs::path run_dir = cfg.out_dir;
    fs::create_directories(run_dir / "frames");
    save_config(cfg, run_dir / "config.json");

    auto instance = make_grid_instance(cfg.grid);
    const GridSpec& grid = cfg.grid;
    std::vector<Instance> instances{instance};
    Estimator est(estimator_config(cfg, instances));
    TaskPool pool(instances);
    ReplayBuffer buffers(cfg.plan_buffer, cfg.gvi_buffer);
    CurriculumRng rng(cfg.seed);
    auto cc = curriculum_config(cfg);
    cc.batch_instances = 1;

    const auto value = [&](int r, int c) { return est.evaluate_state(grid_state(r, c), *instance.rules); };
    GridDemoResult result;
    result.init_in_range = true;
    for (int r = 0; r < grid.height; ++r)
        for (int c = 0; c < grid.width; ++c) {
            const double v = value(r, c);
            result.init_in_range &= v >= 0.0 && v < cfg.init_range;
        }
    if (cfg.frame_every > 0) write_frame(run_dir / "frames" / "values_0000.txt", grid, [&](int r, int c) { return num(value(r, c)); });

    auto metrics = open_out(run_dir / "metrics.csv");
    auto runs = open_out(run_dir / "runs.jsonl");
    metrics << metrics_header() << '\n';
    for (int it = 1;; ++it) {
        auto report = run_iteration(pool, est, buffers, cc, rng, it, IterationOptions{true});
        const auto mask = expanded_mask(grid, report.outcomes);
        if (it == 1) result.iteration1_connected = connected_from(grid, mask, grid.start);
        if (cfg.frame_every > 0 && it % cfg.frame_every == 0) {
            write_frame(run_dir / "frames" / ("values_" + padded(it) + ".txt"), grid,
                        [&](int r, int c) { return num(value(r, c)); });
            write_frame(run_dir / "frames" / ("expanded_" + padded(it) + ".txt"), grid, [&](int r, int c) {
                return std::string(mask[static_cast<std::size_t>(r * grid.width + c)] ? "1" : "0");
            });
        }
        const bool solved = report.runs.front().solved;
        if (result.first_solve == 0) {
            if (solved) result.first_solve = it;
        } else {
            ++result.followups;
            result.resolved += solved;
        }
        metrics << metrics_row(report) << '\n' << std::flush;
        runs << run_records_jsonl(report, cfg.engine) << std::flush;
        log_line(log, "iteration " + std::to_string(it) + ": " + (solved ? "solved, " : "unsolved, ") +
                          std::to_string(report.counters.expanded) + " expanded");
        report.outcomes.clear();
        result.reports.push_back(std::move(report));
        result.iterations = it;
        if (result.first_solve == 0 ? it >= cfg.grid_max_iterations : result.followups >= cfg.grid_followup) break;
    }

    nlohmann::json summary{{"iterations", result.iterations},
                           {"first_solve", result.first_solve},
                           {"followups", result.followups},
                           {"resolved", result.resolved},
                           {"iteration1_connected", result.iteration1_connected},
                           {"init_in_range", result.init_in_range}};
    open_out(run_dir / "summary.json") << summary.dump(2) << '\n';
    return result;
}

QualityResult cmd_quality(const RunConfig& cfg, std::ostream* log) {
    if (cfg.domain != DomainKind::npuzzle) throw ConfigError("quality needs the npuzzle domain");
    QualityResult result;
    const fs::path run_dir = cfg.out_dir;
    fs::create_directories(run_dir);

    std::vector<Instance> included;
    std::vector<int> optimum, scramble_k;
    auto oracle_csv = open_out(run_dir / "oracle.csv");
    oracle_csv << "instance_id,k,optimal_length,solver,nodes\n";
    result.by_k.resize(static_cast<std::size_t>(cfg.quality_k_max));
    for (int k = 1; k <= cfg.quality_k_max; ++k) result.by_k[static_cast<std::size_t>(k - 1)].k = k;
    for (auto& inst : scramble_pool(cfg)) {
        const int k = std::stoi(inst.id.substr(1, inst.id.find('-') - 1));
        auto& row = result.by_k[static_cast<std::size_t>(k - 1)];
        try {
            const auto o = oracle_optimal(inst, cfg.oracle_node_cap);
            oracle_csv << inst.id << ',' << k << ',' << o.optimal_length << ',' << to_string(o.solver) << ',' << o.nodes
                       << '\n';
            optimum.push_back(o.optimal_length);
            scramble_k.push_back(k);
            included.push_back(std::move(inst));
            ++row.instances;
        } catch (const OracleLimitError&) {
            oracle_csv << inst.id << ',' << k << ",,excluded,\n";
            ++row.excluded;
            ++result.excluded;
        }
    }
    oracle_csv.close();
    log_line(log, "oracle: " + std::to_string(included.size()) + " instances, " + std::to_string(result.excluded) +
                      " excluded");

    result.run = run_curriculum(cfg, std::move(included), run_dir, log);
    const auto& records = result.run.pool.records();
    result.instances = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& row = result.by_k[static_cast<std::size_t>(scramble_k[i] - 1)];
        if (!records[i].solved) continue;
        ++result.solved;
        ++row.solved;
        const auto len = static_cast<int>(records[i].best_plan->length());
        for (std::size_t t = 0; t < kRelaxations.size(); ++t) {
            if (len <= optimum[i] + kRelaxations[t]) {
                ++result.within[t];
                ++row.within[t];
            }
        }
    }

    auto table = open_out(run_dir / "quality.csv");
    table << "relaxation,solved,instances,percent\n";
    for (std::size_t t = 0; t < kRelaxations.size(); ++t)
        table << '+' << kRelaxations[t] << ',' << result.within[t] << ',' << result.instances << ','
              << num(result.percent(result.within[t])) << '\n';
    table << "any," << result.solved << ',' << result.instances << ',' << num(result.percent(result.solved)) << '\n';
    auto by_k = open_out(run_dir / "quality_by_k.csv");
    by_k << "k,instances,excluded,solved,within_0,within_5,within_10\n";
    for (const auto& row : result.by_k)
        by_k << row.k << ',' << row.instances << ',' << row.excluded << ',' << row.solved << ',' << row.within[0]
             << ',' << row.within[1] << ',' << row.within[2] << '\n';
    return result;
}

std::vector<AblateRow> cmd_ablate(const RunConfig& cfg, std::ostream* log) {
    auto loaded = load_instances(cfg);
    const fs::path run_dir = cfg.out_dir;
    fs::create_directories(run_dir);
    std::vector<AblateRow> rows;
    for (double p : cfg.ablate_p) {
        RunConfig sub = cfg;
        sub.p = p;
        sub.out_dir = (run_dir / ("p_" + num(p))).string();
        log_line(log, "p = " + num(p));
        const auto run = run_curriculum(sub, loaded.instances, sub.out_dir, log);
        rows.push_back({p, run.pool.size(), run.pool.solved_count(), run.summary.iterations, run.plan_samples,
                        run.gvi_samples});
    }
    auto table = open_out(run_dir / "ablate.csv");
    table << "p,instances,solved,iterations,plan_samples,gvi_samples\n";
    for (const auto& r : rows)
        table << num(r.p) << ',' << r.instances << ',' << r.solved << ',' << r.iterations << ',' << r.plan_samples
              << ',' << r.gvi_samples << '\n';
    return rows;
}

ValidationReport cmd_validate(const RunConfig& cfg, const fs::path& plans) {
    const auto loaded = load_instances(cfg);
    const auto entries = read_plans(plans);
    return validate_plans(entries, loaded.instances);
}

std::vector<OracleResult> cmd_oracle(const RunConfig& cfg, std::ostream* log) {
    const auto loaded = load_instances(cfg);
    std::vector<OracleResult> out;
    for (const auto& inst : loaded.instances) {
        out.push_back(oracle_optimal(inst, cfg.oracle_node_cap));
        log_line(log, inst.id + ": " + std::to_string(out.back().optimal_length));
    }
    return out;
}

}  // namespace gvp
