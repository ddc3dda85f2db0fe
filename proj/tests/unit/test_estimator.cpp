#include <doctest.h>

#include <filesystem>
#include <random>

#include "gvp/estimator.hpp"
#include "gvp/grid.hpp"
#include "gvp/npuzzle.hpp"
#include "gvp/sokoban.hpp"

using namespace gvp;

namespace {

std::vector<TrainingSample> puzzle_samples(const Instance& goal, int count, std::uint64_t seed) {
    std::vector<TrainingSample> out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < count; ++i) {
        const int k = static_cast<int>(rng() % 20);
        auto inst = scramble(goal, k, rng());
        out.push_back({inst.start, static_cast<double>(k), i % 2 ? SampleSource::gvi : SampleSource::plan, goal.rules});
    }
    return out;
}

EstimatorConfig puzzle_net(std::uint64_t seed, int hidden = 128) {
    auto goal = make_npuzzle_goal_instance(3);
    EstimatorConfig cfg = Estimator::net_config_for(std::span<const Instance>(&goal, 1));
    cfg.seed = seed;
    cfg.hidden = hidden;
    return cfg;
}

}  // namespace

TEST_CASE("tabular estimator") {
    auto grid = make_grid_instance(GridSpec{});
    EstimatorConfig cfg;
    cfg.backend = Backend::tabular;
    cfg.learning_rate = 1.0;
    cfg.seed = 5;
    Estimator est(cfg);

    for (int r = 0; r < 50; ++r)
        for (int c = 0; c < 50; ++c) {
            const double v = est.evaluate(grid_state(r, c), grid);
            CHECK(v >= 0.0);
            CHECK(v < 50.0);
        }
    const auto s = grid_state(3, 4);
    CHECK(est.evaluate(s, grid) == est.evaluate(s, grid));
    CHECK(est.table_size() == 0);

    std::vector<TrainingSample> one{{s, 7.0, SampleSource::plan, grid.rules}};
    auto report = est.fit_batch(one);
    CHECK(est.evaluate(s, grid) == 7.0);
    CHECK(report.loss_after == 0.0);
    CHECK(est.fit_batch(one).loss_before == 0.0);

    std::vector<TrainingSample> bad{{s, std::numeric_limits<double>::infinity(), SampleSource::plan, grid.rules}};
    CHECK_THROWS_AS(est.fit_batch(bad), Error);
    CHECK_THROWS_AS(est.fit_batch({}), Error);
    CHECK(est.gradient_check(one).max_relative_error == 0.0);
}

TEST_CASE("tabular convergence with a partial learning rate") {
    auto grid = make_grid_instance(GridSpec{});
    EstimatorConfig cfg;
    cfg.backend = Backend::tabular;
    cfg.learning_rate = 0.3;
    Estimator est(cfg);
    std::vector<TrainingSample> data;
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c)
            data.push_back({grid_state(r, c), static_cast<double>(98 - r - c), SampleSource::gvi, grid.rules});
    for (int i = 0; i < 100; ++i) est.fit_batch(data);
    CHECK(est.loss(data) < 1e-6);
    CHECK(est.evaluate(grid_state(3, 3), grid) == doctest::Approx(92.0));
}

TEST_CASE("net estimator stays non-negative and learns") {
    auto goal = make_npuzzle_goal_instance(3);
    Estimator est(puzzle_net(1));
    auto batch = puzzle_samples(goal, 32, 2);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        auto inst = scramble(goal, static_cast<int>(rng() % 30), rng());
        CHECK(est.evaluate(inst.start, goal) >= 0.0);
    }
    const double first = est.loss(batch);
    double last = first;
    for (int step = 0; step < 100; ++step) last = est.fit_batch(batch).loss_after;
    CHECK(last < first);
    for (const auto& s : batch) CHECK(est.evaluate(s.state, goal) >= 0.0);

    auto sok = parse_xsb("#####\n#@$.#\n#####");
    CHECK_THROWS_AS(est.evaluate(sok.start, sok), Error);
}

TEST_CASE("batched sparse evaluation matches the dense forward pass") {
    auto goal = make_npuzzle_goal_instance(3);
    Estimator est(puzzle_net(9));
    auto samples = puzzle_samples(goal, 20, 4);
    std::vector<State> states;
    for (const auto& s : samples) states.push_back(s.state);
    std::vector<double> batched(states.size());
    est.evaluate_batch(states, goal, batched);
    for (std::size_t i = 0; i < states.size(); ++i)
        CHECK(batched[i] == doctest::Approx(est.evaluate_state(states[i], *goal.rules)).epsilon(1e-5));
}

TEST_CASE("gradient check") {
    for (std::uint64_t draw = 0; draw < 10; ++draw) {
        auto net = Mlp<double>::random(12, 16, draw);
        std::mt19937_64 rng(draw + 100);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Mlp<double>::Matrix x(12, 8);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
        Mlp<double>::RowVector t(8);
        for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = 20.0 * u(rng);
        auto res = gradient_check(net, x, t);
        CHECK(res.max_relative_error < 1e-4);
        CHECK(res.checked > res.skipped);
    }
    SUBCASE("zero output layer") {
        auto net = Mlp<double>::random(5, 6, 1);
        net.w3.setZero();
        Mlp<double>::Matrix x = Mlp<double>::Matrix::Ones(5, 3);
        Mlp<double>::RowVector t = Mlp<double>::RowVector::Constant(3, 2.0);
        Mlp<double> grad = net;
        mse_backward(net, x, t, grad);
        auto probe = net;
        const double h = 1e-4;
        for (Eigen::Index i = 0; i < net.w3.size(); ++i) {
            probe.w3(i) = h;
            const double plus = mse_loss(probe, x, t);
            probe.w3(i) = -h;
            const double minus = mse_loss(probe, x, t);
            probe.w3(i) = 0.0;
            CHECK(grad.w3(i) == doctest::Approx((plus - minus) / (2 * h)).epsilon(1e-7));
        }
    }
}

TEST_CASE("gradient check after training") {
    auto goal = make_npuzzle_goal_instance(3);
    auto cfg = puzzle_net(17, 32);
    cfg.learning_rate = 1e-3;
    Estimator est(cfg);
    auto data = puzzle_samples(goal, 256, 8);
    CHECK(est.gradient_check(std::span(data).first(8)).max_relative_error < 1e-4);
    for (int i = 0; i < 1000; ++i) est.fit_batch(std::span(data).subspan(static_cast<std::size_t>(i % 8) * 32, 32));
    auto res = est.gradient_check(std::span(data).first(8));
    CHECK(res.max_relative_error < 1e-4);
}

TEST_CASE("checkpoints restore identical evaluation") {
    auto goal = make_npuzzle_goal_instance(3);
    const auto dir = std::filesystem::temp_directory_path() / "gvp_ckpt_test";
    std::filesystem::create_directories(dir);
    Estimator net(puzzle_net(3, 32));
    auto data = puzzle_samples(goal, 64, 5);
    for (int i = 0; i < 10; ++i) net.fit_batch(data);
    net.save(dir / "net.bin");
    auto back = Estimator::load(dir / "net.bin");
    CHECK(back.digest() == net.digest());
    for (const auto& s : data) CHECK(back.evaluate(s.state, goal) == net.evaluate(s.state, goal));

    EstimatorConfig tcfg;
    tcfg.backend = Backend::tabular;
    tcfg.seed = 77;
    Estimator tab(tcfg);
    tab.fit_batch(data);
    tab.save(dir / "tab.bin");
    auto tback = Estimator::load(dir / "tab.bin");
    CHECK(tback.digest() == tab.digest());
    auto fresh = puzzle_samples(goal, 64, 6);
    for (const auto& s : fresh) CHECK(tback.evaluate(s.state, goal) == tab.evaluate(s.state, goal));
    for (const auto& s : data) CHECK(tback.evaluate(s.state, goal) == tab.evaluate(s.state, goal));

    const auto before = net.digest();
    net.fit_batch(data);
    CHECK(net.digest() != before);
    std::filesystem::remove_all(dir);
}

TEST_CASE("replay buffer") {
    auto goal = make_npuzzle_goal_instance(3);
    ReplayBuffer buf(3, 2);
    for (int i = 0; i < 5; ++i) buf.insert(TrainingSample{goal.start, static_cast<double>(i), SampleSource::plan, goal.rules});
    CHECK(buf.plan().size() == 3);
    CHECK(buf.plan().front().target == 2.0);
    CHECK(buf.plan_inserted() == 5);
    CHECK(buf.gvi().empty());

    std::mt19937_64 rng(1);
    auto batch = sample_mixed_batch(buf, 10, 0.6, rng);
    CHECK(batch.size() == 10);  // gvi share backfilled from plan
    for (const auto& s : batch) CHECK(s.source == SampleSource::plan);
    CHECK(sample_mixed_batch(ReplayBuffer{}, 10, 0.5, rng).empty());
    CHECK_THROWS_AS(sample_mixed_batch(buf, 10, 1.5, rng), Error);
}

TEST_CASE("mixed batches follow p") {
    auto goal = make_npuzzle_goal_instance(3);
    ReplayBuffer buf(1000, 1000);
    auto data = puzzle_samples(goal, 2000, 9);
    buf.insert(data);
    REQUIRE(buf.plan().size() == 1000);
    REQUIRE(buf.gvi().size() == 1000);
    std::mt19937_64 rng(2);
    auto count_gvi = [](const std::vector<TrainingSample>& b) {
        return static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](const auto& s) { return s.source == SampleSource::gvi; }));
    };
    CHECK(count_gvi(sample_mixed_batch(buf, 100, 0.6, rng)) == 60);
    CHECK(count_gvi(sample_mixed_batch(buf, 100, 0.0, rng)) == 0);
    CHECK(count_gvi(sample_mixed_batch(buf, 100, 1.0, rng)) == 100);
    for (double p : {0.1, 0.35, 0.77}) {
        std::size_t gvi = 0, total = 0;
        for (int i = 0; i < 10000; ++i) {
            auto b = sample_mixed_batch(buf, 256, p, rng);
            gvi += count_gvi(b);
            total += b.size();
        }
        CHECK(std::abs(static_cast<double>(gvi) / static_cast<double>(total) - p) <= 0.01);
    }
}
