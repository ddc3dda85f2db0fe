#include "gvp/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace gvp {
namespace {

constexpr char kMagic[8] = {'G', 'V', 'P', 'E', 'S', 'T', '0', '1'};

struct Fnv {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
    }
    template <typename T>
    void value(const T& v) { bytes(&v, sizeof v); }
};

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : os_(path, std::ios::binary) {
        if (!os_) throw Error("cannot write " + path.string());
    }
    template <typename T>
    void value(const T& v) { os_.write(reinterpret_cast<const char*>(&v), sizeof v); }
    template <typename M>
    void block(const M& m) {
        os_.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
    }
    void finish(const std::filesystem::path& path) {
        os_.flush();
        if (!os_) throw Error("write failed: " + path.string());
    }

private:
    std::ofstream os_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : is_(path, std::ios::binary), path_(path) {
        if (!is_) throw Error("cannot read " + path.string());
    }
    template <typename T>
    T value() {
        T v{};
        is_.read(reinterpret_cast<char*>(&v), sizeof v);
        check();
        return v;
    }
    template <typename M>
    void block(M& m) {
        is_.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
        check();
    }
    void bytes(char* out, std::size_t n) {
        is_.read(out, static_cast<std::streamsize>(n));
        check();
    }

private:
    void check() {
        if (!is_) throw Error("truncated checkpoint " + path_.string());
    }
    std::ifstream is_;
    std::filesystem::path path_;
};

std::vector<std::pair<const State*, double>> sorted_table(const std::unordered_map<State, double, StateHash>& table) {
    std::vector<std::pair<const State*, double>> entries;
    entries.reserve(table.size());
    for (const auto& [s, v] : table) entries.emplace_back(&s, v);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        const auto x = a.first->values(), y = b.first->values();
        return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
    });
    return entries;
}

Mlp<double>::Matrix activation_pattern(const MlpActivations<double>& act) {
    Mlp<double>::Matrix p(act.z1.rows() + act.z2.rows(), act.z1.cols());
    p << (act.z1.array() > 0.0).cast<double>().matrix(), (act.z2.array() > 0.0).cast<double>().matrix();
    return p;
}

}  // namespace

std::string_view to_string(Backend backend) { return backend == Backend::tabular ? "tabular" : "net"; }

Backend parse_backend(std::string_view name) {
    if (name == "tabular") return Backend::tabular;
    if (name == "net") return Backend::net;
    throw Error("unknown estimator backend '" + std::string(name) + "'");
}

GradientCheck gradient_check(const Mlp<double>& net, const Mlp<double>::Matrix& x,
                             const Mlp<double>::RowVector& targets, double step) {
    Mlp<double> analytic = net;
    mse_backward(net, x, targets, analytic);
    MlpActivations<double> act;
    mlp_forward(net, x, act);
    const auto base_pattern = activation_pattern(act);

    std::vector<double> grads;
    analytic.for_each_parameter([&](double& g) { grads.push_back(g); });

    GradientCheck result;
    Mlp<double> probe = net;
    std::size_t k = 0;
    probe.for_each_parameter([&](double& p) {
        const double saved = p;
        p = saved + step;
        mlp_forward(probe, x, act);
        const Mlp<double>::RowVector plus = act.y;
        const bool kink_plus = activation_pattern(act) != base_pattern;
        p = saved - step;
        mlp_forward(probe, x, act);
        const bool kink_minus = activation_pattern(act) != base_pattern;
        p = saved;
        const double a = grads[k++];
        if (kink_plus || kink_minus) {
            ++result.skipped;
            return;
        }
        // L(+) - L(-) factored per sample; subtracting the two losses directly
        // cancels away most of the digits of a small gradient.
        const double diff = ((plus - act.y).array() * (plus + act.y - 2.0 * targets).array()).sum() /
                            static_cast<double>(targets.size());
        const double numeric = diff / (2.0 * step);
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(a - numeric) / denom);
        ++result.checked;
    });
    return result;
}

Estimator::Estimator(EstimatorConfig config) : config_(config) {
    if (!(config_.learning_rate > 0.0)) throw Error("estimator: learning rate must be positive");
    if (!(config_.init_range >= 0.0)) throw Error("estimator: init range must be non-negative");
    if (config_.backend == Backend::net) {
        if (config_.input_size == 0) throw Error("estimator: net backend needs an input size");
        if (config_.hidden < 1) throw Error("estimator: hidden width must be positive");
        net_ = Mlp<float>::random(static_cast<Eigen::Index>(config_.input_size), config_.hidden,
                                  mix64(config_.seed ^ 0x6e6574ULL));
    }
}

EstimatorConfig Estimator::net_config_for(std::span<const Instance> instances, EstimatorConfig base) {
    if (instances.empty()) throw Error("estimator: no instances to size the input layer");
    EncodingShape shape{};
    for (const auto& inst : instances) {
        const auto s = inst.rules->shape();
        shape.rows = std::max(shape.rows, s.rows);
        shape.cols = std::max(shape.cols, s.cols);
    }
    base.backend = Backend::net;
    base.shape = shape;
    base.input_size = instances.front().rules->encoding_size(shape);
    for (const auto& inst : instances) {
        if (inst.rules->encoding_size(shape) != base.input_size) {
            throw Error("estimator: instance " + inst.id + " does not share the input layout");
        }
    }
    return base;
}

double Estimator::clamp(double v) const { return std::clamp(v, 0.0, config_.max_output); }

double Estimator::tabular_value(const State& s) const {
    if (auto it = table_.find(s); it != table_.end()) return it->second;
    const std::uint64_t bits = mix64(config_.seed ^ mix64(s.hash()));
    return config_.init_range * static_cast<double>(bits >> 11) * 0x1.0p-53;
}

void Estimator::check_rules(const Rules& rules) const {
    if (rules.encoding_size(config_.shape) != config_.input_size) {
        throw Error("estimator: encoding size mismatch (" + std::to_string(rules.encoding_size(config_.shape)) +
                    " vs " + std::to_string(config_.input_size) + ")");
    }
}

void Estimator::evaluate_batch(std::span<const State> states, const Instance& inst, std::span<double> out) const {
    if (out.size() != states.size()) throw Error("estimator: output span size mismatch");
    if (config_.backend == Backend::tabular) {
        for (std::size_t i = 0; i < states.size(); ++i) out[i] = clamp(tabular_value(states[i]));
        return;
    }
    check_rules(*inst.rules);
    // First layer over the nonzero inputs only; encodings are mostly zero.
    thread_local std::vector<float> buffer;
    buffer.resize(config_.input_size);
    Mlp<float>::Matrix z1 = Mlp<float>::Matrix::Zero(net_.hidden(), static_cast<Eigen::Index>(states.size()));
    for (std::size_t b = 0; b < states.size(); ++b) {
        inst.rules->encode(states[b], config_.shape, buffer);
        auto col = z1.col(static_cast<Eigen::Index>(b));
        for (std::size_t j = 0; j < buffer.size(); ++j) {
            if (buffer[j] != 0.0f) col.noalias() += buffer[j] * net_.w1.col(static_cast<Eigen::Index>(j));
        }
    }
    const auto y = mlp_forward_from_z1(net_, std::move(z1));
    for (std::size_t b = 0; b < states.size(); ++b) out[b] = clamp(static_cast<double>(y(static_cast<Eigen::Index>(b))));
}

double Estimator::evaluate_state(const State& s, const Rules& rules) const {
    if (config_.backend == Backend::tabular) return clamp(tabular_value(s));
    check_rules(rules);
    std::vector<float> buffer(config_.input_size);
    rules.encode(s, config_.shape, buffer);
    const Mlp<float>::Matrix x = Eigen::Map<const Mlp<float>::Matrix>(buffer.data(), static_cast<Eigen::Index>(buffer.size()), 1);
    MlpActivations<float> act;
    mlp_forward(net_, x, act);
    return clamp(static_cast<double>(act.y(0)));
}

Mlp<float>::Matrix Estimator::encode_dense(std::span<const TrainingSample> batch) const {
    Mlp<float>::Matrix x(static_cast<Eigen::Index>(config_.input_size), static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) {
        if (!batch[b].rules) throw Error("estimator: training sample without rules");
        check_rules(*batch[b].rules);
        batch[b].rules->encode(batch[b].state, config_.shape,
                               std::span<float>(x.col(static_cast<Eigen::Index>(b)).data(), config_.input_size));
    }
    return x;
}

Mlp<float>::RowVector Estimator::targets_of(std::span<const TrainingSample> batch) const {
    Mlp<float>::RowVector t(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t b = 0; b < batch.size(); ++b) t(static_cast<Eigen::Index>(b)) = static_cast<float>(batch[b].target);
    return t;
}

double Estimator::loss(std::span<const TrainingSample> batch) const {
    if (batch.empty()) return 0.0;
    if (config_.backend == Backend::tabular) {
        double sum = 0.0;
        for (const auto& s : batch) {
            const double e = clamp(tabular_value(s.state)) - s.target;
            sum += e * e;
        }
        return sum / static_cast<double>(batch.size());
    }
    return static_cast<double>(mse_loss(net_, encode_dense(batch), targets_of(batch)));
}

TrainReport Estimator::fit_batch(std::span<const TrainingSample> batch) {
    if (batch.empty()) throw Error("fit_batch: empty batch");
    TrainReport report;
    report.batch_size = batch.size();
    for (const auto& s : batch) {
        if (!std::isfinite(s.target)) throw Error("fit_batch: non-finite target");
        (s.source == SampleSource::plan ? report.plan_samples : report.gvi_samples) += 1;
    }

    if (config_.backend == Backend::tabular) {
        report.loss_before = loss(batch);
        for (const auto& s : batch) {
            const double v = tabular_value(s.state);
            table_[s.state] = v + config_.learning_rate * (s.target - v);
        }
        report.loss_after = loss(batch);
        return report;
    }

    const auto x = encode_dense(batch);
    const auto t = targets_of(batch);
    Mlp<float> grad = net_;
    report.loss_before = static_cast<double>(mse_backward(net_, x, t, grad));
    float lr = static_cast<float>(config_.learning_rate);
    if (config_.max_grad_norm > 0.0) {
        const double norm = static_cast<double>(parameter_norm(grad));
        if (norm > config_.max_grad_norm) lr *= static_cast<float>(config_.max_grad_norm / norm);
    }
    sgd_step(net_, grad, lr);
    report.loss_after = static_cast<double>(mse_loss(net_, x, t));
    return report;
}

GradientCheck Estimator::gradient_check(std::span<const TrainingSample> samples, double step) const {
    if (config_.backend == Backend::tabular) return {};
    if (samples.empty()) throw Error("gradient_check: no samples");
    const Mlp<double>::Matrix x = encode_dense(samples).cast<double>();
    const Mlp<double>::RowVector t = targets_of(samples).cast<double>();
    return gvp::gradient_check(net_.cast<double>(), x, t, step);
}

void Estimator::save(const std::filesystem::path& path) const {
    Writer w(path);
    for (char c : kMagic) w.value(c);
    w.value(static_cast<std::uint8_t>(config_.backend));
    w.value(config_.init_range);
    w.value(config_.learning_rate);
    w.value(static_cast<std::int32_t>(config_.hidden));
    w.value(config_.max_grad_norm);
    w.value(config_.max_output);
    w.value(config_.seed);
    w.value(static_cast<std::int32_t>(config_.shape.rows));
    w.value(static_cast<std::int32_t>(config_.shape.cols));
    w.value(static_cast<std::uint64_t>(config_.input_size));
    if (config_.backend == Backend::net) {
        w.block(net_.w1);
        w.block(net_.w2);
        w.block(net_.b1);
        w.block(net_.b2);
        w.block(net_.w3);
        w.value(net_.b3);
    } else {
        const auto entries = sorted_table(table_);
        w.value(static_cast<std::uint64_t>(entries.size()));
        for (const auto& [s, v] : entries) {
            w.value(static_cast<std::uint32_t>(s->size()));
            for (auto x : s->values()) w.value(x);
            w.value(v);
        }
    }
    w.finish(path);
}

Estimator Estimator::load(const std::filesystem::path& path) {
    Reader r(path);
    char magic[sizeof kMagic];
    r.bytes(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not an estimator checkpoint: " + path.string());
    EstimatorConfig cfg;
    const auto backend = r.value<std::uint8_t>();
    if (backend > 1) throw Error("bad backend in checkpoint " + path.string());
    cfg.backend = static_cast<Backend>(backend);
    cfg.init_range = r.value<double>();
    cfg.learning_rate = r.value<double>();
    cfg.hidden = r.value<std::int32_t>();
    cfg.max_grad_norm = r.value<double>();
    cfg.max_output = r.value<double>();
    cfg.seed = r.value<std::uint64_t>();
    cfg.shape.rows = r.value<std::int32_t>();
    cfg.shape.cols = r.value<std::int32_t>();
    cfg.input_size = static_cast<std::size_t>(r.value<std::uint64_t>());
    Estimator est(cfg);
    if (cfg.backend == Backend::net) {
        r.block(est.net_.w1);
        r.block(est.net_.w2);
        r.block(est.net_.b1);
        r.block(est.net_.b2);
        r.block(est.net_.w3);
        est.net_.b3 = r.value<float>();
    } else {
        const auto count = r.value<std::uint64_t>();
        for (std::uint64_t i = 0; i < count; ++i) {
            std::vector<State::value_type> values(r.value<std::uint32_t>());
            for (auto& x : values) x = r.value<State::value_type>();
            est.table_[State(std::move(values))] = r.value<double>();
        }
    }
    return est;
}

std::uint64_t Estimator::digest() const {
    Fnv f;
    f.value(static_cast<std::uint8_t>(config_.backend));
    if (config_.backend == Backend::net) {
        auto copy = net_;
        copy.for_each_parameter([&](float& p) { f.value(std::bit_cast<std::uint32_t>(p)); });
    } else {
        for (const auto& [s, v] : sorted_table(table_)) {
            f.value(s->hash());
            f.value(std::bit_cast<std::uint64_t>(v));
        }
    }
    return f.h;
}

ReplayBuffer::ReplayBuffer(std::size_t plan_capacity, std::size_t gvi_capacity)
    : plan_capacity_(plan_capacity), gvi_capacity_(gvi_capacity) {
    if (plan_capacity_ == 0 || gvi_capacity_ == 0) throw Error("replay buffer capacity must be positive");
}

void ReplayBuffer::insert(TrainingSample sample) {
    auto& q = sample.source == SampleSource::plan ? plan_ : gvi_;
    const auto cap = sample.source == SampleSource::plan ? plan_capacity_ : gvi_capacity_;
    (sample.source == SampleSource::plan ? plan_inserted_ : gvi_inserted_) += 1;
    if (q.size() == cap) q.pop_front();
    q.push_back(std::move(sample));
}

void ReplayBuffer::insert(std::span<const TrainingSample> samples) {
    for (const auto& s : samples) insert(s);
}

std::vector<TrainingSample> sample_mixed_batch(const ReplayBuffer& buffers, std::size_t batch_size, double p,
                                               std::mt19937_64& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("sample_mixed_batch: p must lie in [0, 1]");
    std::size_t from_gvi = static_cast<std::size_t>(std::llround(p * static_cast<double>(batch_size)));
    std::size_t from_plan = batch_size - from_gvi;
    if (buffers.gvi().empty()) {
        from_plan += from_gvi;
        from_gvi = 0;
    }
    if (buffers.plan().empty()) {
        from_gvi += from_plan;
        from_plan = 0;
    }
    std::vector<TrainingSample> out;
    if (buffers.gvi().empty() && buffers.plan().empty()) return out;
    out.reserve(batch_size);
    auto draw = [&](const std::deque<TrainingSample>& q, std::size_t n) {
        std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
        for (std::size_t i = 0; i < n; ++i) out.push_back(q[pick(rng)]);
    };
    draw(buffers.gvi(), from_gvi);
    draw(buffers.plan(), from_plan);
    return out;
}

}  // namespace gvp
