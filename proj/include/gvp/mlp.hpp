#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace gvp {

/// Fully connected net: input -> hidden -> hidden -> 1, ReLU hidden units and
/// a softplus output, so predictions are never negative. Samples are columns.
template <typename Scalar>
struct Mlp {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

    Matrix w1, w2;
    Vector b1, b2;
    RowVector w3;
    Scalar b3 = 0;

    Eigen::Index inputs() const { return w1.cols(); }
    Eigen::Index hidden() const { return w1.rows(); }
    Eigen::Index parameter_count() const { return w1.size() + w2.size() + b1.size() + b2.size() + w3.size() + 1; }

    /// He-normal weights, zero biases.
    static Mlp random(Eigen::Index inputs, Eigen::Index hidden, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto fill = [&](auto& m, double fan_in) {
            std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(dist(rng));
        };
        Mlp net;
        net.w1.resize(hidden, inputs);
        net.w2.resize(hidden, hidden);
        net.w3.resize(hidden);
        fill(net.w1, static_cast<double>(inputs));
        fill(net.w2, static_cast<double>(hidden));
        fill(net.w3, static_cast<double>(hidden));
        net.b1 = Vector::Zero(hidden);
        net.b2 = Vector::Zero(hidden);
        return net;
    }

    template <typename Other>
    Mlp<Other> cast() const {
        Mlp<Other> out;
        out.w1 = w1.template cast<Other>();
        out.w2 = w2.template cast<Other>();
        out.b1 = b1.template cast<Other>();
        out.b2 = b2.template cast<Other>();
        out.w3 = w3.template cast<Other>();
        out.b3 = static_cast<Other>(b3);
        return out;
    }

    /// Calls f(scalar&) on every parameter in a fixed order.
    template <typename F>
    void for_each_parameter(F&& f) {
        for (auto* m : {&w1, &w2}) for (Eigen::Index i = 0; i < m->size(); ++i) f(m->data()[i]);
        for (auto* v : {&b1, &b2}) for (Eigen::Index i = 0; i < v->size(); ++i) f(v->data()[i]);
        for (Eigen::Index i = 0; i < w3.size(); ++i) f(w3.data()[i]);
        f(b3);
    }
};

template <typename Scalar>
Scalar softplus(Scalar z) {
    return std::max(z, Scalar(0)) + std::log1p(std::exp(-std::abs(z)));
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
    if (z >= 0) return Scalar(1) / (Scalar(1) + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (Scalar(1) + e);
}

/// Intermediate values of one forward pass, kept for the backward pass.
template <typename Scalar>
struct MlpActivations {
    typename Mlp<Scalar>::Matrix z1, a1, z2, a2;
    typename Mlp<Scalar>::RowVector z3, y;
};

/// Forward pass over the columns of `x`.
template <typename Scalar>
void mlp_forward(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x, MlpActivations<Scalar>& act) {
    act.z1.noalias() = net.w1 * x;
    act.z1.colwise() += net.b1;
    act.a1 = act.z1.cwiseMax(Scalar(0));
    act.z2.noalias() = net.w2 * act.a1;
    act.z2.colwise() += net.b2;
    act.a2 = act.z2.cwiseMax(Scalar(0));
    act.z3.noalias() = net.w3 * act.a2;
    act.z3.array() += net.b3;
    act.y = act.z3.unaryExpr([](Scalar z) { return softplus(z); });
}

/// Forward pass from a precomputed first-layer pre-activation (columns of
/// w1·x, without the bias). Used when inputs are sparse.
template <typename Scalar>
typename Mlp<Scalar>::RowVector mlp_forward_from_z1(const Mlp<Scalar>& net, typename Mlp<Scalar>::Matrix z1) {
    z1.colwise() += net.b1;
    typename Mlp<Scalar>::Matrix a1 = z1.cwiseMax(Scalar(0));
    typename Mlp<Scalar>::Matrix z2 = net.w2 * a1;
    z2.colwise() += net.b2;
    typename Mlp<Scalar>::RowVector z3 = net.w3 * z2.cwiseMax(Scalar(0));
    z3.array() += net.b3;
    return z3.unaryExpr([](Scalar z) { return softplus(z); });
}

/// Mean squared error of the prediction against `targets`.
template <typename Scalar>
Scalar mse_loss(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x,
                const typename Mlp<Scalar>::RowVector& targets) {
    MlpActivations<Scalar> act;
    mlp_forward(net, x, act);
    return (act.y - targets).squaredNorm() / static_cast<Scalar>(targets.size());
}

/// Mean squared error and its gradient with respect to every parameter;
/// `grad` receives the gradient in the same layout as the net.
template <typename Scalar>
Scalar mse_backward(const Mlp<Scalar>& net, const typename Mlp<Scalar>::Matrix& x,
                    const typename Mlp<Scalar>::RowVector& targets, Mlp<Scalar>& grad) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    using RowVector = typename Mlp<Scalar>::RowVector;
    MlpActivations<Scalar> act;
    mlp_forward(net, x, act);
    const auto n = static_cast<Scalar>(targets.size());
    const RowVector err = act.y - targets;
    const Scalar loss = err.squaredNorm() / n;

    const RowVector dz3 = (Scalar(2) / n) * err.cwiseProduct(act.z3.unaryExpr([](Scalar z) { return sigmoid(z); }));
    grad.w3.noalias() = dz3 * act.a2.transpose();
    grad.b3 = dz3.sum();
    Matrix dz2 = (net.w3.transpose() * dz3).cwiseProduct((act.z2.array() > Scalar(0)).matrix().template cast<Scalar>());
    grad.w2.noalias() = dz2 * act.a1.transpose();
    grad.b2 = dz2.rowwise().sum();
    Matrix dz1 = (net.w2.transpose() * dz2).cwiseProduct((act.z1.array() > Scalar(0)).matrix().template cast<Scalar>());
    grad.w1.noalias() = dz1 * x.transpose();
    grad.b1 = dz1.rowwise().sum();
    return loss;
}

/// Global L2 norm over all parameters.
template <typename Scalar>
Scalar parameter_norm(const Mlp<Scalar>& m) {
    return std::sqrt(m.w1.squaredNorm() + m.w2.squaredNorm() + m.b1.squaredNorm() + m.b2.squaredNorm() +
                     m.w3.squaredNorm() + m.b3 * m.b3);
}

/// net -= lr · grad.
template <typename Scalar>
void sgd_step(Mlp<Scalar>& net, const Mlp<Scalar>& grad, Scalar lr) {
    net.w1 -= lr * grad.w1;
    net.w2 -= lr * grad.w2;
    net.b1 -= lr * grad.b1;
    net.b2 -= lr * grad.b2;
    net.w3 -= lr * grad.w3;
    net.b3 -= lr * grad.b3;
}

}  // namespace gvp
