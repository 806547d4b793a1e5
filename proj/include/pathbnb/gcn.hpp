#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathbnb/bnb.hpp"
#include "pathbnb/datagen.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/instance.hpp"

namespace pathbnb::gcn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

/// |V| x 3 node features (start, end, mandatory).
using FeatureMatrix = Matrix;
/// D^-1/2 (A + I) D^-1/2 with a binary adjacency A.
using NormalizedAdjacency = Matrix;

inline FeatureMatrix encode_instance(const Instance& s, std::size_t n) {
    check_instance(s, n);
    FeatureMatrix x = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 3);
    x(s.start, 0) = 1.0;
    x(s.dest, 1) = 1.0;
    s.mandatory.for_each([&](NodeId m) { x(m, 2) = 1.0; });
    return x;
}

inline NormalizedAdjacency normalized_adjacency(const WeightedGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    NormalizedAdjacency a = NormalizedAdjacency::Identity(n, n);
    for (const Edge& e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1.0;
    const Eigen::VectorXd inv_sqrt_deg = a.rowwise().sum().cwiseSqrt().cwiseInverse();
    return inv_sqrt_deg.asDiagonal() * a * inv_sqrt_deg.asDiagonal();
}

struct Hyperparameters {
    std::size_t width = 100;
    std::size_t conv_layers = 3;
    double dropout = 0.1;
    /// Batch-norm running-moment decay: running = decay * running + (1 - decay) * batch.
    double bn_decay = 0.9;
    double bn_eps = 1e-5;
};

/// Trainable tensors. Layer l has a weight theta[l] and batch-norm scale and
/// shift; the head maps the row-concatenated final features to |V| logits.
struct Parameters {
    std::vector<Matrix> theta;
    std::vector<Matrix> gamma;  // 1 x width
    std::vector<Matrix> beta;   // 1 x width
    Matrix fc_weight;           // |V| x (|V| * width)
    Matrix fc_bias;             // 1 x |V|

    template <typename Fn>
    void for_each(Fn&& fn) {
        for (auto& m : theta) fn(m);
        for (auto& m : gamma) fn(m);
        for (auto& m : beta) fn(m);
        fn(fc_weight);
        fn(fc_bias);
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& m : theta) fn(m);
        for (const auto& m : gamma) fn(m);
        for (const auto& m : beta) fn(m);
        fn(fc_weight);
        fn(fc_bias);
    }

    /// Same shapes, all zeros.
    Parameters zeros_like() const {
        Parameters z = *this;
        z.for_each([](Matrix& m) { m.setZero(); });
        return z;
    }
};

/// GCN bound to one graph: |V| is fixed by the head's shape.
struct GcnModel {
    std::string graph_id;
    std::size_t nodes = 0;
    Hyperparameters hyper;
    Parameters params;
    std::vector<Matrix> running_mean;  // 1 x width per layer
    std::vector<Matrix> running_var;
    NormalizedAdjacency adjacency;

    std::size_t input_width(std::size_t layer) const { return layer == 0 ? 3 : hyper.width; }
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights; unit batch-norm scale,
/// zero shift.
inline GcnModel make_model(const WeightedGraph& g, const Hyperparameters& hyper, std::uint64_t seed) {
    if (hyper.width == 0 || hyper.conv_layers == 0) throw InvalidInput("GCN needs at least one layer of nonzero width");
    GcnModel m;
    m.graph_id = graph_id(g);
    m.nodes = g.node_count();
    m.hyper = hyper;
    m.adjacency = normalized_adjacency(g);
    std::mt19937_64 rng(seed);
    auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double fan_in) {
        std::uniform_real_distribution<double> u(-1.0 / std::sqrt(fan_in), 1.0 / std::sqrt(fan_in));
        Matrix out(rows, cols);
        for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] = u(rng);
        return out;
    };
    const auto w = static_cast<Eigen::Index>(hyper.width);
    const auto n = static_cast<Eigen::Index>(m.nodes);
    for (std::size_t l = 0; l < hyper.conv_layers; ++l) {
        const auto in = static_cast<Eigen::Index>(m.input_width(l));
        m.params.theta.push_back(uniform(in, w, static_cast<double>(in)));
        m.params.gamma.push_back(Matrix::Ones(1, w));
        m.params.beta.push_back(Matrix::Zero(1, w));
        m.running_mean.push_back(Matrix::Zero(1, w));
        m.running_var.push_back(Matrix::Ones(1, w));
    }
    m.params.fc_weight = uniform(n, n * w, static_cast<double>(n * w));
    m.params.fc_bias = uniform(1, n, static_cast<double>(n * w));
    return m;
}

inline void bind_graph(GcnModel& m, const WeightedGraph& g) {
    if (graph_id(g) != m.graph_id) throw InvalidInput("model was trained for graph " + m.graph_id);
    m.nodes = g.node_count();
    m.adjacency = normalized_adjacency(g);
}

enum class Mode { Train, Eval };

/// Activations of one batched forward pass, kept for backward.
struct ForwardCache {
    std::size_t batch = 0;
    Mode mode = Mode::Eval;
    std::vector<Matrix> input;      // H^(l-1), (B|V|) x width_in
    std::vector<Matrix> propagated; // A H^(l-1)
    std::vector<Matrix> normalized; // batch-normalized pre-activations
    std::vector<Matrix> pre_relu;
    std::vector<RowVector> batch_mean;
    std::vector<RowVector> batch_var;
    std::vector<Matrix> dropout_mask;  // empty in eval mode
    std::vector<Matrix> hidden;        // H^(l), after ReLU and dropout
    Matrix logits;                     // B x |V|
    Matrix probabilities;              // B x |V|
};

namespace detail {

inline Matrix stack(const GcnModel& m, std::span<const FeatureMatrix> xs) {
    const auto n = static_cast<Eigen::Index>(m.nodes);
    Matrix out(n * static_cast<Eigen::Index>(xs.size()), 3);
    for (std::size_t b = 0; b < xs.size(); ++b) {
        if (xs[b].rows() != n || xs[b].cols() != 3) throw InvalidInput("feature matrix shape does not match the model");
        out.middleRows(static_cast<Eigen::Index>(b) * n, n) = xs[b];
    }
    return out;
}

/// Applies the per-sample normalized adjacency to a stacked batch.
inline Matrix propagate(const NormalizedAdjacency& a, const Matrix& h, std::size_t batch) {
    const Eigen::Index n = a.rows();
    Matrix out(h.rows(), h.cols());
    for (std::size_t b = 0; b < batch; ++b) {
        const Eigen::Index r = static_cast<Eigen::Index>(b) * n;
        out.middleRows(r, n).noalias() = a * h.middleRows(r, n);
    }
    return out;
}

}  // namespace detail

/// Batched forward pass. Each conv block is: A H theta, batch-norm, ReLU,
/// dropout (train mode only). The final features are flattened row-wise,
/// mapped to |V| logits and softmax-normalized. `rng` draws the dropout
/// masks; it is required in train mode when dropout > 0.
inline ForwardCache forward(const GcnModel& m, std::span<const FeatureMatrix> xs, Mode mode,
                            std::mt19937_64* rng = nullptr) {
    if (m.adjacency.rows() != static_cast<Eigen::Index>(m.nodes)) throw InvalidInput("model is not bound to a graph");
    if (xs.empty()) throw InvalidInput("empty batch");
    ForwardCache c;
    c.batch = xs.size();
    c.mode = mode;
    const std::size_t layers = m.hyper.conv_layers;
    const bool drop = mode == Mode::Train && m.hyper.dropout > 0.0;
    if (drop && rng == nullptr) throw InvalidInput("dropout needs a random generator");
    std::bernoulli_distribution keep(1.0 - m.hyper.dropout);
    const double keep_scale = drop ? 1.0 / (1.0 - m.hyper.dropout) : 1.0;

    Matrix h = detail::stack(m, xs);
    for (std::size_t l = 0; l < layers; ++l) {
        c.input.push_back(h);
        c.propagated.push_back(detail::propagate(m.adjacency, h, c.batch));
        Matrix z = c.propagated.back() * m.params.theta[l];
        RowVector mean;
        RowVector var;
        if (mode == Mode::Train) {
            mean = z.colwise().mean();
            var = (z.rowwise() - mean).array().square().colwise().mean();
        } else {
            mean = m.running_mean[l];
            var = m.running_var[l];
        }
        const RowVector inv_std = (var.array() + m.hyper.bn_eps).rsqrt().matrix();
        Matrix zhat = ((z.rowwise() - mean).array().rowwise() * inv_std.array()).matrix();
        Matrix y = ((zhat.array().rowwise() * m.params.gamma[l].row(0).array()).rowwise() +
                    m.params.beta[l].row(0).array())
                       .matrix();
        c.batch_mean.push_back(std::move(mean));
        c.batch_var.push_back(std::move(var));
        c.normalized.push_back(std::move(zhat));
        h = y.cwiseMax(0.0);
        c.pre_relu.push_back(std::move(y));
        if (drop) {
            Matrix mask(h.rows(), h.cols());
            for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(*rng) ? keep_scale : 0.0;
            h.array() *= mask.array();
            c.dropout_mask.push_back(std::move(mask));
        }
        c.hidden.push_back(h);
    }
    const auto n = static_cast<Eigen::Index>(m.nodes);
    const Eigen::Map<const Matrix> flat(h.data(), static_cast<Eigen::Index>(c.batch), n * h.cols());
    c.logits = flat * m.params.fc_weight.transpose();
    c.logits.rowwise() += m.params.fc_bias.row(0);
    c.probabilities.resize(c.logits.rows(), c.logits.cols());
    for (Eigen::Index b = 0; b < c.logits.rows(); ++b) {
        const auto row = c.logits.row(b);
        const Eigen::ArrayXd e = (row.array() - row.maxCoeff()).exp().transpose();
        c.probabilities.row(b) = (e / e.sum()).transpose();
    }
    return c;
}

/// Single-instance eval-mode probabilities.
inline Eigen::VectorXd predict_probabilities(const GcnModel& m, const FeatureMatrix& x) {
    const FeatureMatrix xs[1] = {x};
    return forward(m, xs, Mode::Eval).probabilities.row(0).transpose();
}

inline double nll_loss(const Eigen::Ref<const Eigen::VectorXd>& probabilities, NodeId label) {
    if (label >= probabilities.size()) throw InvalidInput("label out of range");
    return -std::log(probabilities(label));
}

/// Mean NLL over a forward batch.
inline double batch_loss(const ForwardCache& c, std::span<const NodeId> labels) {
    double sum = 0.0;
    for (std::size_t b = 0; b < labels.size(); ++b)
        sum += -std::log(c.probabilities(static_cast<Eigen::Index>(b), labels[b]));
    return sum / static_cast<double>(labels.size());
}

/// Exact gradients of the mean NLL of a train-mode forward batch.
inline Parameters backward(const GcnModel& m, const ForwardCache& c, std::span<const NodeId> labels) {
    if (labels.size() != c.batch) throw InvalidInput("label count does not match the batch");
    if (c.mode != Mode::Train) throw InvalidInput("backward needs a train-mode forward pass");
    Parameters grad = m.params.zeros_like();
    const auto n = static_cast<Eigen::Index>(m.nodes);
    const auto batch = static_cast<Eigen::Index>(c.batch);

    Matrix d_logits = c.probabilities;
    for (Eigen::Index b = 0; b < batch; ++b) d_logits(b, labels[static_cast<std::size_t>(b)]) -= 1.0;
    d_logits /= static_cast<double>(batch);

    const Matrix& h_last = c.hidden.back();
    const Eigen::Map<const Matrix> flat(h_last.data(), batch, n * h_last.cols());
    grad.fc_weight.noalias() = d_logits.transpose() * flat;
    grad.fc_bias = d_logits.colwise().sum();

    Matrix d_h(h_last.rows(), h_last.cols());
    Eigen::Map<Matrix>(d_h.data(), batch, n * h_last.cols()).noalias() = d_logits * m.params.fc_weight;

    const double rows = static_cast<double>(d_h.rows());
    for (std::size_t l = m.hyper.conv_layers; l-- > 0;) {
        if (!c.dropout_mask.empty()) d_h.array() *= c.dropout_mask[l].array();
        Matrix d_y = (c.pre_relu[l].array() > 0.0).select(d_h, 0.0);
        const Matrix& zhat = c.normalized[l];
        grad.gamma[l] = (d_y.array() * zhat.array()).colwise().sum();
        grad.beta[l] = d_y.colwise().sum();
        const Matrix d_zhat = (d_y.array().rowwise() * m.params.gamma[l].row(0).array()).matrix();
        const RowVector inv_std = (c.batch_var[l].array() + m.hyper.bn_eps).rsqrt().matrix();
        const RowVector sum_d = d_zhat.colwise().sum();
        const RowVector sum_dz = (d_zhat.array() * zhat.array()).colwise().sum();
        Matrix d_z = ((rows * d_zhat.array()).rowwise() - sum_d.array()).matrix();
        d_z.array() -= zhat.array().rowwise() * sum_dz.array();
        d_z.array().rowwise() *= (inv_std.array() / rows);
        grad.theta[l].noalias() = c.propagated[l].transpose() * d_z;
        if (l > 0) {
            const Matrix d_prop = d_z * m.params.theta[l].transpose();
            d_h = detail::propagate(m.adjacency, d_prop, c.batch);  // adjacency is symmetric
        }
    }
    return grad;
}

/// Folds the batch moments of a train-mode pass into the running moments
/// (unbiased variance, decay `bn_decay`).
inline void update_running_moments(GcnModel& m, const ForwardCache& c) {
    const double rows = static_cast<double>(c.input.front().rows());
    const double unbias = rows > 1.0 ? rows / (rows - 1.0) : 1.0;
    const double d = m.hyper.bn_decay;
    for (std::size_t l = 0; l < m.hyper.conv_layers; ++l) {
        m.running_mean[l] = d * m.running_mean[l] + (1.0 - d) * c.batch_mean[l];
        m.running_var[l] = d * m.running_var[l] + (1.0 - d) * unbias * c.batch_var[l];
    }
}

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Parameters first_moment;
    Parameters second_moment;
    std::uint64_t step = 0;

    static AdamState for_model(const GcnModel& m) { return {m.params.zeros_like(), m.params.zeros_like(), 0}; }
};

inline void adam_step(Parameters& params, const Parameters& grad, AdamState& state, const AdamConfig& cfg = {}) {
    ++state.step;
    const double correct1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double correct2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    std::vector<Matrix*> p;
    std::vector<const Matrix*> g;
    std::vector<Matrix*> m1;
    std::vector<Matrix*> m2;
    params.for_each([&](Matrix& x) { p.push_back(&x); });
    grad.for_each([&](const Matrix& x) { g.push_back(&x); });
    state.first_moment.for_each([&](Matrix& x) { m1.push_back(&x); });
    state.second_moment.for_each([&](Matrix& x) { m2.push_back(&x); });
    for (std::size_t i = 0; i < p.size(); ++i) {
        m1[i]->array() = cfg.beta1 * m1[i]->array() + (1.0 - cfg.beta1) * g[i]->array();
        m2[i]->array() = cfg.beta2 * m2[i]->array() + (1.0 - cfg.beta2) * g[i]->array().square();
        p[i]->array() -= cfg.learning_rate * (m1[i]->array() / correct1) /
                         ((m2[i]->array() / correct2).sqrt() + cfg.epsilon);
    }
}

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    AdamConfig adam;
    /// Called after each epoch with (epoch index, mean loss).
    std::function<void(std::size_t, double)> on_epoch;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::size_t steps = 0;
};

/// Minibatch NLL training with Adam. Deterministic under `cfg.seed`.
inline TrainReport train(GcnModel& m, const Dataset& data, const TrainConfig& cfg) {
    if (data.graph_id != m.graph_id) throw InvalidInput("dataset graph " + data.graph_id + " does not match model graph " + m.graph_id);
    if (cfg.batch_size == 0) throw InvalidInput("batch size must be positive");
    TrainReport report;
    if (data.pairs.empty()) return report;

    std::vector<FeatureMatrix> features;
    std::vector<NodeId> labels;
    features.reserve(data.pairs.size());
    for (const TrainingPair& p : data.pairs) {
        features.push_back(encode_instance(p.state.normalized(), m.nodes));
        labels.push_back(p.label);
    }

    std::mt19937_64 rng(cfg.seed);
    AdamState opt = AdamState::for_model(m);
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<FeatureMatrix> batch_x;
    std::vector<NodeId> batch_y;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double total = 0.0;
        for (std::size_t first = 0; first < order.size(); first += cfg.batch_size) {
            const std::size_t last = std::min(order.size(), first + cfg.batch_size);
            batch_x.clear();
            batch_y.clear();
            for (std::size_t i = first; i < last; ++i) {
                batch_x.push_back(features[order[i]]);
                batch_y.push_back(labels[order[i]]);
            }
            const ForwardCache c = forward(m, batch_x, Mode::Train, &rng);
            const double loss = batch_loss(c, batch_y);
            if (!std::isfinite(loss)) throw std::runtime_error("training diverged: non-finite loss");
            total += loss * static_cast<double>(batch_y.size());
            adam_step(m.params, backward(m, c, batch_y), opt, cfg.adam);
            update_running_moments(m, c);
            ++report.steps;
        }
        report.epoch_loss.push_back(total / static_cast<double>(order.size()));
        if (cfg.on_epoch) cfg.on_epoch(epoch, report.epoch_loss.back());
    }
    return report;
}

struct Prediction {
    NodeId node = 0;          ///< argmax over the mandatory set
    NodeId unrestricted = 0;  ///< argmax over all nodes
};

/// Eval-mode prediction of the next mandatory node, restricted to M (ties to
/// the lowest index).
inline Prediction predict(const GcnModel& m, const Instance& s) {
    const Instance norm = s.normalized();
    if (norm.mandatory.empty()) throw InvalidInput("prediction needs a nonempty mandatory set");
    const Eigen::VectorXd p = predict_probabilities(m, encode_instance(norm, m.nodes));
    Prediction out;
    Eigen::Index arg = 0;
    p.maxCoeff(&arg);
    out.unrestricted = static_cast<NodeId>(arg);
    double best = -1.0;
    norm.mandatory.for_each([&](NodeId v) {
        if (p(v) > best) {
            best = p(v);
            out.node = v;
        }
    });
    return out;
}

inline NodeId predict_next_mandatory(const GcnModel& m, const Instance& s) { return predict(m, s).node; }

/// Visiting order from repeated predictions on (q_i, dest, M_i), where q_i is
/// the previous prediction and M_i the remaining mandatory nodes.
inline Order recursive_order(const GcnModel& m, const Instance& s) {
    Instance sub = s.normalized();
    Order order;
    order.reserve(sub.mandatory.size());
    while (!sub.mandatory.empty()) {
        const NodeId next = predict_next_mandatory(m, sub);
        order.push_back(next);
        sub = Instance{next, sub.dest, sub.mandatory.without(next)}.normalized();
    }
    return order;
}

struct ProbeResult {
    Order order;
    std::vector<NodeId> path;
    double cost = 0.0;
};

/// Feasible solution from the predicted order; its cost is an upper bound
/// on the optimum.
inline ProbeResult probe_upper_bound(const GcnModel& m, const Instance& s, const ShortestPathTable& t) {
    const Instance norm = s.normalized();
    ProbeResult out;
    out.order = recursive_order(m, norm);
    auto pc = order_to_path(norm, out.order, t);
    out.path = std::move(pc.path);
    out.cost = pc.cost;
    return out;
}

/// Top-1 accuracy of restricted predictions over a dataset.
inline double accuracy(const GcnModel& m, const Dataset& d) {
    if (d.pairs.empty()) return 0.0;
    std::size_t hits = 0;
    for (const TrainingPair& p : d.pairs)
        if (predict_next_mandatory(m, p.state) == p.label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(d.pairs.size());
}

// ---------------------------------------------------------------------------
// Model file: "GCNP", u32 version, graph id, hyperparameters, tensor count,
// then (u32 rows, u32 cols, row-major f64 payload) per tensor, and a trailing
// u64 FNV-1a checksum of everything before it. Little-endian.

inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

class ByteWriter {
public:
    template <typename T>
    void put(const T& v) {
        const auto* p = reinterpret_cast<const char*>(&v);
        bytes_.append(p, sizeof(T));
    }
    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        bytes_.append(s);
    }
    void put_matrix(const Matrix& m) {
        put(static_cast<std::uint32_t>(m.rows()));
        put(static_cast<std::uint32_t>(m.cols()));
        bytes_.append(reinterpret_cast<const char*>(m.data()), static_cast<std::size_t>(m.size()) * sizeof(double));
    }
    std::string& bytes() { return bytes_; }

private:
    std::string bytes_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
    template <typename T>
    T get() {
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string s(bytes_.substr(pos_, len));
        pos_ += len;
        return s;
    }
    Matrix get_matrix(Eigen::Index rows, Eigen::Index cols) {
        const auto r = get<std::uint32_t>();
        const auto c = get<std::uint32_t>();
        if (r != rows || c != cols) throw ParseError("model tensor shape mismatch");
        const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
        need(count * sizeof(double));
        Matrix m(rows, cols);
        std::memcpy(m.data(), bytes_.data() + pos_, count * sizeof(double));
        pos_ += count * sizeof(double);
        return m;
    }
    std::size_t position() const { return pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw ParseError("truncated model file");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

template <typename Model, typename Fn>
void for_each_tensor(Model& m, Fn&& fn) {
    m.params.for_each(fn);
    for (auto& t : m.running_mean) fn(t);
    for (auto& t : m.running_var) fn(t);
}

}  // namespace detail

inline std::string save_model(const GcnModel& model) {
    detail::ByteWriter w;
    w.bytes().append("GCNP");
    w.put(kModelFormatVersion);
    w.put_string(model.graph_id);
    w.put(static_cast<std::uint32_t>(model.nodes));
    w.put(static_cast<std::uint32_t>(model.hyper.width));
    w.put(static_cast<std::uint32_t>(model.hyper.conv_layers));
    w.put(model.hyper.dropout);
    w.put(model.hyper.bn_decay);
    w.put(model.hyper.bn_eps);
    std::uint32_t count = 0;
    detail::for_each_tensor(model, [&](const Matrix&) { ++count; });
    w.put(count);
    detail::for_each_tensor(model, [&](const Matrix& t) { w.put_matrix(t); });
    const std::uint64_t sum = fnv1a(w.bytes());
    w.put(sum);
    return std::move(w.bytes());
}

/// Parses a model file and binds it to `g`, which must be the graph it was
/// trained on.
inline GcnModel load_model(std::string_view bytes, const WeightedGraph& g) {
    if (bytes.size() < 4 + sizeof(std::uint64_t) || bytes.substr(0, 4) != "GCNP") throw ParseError("not a GCNP model file");
    const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
    std::uint64_t stored = 0;
    std::memcpy(&stored, bytes.data() + body.size(), sizeof(stored));
    if (stored != fnv1a(body)) throw ParseError("model checksum mismatch");

    detail::ByteReader r(body.substr(4));
    if (const auto version = r.get<std::uint32_t>(); version != kModelFormatVersion)
        throw ParseError("unsupported model format version " + std::to_string(version));
    Hyperparameters hyper;
    const std::string id = r.get_string();
    const auto nodes = r.get<std::uint32_t>();
    hyper.width = r.get<std::uint32_t>();
    hyper.conv_layers = r.get<std::uint32_t>();
    hyper.dropout = r.get<double>();
    hyper.bn_decay = r.get<double>();
    hyper.bn_eps = r.get<double>();
    if (nodes != g.node_count()) throw InvalidInput("model node count does not match the graph");

    GcnModel m = make_model(g, hyper, 0);
    if (m.graph_id != id) throw InvalidInput("model was trained for graph " + id);
    std::uint32_t expected = 0;
    detail::for_each_tensor(m, [&](Matrix&) { ++expected; });
    if (r.get<std::uint32_t>() != expected) throw ParseError("unexpected tensor count");
    detail::for_each_tensor(m, [&](Matrix& t) { t = r.get_matrix(t.rows(), t.cols()); });
    if (r.position() + 4 != body.size()) throw ParseError("trailing bytes in model file");
    return m;
}

/// Human-readable dump, one "[name] rows cols" section per tensor.
inline std::string export_text(const GcnModel& model) {
    std::string out = "# graph " + model.graph_id + " nodes " + std::to_string(model.nodes) + " width " +
                      std::to_string(model.hyper.width) + "\n";
    auto section = [&](const std::string& name, const Matrix& t) {
        out += "[" + name + "] " + std::to_string(t.rows()) + " " + std::to_string(t.cols()) + "\n";
        for (Eigen::Index i = 0; i < t.rows(); ++i) {
            for (Eigen::Index j = 0; j < t.cols(); ++j) {
                if (j) out += ' ';
                out += format_double(t(i, j));
            }
            out += '\n';
        }
    };
    for (std::size_t l = 0; l < model.hyper.conv_layers; ++l) {
        const std::string s = std::to_string(l);
        section("theta" + s, model.params.theta[l]);
        section("bn_gamma" + s, model.params.gamma[l]);
        section("bn_beta" + s, model.params.beta[l]);
        section("bn_running_mean" + s, model.running_mean[l]);
        section("bn_running_var" + s, model.running_var[l]);
    }
    section("fc_weight", model.params.fc_weight);
    section("fc_bias", model.params.fc_bias);
    return out;
}

}  // namespace pathbnb::gcn
