#include "qtmrl/neural_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qtmrl/csv.hpp"
#include "qtmrl/hash.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qtmrl {

namespace {

// Threaded matvec: each output row is one serial dot product, so results are
// bit-identical for any thread count.
void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& out) {
    const std::size_t rows = layer.weights.rows;
    const std::size_t cols = layer.weights.cols;
    if (x.size() != cols) {
        throw Error("dim-mismatch", "layer expects " + std::to_string(cols) + " inputs, got " +
                                        std::to_string(x.size()));
    }
    out.resize(rows);
    const double* w = layer.weights.data.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
    for (long r = 0; r < static_cast<long>(rows); ++r) {
        const double* row = w + static_cast<std::size_t>(r) * cols;
        double acc = layer.bias[r];
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weights.data.size() + layer.bias.size();
    }
    return n;
}

std::vector<std::size_t> MlpParams::layer_dims() const {
    std::vector<std::size_t> dims;
    dims.push_back(layers.front().weights.cols);
    for (const auto& layer : layers) dims.push_back(layer.weights.rows);
    return dims;
}

MlpParams make_mlp(const std::vector<std::size_t>& dims, Rng& rng) {
    if (dims.size() < 2) throw Error("bad-config", "network needs at least input and output dims");
    MlpParams params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.weights = Matrix(dims[l + 1], dims[l]);
        layer.bias.assign(dims[l + 1], 0.0);
        const double scale = std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (double& w : layer.weights.data) w = rng.normal() * scale;
        params.layers.push_back(std::move(layer));
    }
    return params;
}

std::vector<double> forward(const MlpParams& params, std::span<const double> input) {
    std::vector<double> cur(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        affine(params.layers[l], cur, next);
        if (l + 1 < params.layers.size()) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        }
        cur.swap(next);
    }
    return cur;
}

ForwardCache forward_cached(const MlpParams& params, std::span<const double> input) {
    ForwardCache cache;
    cache.act.emplace_back(input.begin(), input.end());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        std::vector<double> pre;
        affine(params.layers[l], cache.act.back(), pre);
        std::vector<double> act = pre;
        if (l + 1 < params.layers.size()) {
            for (double& v : act) v = v > 0.0 ? v : 0.0;
        }
        cache.pre.push_back(std::move(pre));
        cache.act.push_back(std::move(act));
    }
    return cache;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
    MlpGrads g;
    for (const auto& layer : params.layers) {
        g.weights.emplace_back(layer.weights.rows, layer.weights.cols);
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void MlpGrads::accumulate(const MlpGrads& other) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].data.size(); ++i) {
            weights[l].data[i] += other.weights[l].data[i];
        }
        for (std::size_t i = 0; i < bias[l].size(); ++i) bias[l][i] += other.bias[l][i];
    }
}

void MlpGrads::scale(double factor) {
    for (auto& w : weights) {
        for (double& v : w.data) v *= factor;
    }
    for (auto& b : bias) {
        for (double& v : b) v *= factor;
    }
}

void backward(const MlpParams& params, const ForwardCache& cache,
              std::span<const double> upstream, MlpGrads& grads) {
    const std::size_t L = params.layers.size();
    if (upstream.size() != params.output_size()) {
        throw Error("dim-mismatch", "upstream gradient size does not match network output");
    }
    std::vector<double> delta(upstream.begin(), upstream.end());
    for (std::size_t l = L; l-- > 0;) {
        const auto& input = cache.act[l];  // activation feeding layer l
        Matrix& wg = grads.weights[l];
        const std::size_t rows = wg.rows, cols = wg.cols;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
        for (long r = 0; r < static_cast<long>(rows); ++r) {
            double* wrow = wg.data.data() + static_cast<std::size_t>(r) * cols;
            const double d = delta[r];
            for (std::size_t c = 0; c < cols; ++c) wrow[c] += d * input[c];
        }
        for (std::size_t r = 0; r < rows; ++r) grads.bias[l][r] += delta[r];

        if (l == 0) break;
        // delta for the layer below, gated by its ReLU.
        std::vector<double> below(cols, 0.0);
        const double* w = params.layers[l].weights.data.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (rows * cols > 16384)
#endif
        for (long c = 0; c < static_cast<long>(cols); ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                acc += w[r * cols + static_cast<std::size_t>(c)] * delta[r];
            }
            below[c] = cache.pre[l - 1][c] > 0.0 ? acc : 0.0;
        }
        delta.swap(below);
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw Error("bad-config", "softmax over empty logits");
    double max_logit = logits[0];
    for (double v : logits) {
        if (!std::isfinite(v)) throw Error("non-finite", "softmax received a non-finite logit");
        max_logit = std::max(max_logit, v);
    }
    std::vector<double> probs(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
    return probs;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

ActionSample sample_action(std::span<const double> probs, Rng& rng) {
    const std::size_t a = rng.categorical(probs);
    return {a, std::log(probs[a])};
}

AdamState AdamState::init(const MlpParams& params, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& layer : params.layers) {
        s.m_weights.emplace_back(layer.weights.rows, layer.weights.cols);
        s.v_weights.emplace_back(layer.weights.rows, layer.weights.cols);
        s.m_bias.emplace_back(layer.bias.size(), 0.0);
        s.v_bias.emplace_back(layer.bias.size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& adam, MlpParams& params, const MlpGrads& grads) {
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        for (double g : grads.weights[l].data) {
            if (!std::isfinite(g)) {
                throw Error("non-finite", "non-finite weight gradient in layer " +
                                              std::to_string(l));
            }
        }
        for (double g : grads.bias[l]) {
            if (!std::isfinite(g)) {
                throw Error("non-finite", "non-finite bias gradient in layer " +
                                              std::to_string(l));
            }
        }
    }
    adam.step += 1;
    const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.step));
    auto update = [&](double& p, double& m, double& v, double g) {
        m = adam.beta1 * m + (1.0 - adam.beta1) * g;
        v = adam.beta2 * v + (1.0 - adam.beta2) * g * g;
        const double mh = m / bc1;
        const double vh = v / bc2;
        p -= adam.learning_rate * mh / (std::sqrt(vh) + adam.epsilon);
    };
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto& w = params.layers[l].weights.data;
        auto& mw = adam.m_weights[l].data;
        auto& vw = adam.v_weights[l].data;
        for (std::size_t i = 0; i < w.size(); ++i) update(w[i], mw[i], vw[i], grads.weights[l].data[i]);
        auto& b = params.layers[l].bias;
        auto& mb = adam.m_bias[l];
        auto& vb = adam.v_bias[l];
        for (std::size_t i = 0; i < b.size(); ++i) update(b[i], mb[i], vb[i], grads.bias[l][i]);
    }
}

namespace {

nlohmann::json mlp_to_json(const MlpParams& params) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : params.layers) {
        nlohmann::json j;
        j["rows"] = layer.weights.rows;
        j["cols"] = layer.weights.cols;
        j["weights"] = layer.weights.data;  // row-major
        j["bias"] = layer.bias;
        layers.push_back(std::move(j));
    }
    return layers;
}

MlpParams mlp_from_json(const nlohmann::json& layers) {
    MlpParams params;
    for (const auto& j : layers) {
        DenseLayer layer;
        layer.weights = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
        std::vector<double> w = j.at("weights").get<std::vector<double>>();
        if (w.size() != layer.weights.rows * layer.weights.cols) {
            throw Error("checkpoint-mismatch", "weight array does not match declared dims");
        }
        layer.weights.data = std::move(w);
        layer.bias = j.at("bias").get<std::vector<double>>();
        if (layer.bias.size() != layer.weights.rows) {
            throw Error("checkpoint-mismatch", "bias array does not match declared dims");
        }
        params.layers.push_back(std::move(layer));
    }
    if (params.layers.empty()) throw Error("checkpoint-mismatch", "checkpoint has no layers");
    for (std::size_t l = 0; l + 1 < params.layers.size(); ++l) {
        if (params.layers[l].weights.rows != params.layers[l + 1].weights.cols) {
            throw Error("checkpoint-mismatch", "consecutive layer dims do not compose");
        }
    }
    return params;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    nlohmann::json j;
    j["version"] = ckpt.version;
    j["config_hash"] = ckpt.config_hash;
    j["feature_names_hash"] = ckpt.feature_names_hash;
    j["actor_dims"] = ckpt.actor.layer_dims();
    j["critic_dims"] = ckpt.critic.layer_dims();
    j["actor"] = mlp_to_json(ckpt.actor);
    j["critic"] = mlp_to_json(ckpt.critic);
    j["norm_mean"] = ckpt.norm_mean;
    j["norm_stddev"] = ckpt.norm_stddev;
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write checkpoint '" + path + "'");
    out << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing-file", "cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("checkpoint-mismatch", "malformed checkpoint '" + path + "': " + e.what());
    }
    Checkpoint ckpt;
    try {
        ckpt.version = j.at("version").get<int>();
        ckpt.config_hash = j.at("config_hash").get<std::string>();
        ckpt.feature_names_hash = j.at("feature_names_hash").get<std::string>();
        ckpt.actor = mlp_from_json(j.at("actor"));
        ckpt.critic = mlp_from_json(j.at("critic"));
        ckpt.norm_mean = j.at("norm_mean").get<std::vector<double>>();
        ckpt.norm_stddev = j.at("norm_stddev").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error("checkpoint-mismatch", "checkpoint '" + path + "' missing fields: " + e.what());
    }
    const auto actor_dims = j.at("actor_dims").get<std::vector<std::size_t>>();
    const auto critic_dims = j.at("critic_dims").get<std::vector<std::size_t>>();
    if (actor_dims != ckpt.actor.layer_dims() || critic_dims != ckpt.critic.layer_dims()) {
        throw Error("checkpoint-mismatch", "declared dims disagree with stored weights");
    }
    return ckpt;
}

}  // namespace qtmrl
