#include "dinw/train.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "dinw/ops.hpp"

namespace dinw {

namespace {

using autograd::Value;

void fill_plane(float* dst, const std::vector<float>& src) {
    std::memcpy(dst, src.data(), src.size() * sizeof(float));
}

// Values for every trainable tensor, kernel then bias per layer.
std::vector<Value> param_leaves(const DeinterlaceNet& net) {
    std::vector<Value> out;
    out.reserve(14);
    for (const auto& layer : net.layers()) {
        out.push_back(autograd::leaf(layer.kernel, true));
        out.push_back(autograd::leaf(layer.bias, true));
    }
    return out;
}

Value apply_layer_value(const Value& x, const ConvLayer& layer, const Value& kernel,
                        const Value& bias) {
    Value y = autograd::conv2d(x, kernel, bias, layer.spec);
    if (layer.activation == Activation::Relu) y = autograd::relu(y);
    return y;
}

std::pair<Value, Value> forward_values(const DeinterlaceNet& net, const std::vector<Value>& params,
                                       const Value& input) {
    const auto& l = net.layers();
    Value t = apply_layer_value(input, l[0], params[0], params[1]);
    t = apply_layer_value(t, l[1], params[2], params[3]);
    t = apply_layer_value(t, l[2], params[4], params[5]);
    Value a = apply_layer_value(t, l[3], params[6], params[7]);
    a = apply_layer_value(a, l[4], params[8], params[9]);
    Value b = apply_layer_value(t, l[5], params[10], params[11]);
    b = apply_layer_value(b, l[6], params[12], params[13]);
    return {a, b};
}

double run_validation(const DeinterlaceNet& net, const std::vector<PatchTriplet>& val_set,
                      int batch_size, double lambda_tv) {
    std::vector<std::size_t> idx(val_set.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    double weighted = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t count =
            std::min<std::size_t>(static_cast<std::size_t>(batch_size), idx.size() - start);
        const PatchBatch batch = make_batch(val_set, idx.data() + start, count);
        const auto halves = net.forward(batch.input);
        weighted +=
            loss_eval(halves.even_t, halves.odd_t1, batch, lambda_tv) * static_cast<double>(count);
    }
    return weighted / static_cast<double>(val_set.size());
}

TrainResult run_training(DeinterlaceNet net, std::vector<AdamState> states, std::uint64_t step,
                         int first_epoch, std::uint64_t shuffle_seed,
                         const std::vector<PatchTriplet>& train_set,
                         const std::vector<PatchTriplet>& val_set, const TrainConfig& cfg,
                         const EpochCallback& on_epoch) {
    LossReport report;
    double last_train_loss = 0.0;

    for (int epoch = first_epoch; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        std::vector<std::size_t> order(train_set.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        deterministic_shuffle(order, mix_seed(shuffle_seed, static_cast<std::uint64_t>(epoch)));

        double weighted = 0.0;
        std::size_t batch_id = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size), ++batch_id) {
            const std::size_t count = std::min<std::size_t>(
                static_cast<std::size_t>(cfg.batch_size), order.size() - start);
            try {
                const PatchBatch batch = make_batch(train_set, order.data() + start, count);
                std::vector<Value> params = param_leaves(net);
                auto [pred_even, pred_odd] = forward_values(net, params, autograd::leaf(batch.input));
                Value loss = loss_value(pred_even, pred_odd, batch, cfg.lambda_tv);
                if (!std::isfinite(loss.scalar())) {
                    throw NonFiniteError("loss is not finite");
                }
                autograd::backward(loss);

                ++step;
                std::size_t p = 0;
                for (auto& layer : net.layers()) {
                    adam_step(layer.kernel, params[p].grad(), states[p],
                              static_cast<std::int64_t>(step), cfg.learning_rate);
                    ++p;
                    adam_step(layer.bias, params[p].grad(), states[p],
                              static_cast<std::int64_t>(step), cfg.learning_rate);
                    ++p;
                }
                weighted += loss.scalar() * static_cast<double>(count);
            } catch (const NonFiniteError& e) {
                throw NonFiniteError("training aborted at epoch " + std::to_string(epoch + 1) +
                                     ", batch " + std::to_string(batch_id) + ": " + e.what());
            }
        }

        last_train_loss = weighted / static_cast<double>(train_set.size());
        const double val = run_validation(net, val_set, cfg.batch_size, cfg.lambda_tv);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        report.train_loss.push_back(last_train_loss);
        report.val_loss.push_back(val);
        report.seconds.push_back(secs);
        if (on_epoch) {
            on_epoch(EpochStats{epoch + 1, last_train_loss, val, secs});
        }

        if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() &&
            (epoch + 1) % cfg.checkpoint_every == 0 && epoch + 1 < cfg.epochs) {
            Checkpoint ck;
            ck.net = net;
            ck.meta = TrainMeta{static_cast<std::uint32_t>(epoch + 1),
                                static_cast<float>(last_train_loss)};
            ck.opt = states;
            ck.step = step;
            ck.next_epoch = static_cast<std::uint32_t>(epoch + 1);
            ck.seed = shuffle_seed;
            save_checkpoint(ck, cfg.checkpoint_path);
        }
    }

    TrainResult result{std::move(net), std::move(report),
                       TrainMeta{static_cast<std::uint32_t>(cfg.epochs),
                                 static_cast<float>(last_train_loss)}};
    return result;
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0 || lambda_tv < 0.0 || epochs <= 0 || batch_size <= 0) {
        throw Error("train config: learning_rate, epochs and batch_size must be positive, "
                    "lambda_tv non-negative");
    }
}

PatchBatch make_batch(const std::vector<PatchTriplet>& set, const std::size_t* indices,
                      std::size_t count) {
    if (count == 0) throw Error("make_batch: empty batch");
    const auto n = static_cast<std::int64_t>(count);
    PatchBatch b{Tensor({n, 1, PatchTriplet::kSize, PatchTriplet::kSize}),
                 Tensor({n, 1, PatchTriplet::kHalf, PatchTriplet::kSize}),
                 Tensor({n, 1, PatchTriplet::kHalf, PatchTriplet::kSize})};
    for (std::size_t i = 0; i < count; ++i) {
        const PatchTriplet& t = set[indices[i]];
        const auto ni = static_cast<std::int64_t>(i);
        fill_plane(b.input.plane(ni, 0), t.input);
        fill_plane(b.target_even_t.plane(ni, 0), t.target_even_t);
        fill_plane(b.target_odd_t1.plane(ni, 0), t.target_odd_t1);
    }
    return b;
}

autograd::Value loss_value(const Value& pred_even_t, const Value& pred_odd_t1,
                           const PatchBatch& batch, double lambda_tv) {
    require_same_shape(pred_even_t.tensor(), batch.target_even_t, "loss");
    require_same_shape(pred_odd_t1.tensor(), batch.target_odd_t1, "loss");

    const Value data_a = autograd::sum_squares(
        autograd::sub(pred_even_t, autograd::leaf(batch.target_even_t)));
    const Value data_b = autograd::sum_squares(
        autograd::sub(pred_odd_t1, autograd::leaf(batch.target_odd_t1)));

    // Woven full patches: frame t keeps the input's odd field (rows 0,2,...),
    // frame t+1 its even field.
    const Value known_t = autograd::leaf(ops::take_rows(batch.input, 0));
    const Value known_t1 = autograd::leaf(ops::take_rows(batch.input, 1));
    const Value woven_t = autograd::weave_rows(known_t, pred_even_t);
    const Value woven_t1 = autograd::weave_rows(pred_odd_t1, known_t1);
    const Value tv =
        autograd::add(autograd::total_variation(woven_t), autograd::total_variation(woven_t1));

    const double inv_n = 1.0 / static_cast<double>(batch.input.batch());
    return autograd::scale(
        autograd::add(autograd::add(data_a, data_b), autograd::scale(tv, lambda_tv)), inv_n);
}

double loss_eval(const Tensor& pred_even_t, const Tensor& pred_odd_t1, const PatchBatch& batch,
                 double lambda_tv) {
    require_same_shape(pred_even_t, batch.target_even_t, "loss");
    require_same_shape(pred_odd_t1, batch.target_odd_t1, "loss");
    const double data_a = ops::sum_squares(ops::sub(pred_even_t, batch.target_even_t));
    const double data_b = ops::sum_squares(ops::sub(pred_odd_t1, batch.target_odd_t1));
    const Tensor woven_t = ops::weave_rows(ops::take_rows(batch.input, 0), pred_even_t);
    const Tensor woven_t1 = ops::weave_rows(pred_odd_t1, ops::take_rows(batch.input, 1));
    const double tv = ops::total_variation(woven_t) + ops::total_variation(woven_t1);
    return (data_a + data_b + lambda_tv * tv) / static_cast<double>(batch.input.batch());
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, std::int64_t step, double lr,
               double beta1, double beta2, double eps) {
    require_same_shape(param, grad, "adam_step");
    if (state.m.shape() != param.shape()) {
        state.m = Tensor(param.shape());
        state.v = Tensor(param.shape());
    }
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    float* p = param.data();
    float* m = state.m.data();
    float* v = state.v.data();
    const float* g = grad.data();
    for (std::int64_t i = 0; i < param.size(); ++i) {
        const double gi = g[i];
        const double mi = beta1 * m[i] + (1.0 - beta1) * gi;
        const double vi = beta2 * v[i] + (1.0 - beta2) * gi * gi;
        m[i] = static_cast<float>(mi);
        v[i] = static_cast<float>(vi);
        const double m_hat = mi / bc1;
        const double v_hat = vi / bc2;
        p[i] = static_cast<float>(p[i] - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
    require_finite(param, "adam_step");
}

TrainResult train(const std::vector<PatchTriplet>& train_set,
                  const std::vector<PatchTriplet>& val_set, const TrainConfig& config,
                  const NetConfig& net_config, const EpochCallback& on_epoch) {
    config.validate();
    if (train_set.empty() || val_set.empty()) {
        throw Error("train: training and validation sets must be nonempty");
    }
    DeinterlaceNet net = DeinterlaceNet::create(net_config, config.seed);
    std::vector<AdamState> states(14);
    return run_training(std::move(net), std::move(states), 0, 0, config.seed, train_set, val_set,
                        config, on_epoch);
}

TrainResult resume_training(const std::string& checkpoint_path,
                            const std::vector<PatchTriplet>& train_set,
                            const std::vector<PatchTriplet>& val_set, const TrainConfig& config,
                            const EpochCallback& on_epoch) {
    config.validate();
    if (train_set.empty() || val_set.empty()) {
        throw Error("train: training and validation sets must be nonempty");
    }
    Checkpoint ck = load_checkpoint(checkpoint_path);
    // The stored seed drives the remaining epoch shuffles so the resumed run
    // matches the uninterrupted one exactly.
    return run_training(std::move(ck.net), std::move(ck.opt), ck.step,
                        static_cast<int>(ck.next_epoch), ck.seed, train_set, val_set, config,
                        on_epoch);
}

}  // namespace dinw
