#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dinw/autograd.hpp"
#include "dinw/model.hpp"
#include "dinw/patches.hpp"

namespace dinw {

struct TrainConfig {
    double learning_rate = 0.001;
    double lambda_tv = 2e-8;
    int epochs = 200;
    int batch_size = 64;
    std::uint64_t seed = 1;
    int checkpoint_every = 0;  // epochs between checkpoints; 0 disables
    std::string checkpoint_path;

    void validate() const;
};

struct LossReport {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    std::vector<double> seconds;
};

struct EpochStats {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double seconds = 0.0;
};
using EpochCallback = std::function<void(const EpochStats&)>;

// Batch tensors assembled from patch triplets: input (n,1,64,64) and the two
// (n,1,32,64) targets.
struct PatchBatch {
    Tensor input;
    Tensor target_even_t;
    Tensor target_odd_t1;
};
PatchBatch make_batch(const std::vector<PatchTriplet>& set, const std::size_t* indices,
                      std::size_t count);

// The training objective on one batch: mean over batch items of the two
// squared-L2 data terms plus lambda_tv times the total variation of the two
// woven full patches. Known rows enter the weave as constants, so the data
// rows receive gradient only through the TV term's coupling to neighboring
// predicted rows.
autograd::Value loss_value(const autograd::Value& pred_even_t, const autograd::Value& pred_odd_t1,
                           const PatchBatch& batch, double lambda_tv);

// Same number without a tape (validation).
double loss_eval(const Tensor& pred_even_t, const Tensor& pred_odd_t1, const PatchBatch& batch,
                 double lambda_tv);

// Bias-corrected ADAM (beta1 0.9, beta2 0.999, eps 1e-8).
struct AdamState {
    Tensor m;
    Tensor v;
};
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, std::int64_t step, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainResult {
    DeinterlaceNet net;
    LossReport report;
    TrainMeta meta;
};

// Minimizes the objective over the training set; epochs reshuffle with a
// seed derived from (config.seed, epoch), so runs with equal seeds match bit
// for bit and checkpoint resume continues the exact same stream.
TrainResult train(const std::vector<PatchTriplet>& train_set,
                  const std::vector<PatchTriplet>& val_set, const TrainConfig& config,
                  const NetConfig& net_config = {}, const EpochCallback& on_epoch = {});

TrainResult resume_training(const std::string& checkpoint_path,
                            const std::vector<PatchTriplet>& train_set,
                            const std::vector<PatchTriplet>& val_set, const TrainConfig& config,
                            const EpochCallback& on_epoch = {});

// Checkpoint = weights file + "ADAM" optimizer-state extension records.
struct Checkpoint {
    DeinterlaceNet net;
    TrainMeta meta;
    std::vector<AdamState> opt;  // kernel,bias per layer, serialization order
    std::uint64_t step = 0;
    std::uint32_t next_epoch = 0;
    std::uint64_t seed = 0;
};
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dinw
