#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "styleaudit/extractor.hpp"
#include "styleaudit/mlp.hpp"

namespace styleaudit {

struct TrainConfig {
    double learning_rate = 5e-5;
    int max_epochs = 100;
    int patience = 10;
    int batch_size = 32;
    std::int64_t seed = 0;
    bool use_distortion_term = true;
    bool use_augmentation = true;
    std::vector<int> hidden_sizes{512, 128};

    void validate() const;  // throws InvalidConfig
};

struct LabeledExample {
    StyleRepresentation representation;
    double target = 1.0;  // +1.0 for the target artist, -1.0 otherwise
};

// Public artwork and its model-generated counterpart from the same caption
// lineage; their score difference is the calibration term of the loss.
struct DistortionPair {
    StyleRepresentation public_rep;
    StyleRepresentation generated_rep;
};

// Tracks the best validation loss for early stopping. Strict improvement
// resets the counter; ties keep the earlier epoch.
class EarlyStopTracker {
public:
    explicit EarlyStopTracker(int patience) : patience_(patience) {}

    struct Observation {
        bool improved = false;
        bool should_stop = false;
    };

    Observation observe(double validation_loss) {
        Observation obs;
        if (validation_loss < best_loss_) {
            best_loss_ = validation_loss;
            best_epoch_ = epoch_;
            since_improve_ = 0;
            obs.improved = true;
        } else {
            ++since_improve_;
        }
        obs.should_stop = since_improve_ >= patience_;
        ++epoch_;
        return obs;
    }

    double best_loss() const { return best_loss_; }
    int best_epoch() const { return best_epoch_; }

private:
    int patience_;
    int epoch_ = 0;
    int best_epoch_ = -1;
    int since_improve_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

// Per-artist regression discriminator over style representations.
class Discriminator {
public:
    Discriminator() = default;
    Discriminator(std::vector<int> layer_sizes, std::string artist_id,
                  std::string tap_plan_hash);

    // f_theta(rep) in (-1, 1). Refuses representations from a different tap
    // plan or of the wrong length.
    double score(const StyleRepresentation& rep) const;

    // Eq-style combined loss over a labeled batch and distortion pairs.
    double loss(const std::vector<LabeledExample>& batch,
                const std::vector<DistortionPair>& pairs) const;

    const std::vector<int>& layer_sizes() const { return net_.layer_sizes(); }
    const std::string& artist_id() const { return artist_id_; }
    const std::string& tap_plan_hash() const { return tap_plan_hash_; }
    Mlp<float>& net() { return net_; }
    const Mlp<float>& net() const { return net_; }

    void save(const std::filesystem::path& path) const;
    static Discriminator load(const std::filesystem::path& path);

private:
    Mlp<float> net_;
    std::string artist_id_;
    std::string tap_plan_hash_;
};

struct TrainingData {
    Matrix<float> train_pos;   // originals + augmentations of the target
    Matrix<float> train_neg;   // sampled negatives (never augmented)
    Matrix<float> val_pos;     // held-out originals
    Matrix<float> val_neg;
    Matrix<float> pair_public;
    Matrix<float> pair_generated;
};

struct TrainResult {
    Discriminator discriminator;
    double best_validation_loss = 0.0;
    int best_epoch = -1;
    int epochs_run = 0;
};

// Mini-batch Adam on the combined loss with early stopping on the
// validation regression loss. Deterministic given cfg.seed.
TrainResult train(const TrainingData& data, const TrainConfig& cfg,
                  const std::string& artist_id,
                  const std::string& tap_plan_hash);

// Helper for assembling matrices from representations.
Matrix<float> to_matrix(const std::vector<const StyleRepresentation*>& reps);

}  // namespace styleaudit
