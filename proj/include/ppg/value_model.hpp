#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ppg/characteristics.hpp"
#include "ppg/game_core.hpp"

namespace ppg {

/// Fully connected ReLU trunk 2 -> 10 -> 25 -> 10 with three affine heads:
/// value (1), value gradient (2) and feedback pair (2). The first feedback
/// output passes through tanh; the second is an angle wrapped at inference.
class MlpModel {
public:
    static constexpr int kInput = 2;
    static constexpr int kWidth1 = 10;
    static constexpr int kWidth2 = 25;
    static constexpr int kWidth3 = 10;
    static constexpr std::array<int, 4> kArch{kInput, kWidth1, kWidth2, kWidth3};

    Eigen::Matrix<double, kWidth1, kInput> w1 = decltype(w1)::Zero();
    Eigen::Matrix<double, kWidth1, 1> b1 = decltype(b1)::Zero();
    Eigen::Matrix<double, kWidth2, kWidth1> w2 = decltype(w2)::Zero();
    Eigen::Matrix<double, kWidth2, 1> b2 = decltype(b2)::Zero();
    Eigen::Matrix<double, kWidth3, kWidth2> w3 = decltype(w3)::Zero();
    Eigen::Matrix<double, kWidth3, 1> b3 = decltype(b3)::Zero();
    Eigen::Matrix<double, 1, kWidth3> wv = decltype(wv)::Zero();
    Eigen::Matrix<double, 1, 1> bv = decltype(bv)::Zero();
    Eigen::Matrix<double, 2, kWidth3> wd = decltype(wd)::Zero();
    Eigen::Matrix<double, 2, 1> bd = decltype(bd)::Zero();
    Eigen::Matrix<double, 2, kWidth3> wu = decltype(wu)::Zero();
    Eigen::Matrix<double, 2, 1> bu = decltype(bu)::Zero();

    /// He-uniform trunk and Glorot-uniform heads; trunk biases 0.01, head biases 0.
    static MlpModel random(std::uint64_t seed);

    static constexpr std::size_t parameter_count() {
        return kWidth1 * kInput + kWidth1 + kWidth2 * kWidth1 + kWidth2 + kWidth3 * kWidth2 +
               kWidth3 + kWidth3 + 1 + 2 * kWidth3 + 2 + 2 * kWidth3 + 2;
    }

    /// Calls f(data, size) for every weight and bias block in a fixed order.
    template <typename F>
    void for_each_block(F&& f) {
        f(w1.data(), w1.size());
        f(b1.data(), b1.size());
        f(w2.data(), w2.size());
        f(b2.data(), b2.size());
        f(w3.data(), w3.size());
        f(b3.data(), b3.size());
        f(wv.data(), wv.size());
        f(bv.data(), bv.size());
        f(wd.data(), wd.size());
        f(bd.data(), bd.size());
        f(wu.data(), wu.size());
        f(bu.data(), bu.size());
    }
    template <typename F>
    void for_each_block(F&& f) const {
        const_cast<MlpModel*>(this)->for_each_block(
            [&](double* d, Eigen::Index n) { f(static_cast<const double*>(d), n); });
    }

    std::vector<double> flatten() const;
    void assign(std::span<const double> params);
    bool all_finite() const;

    friend bool operator==(const MlpModel& a, const MlpModel& b) { return a.flatten() == b.flatten(); }
};

struct ModelOutput {
    double value = 0.0;
    Costate gradient;
    double evader = 0.0;   ///< in [-1, 1]
    double pursuer = 0.0;  ///< wrapped to (-pi, pi]

    Controls controls() const { return {evader, pursuer}; }
};

ModelOutput forward(const MlpModel& m, const State& s);

/// Exact gradient of the value head with respect to the input; ReLU kinks
/// use the zero subgradient.
Costate input_gradient(const MlpModel& m, const State& s);

/// Smallest |pre-activation| over the trunk at `s`; distance-to-kink proxy.
double min_preactivation(const MlpModel& m, const State& s);

/// 10 |v|_1 + |v|_2^2.
double kappa10(std::span<const double> v);
inline double kappa10(double v) { return kappa10(std::span<const double>(&v, 1)); }

enum class LossMode { Training, Evaluation };

/// The five residual penalties of one sample: value, gradient, feedback
/// labels, input-gradient consistency, feedback-from-gradient consistency.
struct LossTerms {
    std::array<double, 5> terms{};
    double total() const { return terms[0] + terms[1] + terms[2] + terms[3] + terms[4]; }
};

/// Training mode replaces the sign in the last term by tanh(sharpness * .).
LossTerms loss_terms(const MlpModel& m, const CharacteristicPoint& sample, LossMode mode,
                     double soft_sign_sharpness = 10.0);

inline double loss(const MlpModel& m, const CharacteristicPoint& sample,
                   LossMode mode = LossMode::Evaluation, double soft_sign_sharpness = 10.0) {
    return loss_terms(m, sample, mode, soft_sign_sharpness).total();
}

/// Adds the training-mode gradient of the sample loss to `grad` (same layout
/// as the model) and returns the loss. ReLU masks are held fixed when
/// differentiating the input-gradient term.
double accumulate_loss_gradient(const MlpModel& m, const CharacteristicPoint& sample,
                                double soft_sign_sharpness, MlpModel& grad);

double mean_loss(const MlpModel& m, std::span<const CharacteristicPoint> data, LossMode mode,
                 double soft_sign_sharpness = 10.0);

struct TrainConfig {
    std::uint64_t seed = 7;
    double learning_rate = 1e-3;
    int batch_size = 256;
    int epochs = 5000;
    double soft_sign_sharpness = 10.0;
    double validation_fraction = 0.1;
    int patience = 200;  ///< epochs without validation improvement before stopping

    void validate() const;
};

struct TrainReport {
    double initial_train_loss = 0.0;
    double final_train_loss = 0.0;
    double initial_val_loss = 0.0;
    double best_val_loss = 0.0;
    int epochs_run = 0;
    int best_epoch = 0;
    std::size_t train_size = 0;
    std::size_t val_size = 0;
};

/// Mini-batch Adam on the training-mode loss. Returns the parameters with the
/// lowest validation loss (evaluation mode). Throws NonFiniteLoss on a
/// non-finite batch loss.
MlpModel train(const Dataset& data, const TrainConfig& cfg, TrainReport* report = nullptr);

/// Deterministic train/validation split used by train().
void split_dataset(const Dataset& data, const TrainConfig& cfg, Dataset& train_set,
                   Dataset& val_set);

inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
    std::uint64_t seed = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

void save_checkpoint(const MlpModel& m, const std::filesystem::path& path,
                     const CheckpointInfo& info = {});
MlpModel load_checkpoint(const std::filesystem::path& path, CheckpointInfo* info = nullptr);

}  // namespace ppg
