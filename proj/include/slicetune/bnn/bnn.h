// Copyright 2026 The slicetune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLICETUNE_BNN_BNN_H_
#define SLICETUNE_BNN_BNN_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace slicetune {

enum class BnnOptimizer { kAdadelta, kAdam };

struct BnnConfig {
  std::vector<int> hidden = {128, 256, 256, 128};
  double prior_sigma = 1.0;
  double likelihood_sigma = 0.1;  // in normalized-target units
  double init_sigma = 0.01;
  // Scales KL(q || p) against the data term. 1 is the plain variational bound.
  double kl_weight = 1.0;
  BnnOptimizer optimizer = BnnOptimizer::kAdadelta;
  double learning_rate = 1.0;
  double lr_decay = 0.999;  // multiplicative, per epoch
  int batch_size = 128;
};

// One (input, target) pair.
struct Sample {
  std::vector<double> x;
  double y = 0;
};

struct TrainReport {
  // Mean per-step loss of every epoch, normalized per sample.
  std::vector<double> epoch_loss;
};

// Mean-field Gaussian variational network trained by Bayes-by-Backprop. Weights
// and biases of every layer live in one flat parameter vector; each parameter
// has a mean mu and raw scale rho with sigma = softplus(rho).
class BnnModel {
 public:
  BnnModel() = default;
  BnnModel(int input_dim, BnnConfig config, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  const BnnConfig& config() const { return config_; }
  const std::vector<int>& widths() const { return widths_; }
  Eigen::Index num_params() const { return mu_.size(); }

  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::VectorXd& rho() const { return rho_; }
  const Eigen::VectorXd& Sigma() const { return sigma_; }
  // Overwrites the variational parameters (tests, checkpoints).
  void SetParams(Eigen::VectorXd mu, Eigen::VectorXd rho);

  // Input/target normalization. Frozen once set; Train() sets them on the
  // first call only.
  bool normalized() const { return normalized_; }
  void FreezeNormalization(const std::vector<Sample>& data);
  Eigen::VectorXd NormalizeInput(const std::vector<double>& x) const;
  std::vector<double> DenormalizeInput(const Eigen::VectorXd& z) const;
  double DenormalizeTarget(double t) const { return t * y_std_ + y_mean_; }
  double NormalizeTarget(double y) const { return (y - y_mean_) / y_std_; }

  // Trains for `epochs` passes with one weight draw per mini-batch step.
  // Throws std::invalid_argument on an empty dataset and NumericalError when
  // the loss becomes non-finite.
  TrainReport Train(const std::vector<Sample>& data, int epochs, std::uint64_t seed);
  // Exactly `steps` mini-batch steps; used for incremental retraining.
  TrainReport TrainSteps(const std::vector<Sample>& data, int steps,
                         std::uint64_t seed);

  // Prediction with the mean weights only.
  double PredictMean(const std::vector<double>& x) const;
  std::vector<double> PredictMeanBatch(const std::vector<std::vector<double>>& xs) const;

  // One weight vector drawn from q(w | theta), one forward pass over the whole
  // batch, outputs denormalized.
  std::vector<double> ThompsonPredict(const std::vector<std::vector<double>>& xs,
                                      std::uint64_t draw_seed) const;
  // Same, with inputs already normalized (columns of `z`); single precision
  // forward pass for large candidate batches.
  std::vector<double> ThompsonPredictNormalized(const Eigen::MatrixXd& z,
                                                std::uint64_t draw_seed) const;

  struct Posterior {
    double mean = 0;
    double std = 0;
  };
  // Empirical mean/std over n_mc independent weight draws.
  Posterior PosteriorAt(const std::vector<double>& x, int n_mc,
                        std::uint64_t seed) const;
  std::vector<Posterior> PosteriorBatch(const std::vector<std::vector<double>>& xs,
                                        int n_mc, std::uint64_t seed) const;

  // Single-draw variational loss on a batch and its gradient w.r.t. (mu, rho),
  // for a fixed standard-normal draw `eps`. `kl_scale` multiplies
  // log q(w) - log p(w). Inputs/targets are used as given (no normalization).
  double LossAndGradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& eps, double kl_scale,
                         Eigen::VectorXd* grad_mu, Eigen::VectorXd* grad_rho) const;

  void Save(const std::filesystem::path& path) const;
  static BnnModel Load(const std::filesystem::path& path);

  bool operator==(const BnnModel& other) const;

 private:
  struct LayerView {
    Eigen::Index w_offset;
    Eigen::Index b_offset;
    int rows;
    int cols;
  };

  void BuildLayout();
  Eigen::VectorXd SampleWeights(std::uint64_t seed) const;
  template <typename Scalar>
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> Forward(
      const Eigen::VectorXd& weights,
      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& z) const;
  Eigen::MatrixXd NormalizeBatch(const std::vector<std::vector<double>>& xs) const;
  TrainReport RunSteps(const std::vector<Sample>& data, int steps, int steps_per_epoch,
                       std::uint64_t seed);

  int input_dim_ = 0;
  BnnConfig config_;
  std::vector<int> widths_;  // input, hidden..., 1
  std::vector<LayerView> layers_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd rho_;
  Eigen::VectorXd sigma_;  // softplus(rho_), kept in sync

  bool normalized_ = false;
  Eigen::VectorXd x_mean_;
  Eigen::VectorXd x_std_;
  double y_mean_ = 0;
  double y_std_ = 1;

  // Optimizer state.
  Eigen::VectorXd acc_grad_;
  Eigen::VectorXd acc_delta_;
  std::int64_t step_count_ = 0;
  double lr_ = 0;
};

}  // namespace slicetune

#endif  // SLICETUNE_BNN_BNN_H_
