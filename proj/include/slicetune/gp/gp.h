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

#ifndef SLICETUNE_GP_GP_H_
#define SLICETUNE_GP_GP_H_

#include <filesystem>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace slicetune {

struct GpHyper {
  double lengthscale = 0.3;
  double signal_var = 1.0;   // normalized-target units
  double noise_var = 1e-3;   // normalized-target units
  // Lower bound on the target scale used for normalization. With zero (the
  // default) a constant target set falls back to unit scale.
  double target_scale_floor = 0.0;
};

// Isotropic Matern nu=5/2 kernel.
double Matern52(double r, double lengthscale, double signal_var);

// Exact GP regression with fixed hyperparameters. Targets are standardized
// before fitting; predictions are returned in the original units.
class GpModel {
 public:
  struct Prediction {
    double mean = 0;
    double std = 0;
  };

  explicit GpModel(GpHyper hyper = {}) : hyper_(hyper) {}

  // Throws std::invalid_argument on empty/mismatched data, RangeError when an
  // input leaves [0,1]^d, and NumericalError when K + noise stays
  // indefinite after the largest jitter.
  void Fit(std::vector<std::vector<double>> x, std::vector<double> y);

  // Prior (zero mean, signal std) before any Fit.
  Prediction Predict(const std::vector<double>& x) const;
  // Columns of `x` are test points.
  std::vector<Prediction> PredictBatch(const Eigen::MatrixXd& x) const;

  const GpHyper& hyper() const { return hyper_; }
  std::size_t size() const { return y_.size(); }
  int dim() const { return dim_; }
  const std::vector<std::vector<double>>& inputs() const { return x_; }
  const std::vector<double>& targets() const { return y_; }
  double jitter() const { return jitter_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  // Lower Cholesky factor of K + (noise + jitter) I.
  Eigen::MatrixXd CholeskyFactor() const;
  Eigen::MatrixXd KernelMatrix() const;

  void Save(const std::filesystem::path& path) const;
  static GpModel Load(const std::filesystem::path& path);

 private:
  double ScaleFor(double std) const;

  GpHyper hyper_;
  int dim_ = 0;
  std::vector<std::vector<double>> x_;
  std::vector<double> y_;
  Eigen::MatrixXd xm_;  // inputs as columns
  double y_mean_ = 0;
  double y_scale_ = 1;
  double jitter_ = 0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

}  // namespace slicetune

#endif  // SLICETUNE_GP_GP_H_
