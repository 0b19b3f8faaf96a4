// Copyright 2026 The TCGP Authors.
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

#ifndef TCGP_POSTERIOR_HPP_
#define TCGP_POSTERIOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tcgp/kernel.hpp"

namespace tcgp::gp {

inline constexpr double kInitialJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;

// Cholesky factor of the matrix produced by `fill`, retrying with diagonal
// jitter 1e-8, 1e-7, ..., 1e-4. `fill` must overwrite the whole matrix.
// Throws NumericalError when every attempt fails. With `regularized` the
// bare matrix is tried before any jitter.
Eigen::MatrixXd JitteredCholesky(
    Eigen::Index n, const std::function<void(Eigen::MatrixXd&)>& fill,
    double* jitter_used = nullptr, bool regularized = false);

// Append-only record of (context, outcome) pairs in observation order.
class ObservationSet {
 public:
  explicit ObservationSet(double noise_sigma);

  void Append(const Context& x, const Eigen::Vector2d& outcome);
  std::size_t size() const { return contexts_.size(); }
  bool empty() const { return contexts_.empty(); }
  double noise_sigma() const { return noise_sigma_; }
  const std::vector<Context>& contexts() const { return contexts_; }
  const std::vector<Eigen::Vector2d>& outcomes() const { return outcomes_; }

 private:
  double noise_sigma_;
  std::vector<Context> contexts_;
  std::vector<Eigen::Vector2d> outcomes_;
};

struct Prediction {
  Eigen::Vector2d mean;
  Eigen::Vector2d std;
};

enum class PosteriorMode { kExact, kSparse };

// Fitted two-output GP posterior. Immutable after construction; safe to share
// across threads for reads.
//
// Repeated contexts are collapsed into (count, sum) sufficient statistics
// before fitting; for i.i.d. Gaussian noise this gives the same posterior
// as fitting every observation separately.
class PosteriorState {
 public:
  PosteriorMode mode() const { return mode_; }
  std::size_t observation_count() const { return observation_count_; }
  const std::vector<Context>& inducing_points() const { return inducing_; }
  // Set when a sparse fit was requested but every distinct context fit in
  // the inducing budget, so the exact posterior was used instead.
  bool fell_back_to_exact() const { return fell_back_; }
  const TwoOutputKernelSpec& kernel() const { return kernel_; }
  double noise_sigma() const { return noise_sigma_; }

  Prediction Predict(const Context& x) const;

  // Posterior covariance over (query, output) pairs, laid out as index
  // 2 * q + j. Size 2Q x 2Q.
  Eigen::MatrixXd JointCovariance(std::span<const Context> queries) const;

  // Q x Q posterior covariance of output j.
  Eigen::MatrixXd OutputCovariance(std::span<const Context> queries,
                                   int output) const;

  friend PosteriorState FitExactPosterior(const ObservationSet&,
                                          const TwoOutputKernelSpec&, double);
  friend PosteriorState FitSparsePosterior(const ObservationSet&,
                                           const TwoOutputKernelSpec&, int,
                                           std::uint64_t, double);

 private:
  struct Block {
    std::vector<int> outputs;
    // Exact: items are (unique context, output); sparse: (inducing, output).
    std::vector<int> item_point;
    std::vector<int> item_output;
    Eigen::MatrixXd chol;       // exact: K + noise; sparse: Kuu
    Eigen::VectorXd weights;    // whitened mean weights for either mode
    Eigen::MatrixXd chol_b;     // sparse only
  };

  const Context& ItemPoint(const Block& b, int item) const;
  Eigen::VectorXd CrossVector(const Block& b, const Context& x,
                              int output) const;
  void PosteriorTerms(const Block& b, const Context& x, int output,
                      Eigen::VectorXd* v, Eigen::VectorXd* w) const;

  PosteriorMode mode_ = PosteriorMode::kExact;
  TwoOutputKernelSpec kernel_;
  double noise_sigma_ = 1.0;
  double prior_mean_ = 0.0;
  std::size_t observation_count_ = 0;
  bool fell_back_ = false;
  std::vector<Context> unique_;
  std::vector<Context> inducing_;
  std::vector<Block> blocks_;
  int block_of_output_[2] = {0, 0};
};

// Exact conditioning of the joint Gaussian on all observations.
PosteriorState FitExactPosterior(const ObservationSet& obs,
                                 const TwoOutputKernelSpec& kernel,
                                 double prior_mean = 0.0);

// Variational inducing-point posterior with `s` inducing contexts drawn
// uniformly without replacement from the distinct observed contexts.
PosteriorState FitSparsePosterior(const ObservationSet& obs,
                                  const TwoOutputKernelSpec& kernel, int s,
                                  std::uint64_t seed, double prior_mean = 0.0);

// One draw of f at `contexts` from the zero-mean prior.
std::vector<Eigen::Vector2d> SamplePriorFunction(
    const TwoOutputKernelSpec& kernel, std::span<const Context> contexts,
    std::uint64_t seed);

}  // namespace tcgp::gp

#endif  // TCGP_POSTERIOR_HPP_
