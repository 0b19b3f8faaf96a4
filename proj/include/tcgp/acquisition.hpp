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

#ifndef TCGP_ACQUISITION_HPP_
#define TCGP_ACQUISITION_HPP_

#include <string>
#include <vector>

namespace tcgp::acq {

// Trade-off weight zeta and confidence delta, both strictly inside (0, 1),
// plus the uniform bound M on per-round arm count.
class IndexParams {
 public:
  IndexParams(double zeta, double delta, int max_arms);

  static void Validate(double zeta, double delta, int max_arms,
                       std::vector<std::string>* out);

  double zeta() const { return zeta_; }
  double delta() const { return delta_; }
  int max_arms() const { return max_arms_; }

 private:
  double zeta_;
  double delta_;
  int max_arms_;
};

// 2 ln(M pi^2 t^2 / (3 delta)), t >= 1.
double BetaSchedule(const IndexParams& params, int t);

// mu1 + sqrt(beta) sigma1 / (1 - zeta).
double RewardIndex(const IndexParams& params, double mu1, double sigma1,
                   double beta);

// mu2 + sqrt(beta) sigma2 / zeta.
double SatisfyingIndex(const IndexParams& params, double mu2, double sigma2,
                       double beta);

}  // namespace tcgp::acq

#endif  // TCGP_ACQUISITION_HPP_
