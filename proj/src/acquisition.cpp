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

#include "tcgp/acquisition.hpp"

#include <cmath>
#include <numbers>

#include "tcgp/errors.hpp"

namespace tcgp::acq {

IndexParams::IndexParams(double zeta, double delta, int max_arms)
    : zeta_(zeta), delta_(delta), max_arms_(max_arms) {
  std::vector<std::string> v;
  Validate(zeta, delta, max_arms, &v);
  if (!v.empty()) throw ValidationError(std::move(v));
}

void IndexParams::Validate(double zeta, double delta, int max_arms,
                           std::vector<std::string>* out) {
  if (!(zeta > 0.0 && zeta < 1.0))
    out->push_back("zeta must lie in the open interval (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    out->push_back("delta must lie in the open interval (0,1)");
  if (max_arms < 1) out->push_back("M (arm bound) must be >= 1");
}

double BetaSchedule(const IndexParams& p, int t) {
  if (t < 1) throw InputError("beta schedule requires t >= 1");
  const double tt = static_cast<double>(t);
  return 2.0 * std::log(p.max_arms() * std::numbers::pi * std::numbers::pi *
                        tt * tt / (3.0 * p.delta()));
}

double RewardIndex(const IndexParams& p, double mu1, double sigma1,
                   double beta) {
  return mu1 + std::sqrt(beta) * sigma1 / (1.0 - p.zeta());
}

double SatisfyingIndex(const IndexParams& p, double mu2, double sigma2,
                       double beta) {
  return mu2 + std::sqrt(beta) * sigma2 / p.zeta();
}

}  // namespace tcgp::acq
