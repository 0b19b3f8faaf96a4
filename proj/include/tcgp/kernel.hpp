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

#ifndef TCGP_KERNEL_HPP_
#define TCGP_KERNEL_HPP_

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace tcgp {

// Base-arm context; every coordinate is expected in [0, 1].
using Context = Eigen::VectorXd;

namespace gp {

enum class KernelFamily { kRbf, kMatern, kLinear, kExpNorm };

std::string ToString(KernelFamily family);
KernelFamily KernelFamilyFromString(const std::string& name);

struct KernelSpec {
  KernelFamily family = KernelFamily::kRbf;
  double lengthscale = 1.0;
  double variance = 1.0;
  double matern_nu = 2.5;  // 1.5 or 2.5, Matern only

  // Appends human-readable violations; empty means valid.
  void Validate(const std::string& prefix, std::vector<std::string>* out) const;

  // Throws InputError on dimension mismatch.
  double operator()(const Context& x, const Context& y) const;

  // Correlation shape k(x, y) / variance.
  double Shape(double distance, double inner) const;

  bool SameShape(const KernelSpec& other) const;
};

// Two-output matrix kernel. With cross_correlation = rho != 0 the outputs are
// coupled through a coregionalization matrix [[v1, rho s], [rho s, v2]] with
// s = sqrt(v1 v2) over the shared correlation shape; both outputs must then
// share family, lengthscale and nu.
struct TwoOutputKernelSpec {
  KernelSpec output[2];
  double cross_correlation = 0.0;

  void Validate(std::vector<std::string>* out) const;
  void ValidateOrThrow() const;

  bool Independent() const { return cross_correlation == 0.0; }

  // Entry (i, j) of the 2x2 matrix kernel.
  double operator()(const Context& x, const Context& y, int i, int j) const;
  Eigen::Matrix2d Eval(const Context& x, const Context& y) const;
};

}  // namespace gp
}  // namespace tcgp

#endif  // TCGP_KERNEL_HPP_
