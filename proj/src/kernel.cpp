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

#include "tcgp/kernel.hpp"

#include <cmath>
#include <sstream>

#include "tcgp/errors.hpp"

namespace tcgp::gp {

std::string ToString(KernelFamily family) {
  switch (family) {
    case KernelFamily::kRbf: return "rbf";
    case KernelFamily::kMatern: return "matern";
    case KernelFamily::kLinear: return "linear";
    case KernelFamily::kExpNorm: return "expnorm";
  }
  return "unknown";
}

KernelFamily KernelFamilyFromString(const std::string& name) {
  if (name == "rbf") return KernelFamily::kRbf;
  if (name == "matern") return KernelFamily::kMatern;
  if (name == "linear") return KernelFamily::kLinear;
  if (name == "expnorm") return KernelFamily::kExpNorm;
  throw InputError("unknown kernel family '" + name +
                   "' (expected rbf, matern, linear or expnorm)");
}

void KernelSpec::Validate(const std::string& prefix,
                          std::vector<std::string>* out) const {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
    out->push_back(prefix + ".lengthscale must be > 0");
  if (!(variance > 0.0) || !std::isfinite(variance))
    out->push_back(prefix + ".variance must be > 0");
  if (family == KernelFamily::kMatern && matern_nu != 1.5 && matern_nu != 2.5)
    out->push_back(prefix + ".matern_nu must be 1.5 or 2.5");
}

double KernelSpec::Shape(double r, double inner) const {
  const double l = lengthscale;
  switch (family) {
    case KernelFamily::kRbf:
      return std::exp(-r * r / (2.0 * l * l));
    case KernelFamily::kExpNorm:
      // Unsquared distance inside the exponent.
      return std::exp(-r / (2.0 * l * l));
    case KernelFamily::kMatern: {
      if (matern_nu == 1.5) {
        const double a = std::sqrt(3.0) * r / l;
        return (1.0 + a) * std::exp(-a);
      }
      const double a = std::sqrt(5.0) * r / l;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
    case KernelFamily::kLinear:
      return inner / (l * l);
  }
  return 0.0;
}

double KernelSpec::operator()(const Context& x, const Context& y) const {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << "context dimension mismatch: " << x.size() << " vs " << y.size();
    throw InputError(msg.str());
  }
  if (family == KernelFamily::kLinear) return variance * Shape(0.0, x.dot(y));
  return variance * Shape((x - y).norm(), 0.0);
}

bool KernelSpec::SameShape(const KernelSpec& o) const {
  return family == o.family && lengthscale == o.lengthscale &&
         (family != KernelFamily::kMatern || matern_nu == o.matern_nu);
}

void TwoOutputKernelSpec::Validate(std::vector<std::string>* out) const {
  output[0].Validate("kernel.output1", out);
  output[1].Validate("kernel.output2", out);
  if (!(cross_correlation >= -1.0 && cross_correlation <= 1.0))
    out->push_back("kernel.cross_correlation must lie in [-1, 1]");
  if (cross_correlation != 0.0 && !output[0].SameShape(output[1]))
    out->push_back(
        "kernel.cross_correlation != 0 requires both outputs to share "
        "family, lengthscale and matern_nu");
}

void TwoOutputKernelSpec::ValidateOrThrow() const {
  std::vector<std::string> v;
  Validate(&v);
  if (!v.empty()) throw ValidationError(std::move(v));
}

double TwoOutputKernelSpec::operator()(const Context& x, const Context& y,
                                       int i, int j) const {
  if (i == j) return output[i](x, y);
  if (cross_correlation == 0.0) return 0.0;
  const double s = std::sqrt(output[0].variance * output[1].variance);
  return cross_correlation * s * output[0](x, y) / output[0].variance;
}

Eigen::Matrix2d TwoOutputKernelSpec::Eval(const Context& x,
                                          const Context& y) const {
  Eigen::Matrix2d k;
  k(0, 0) = (*this)(x, y, 0, 0);
  k(1, 1) = (*this)(x, y, 1, 1);
  k(0, 1) = k(1, 0) = (*this)(x, y, 0, 1);
  return k;
}

}  // namespace tcgp::gp
