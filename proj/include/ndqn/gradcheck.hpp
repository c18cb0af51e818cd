// Copyright 2026 The ndqn Authors.
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

// Finite-difference check of the hand-written reverse pass.

#ifndef NDQN_GRADCHECK_HPP_
#define NDQN_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace ndqn {

struct GradcheckOptions {
  int instances = 100;
  double eps = 1e-4;
  double tolerance = 1e-4;
  // Instances with any |pre-activation| below this are redrawn so that the
  // central difference never straddles a ReLU kink.
  double kink_margin = 1e-2;
  std::uint64_t seed = 20260501;
  // Test hook: perturbs the analytic gradient of this component.
  std::string corrupt;
};

struct GradcheckRow {
  std::string component;
  int instances = 0;
  double max_rel_error = 0.0;
  std::string worst_tensor;  // e.g. "layer 1 (noisy) sigma_w"
  bool passed = false;
};

// Components: dense, noisy, residual_block, q_network, q_network_dense.
std::vector<std::string> gradcheck_components();

std::vector<GradcheckRow> run_gradcheck(const GradcheckOptions& opts = {});

}  // namespace ndqn

#endif  // NDQN_GRADCHECK_HPP_
