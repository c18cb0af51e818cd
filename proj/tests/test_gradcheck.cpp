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


#include "doctest.h"
#include "ndqn/common.hpp"
#include "ndqn/gradcheck.hpp"

using namespace ndqn;

TEST_CASE("every component passes the finite-difference check") {
  const auto rows = run_gradcheck();
  REQUIRE(rows.size() == gradcheck_components().size());
  for (const GradcheckRow& r : rows) {
    CAPTURE(r.component);
    CAPTURE(r.worst_tensor);
    CHECK(r.instances == 100);
    CHECK(r.max_rel_error < 1e-4);
    CHECK(r.passed);
  }
}

TEST_CASE("a corrupted gradient fails and names the tensor") {
  GradcheckOptions opts;
  opts.instances = 5;
  for (const std::string& c : gradcheck_components()) {
    CAPTURE(c);
    opts.corrupt = c;
    for (const GradcheckRow& r : run_gradcheck(opts)) {
      if (r.component == c) {
        CHECK_FALSE(r.passed);
        CHECK_FALSE(r.worst_tensor.empty());
      } else {
        CHECK(r.passed);
      }
    }
  }
  opts.corrupt = "conv";
  CHECK_THROWS_AS(run_gradcheck(opts), OutOfRangeError);
}
