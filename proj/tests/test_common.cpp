// Copyright 2026 The bdlearn Authors
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

#include "bdl/common.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

namespace bdl {
namespace {

TEST(Repair, ClampsNegativesAndRenormalizes) {
  Matrix raw(1, 3);
  raw << 0.5, -0.1, 0.8;
  const Matrix out = repair_simplex_rows(raw);
  const double total = 1.3 + kProbabilityFloor;
  EXPECT_NEAR(out(0, 0), 0.5 / total, 1e-9);
  EXPECT_NEAR(out(0, 1), 0.0, 1e-9);
  EXPECT_GT(out(0, 1), 0.0);
  EXPECT_NEAR(out(0, 2), 0.8 / total, 1e-9);
  EXPECT_NEAR(out.sum(), 1.0, 1e-15);
}

TEST(Repair, NonPositiveRowBecomesUniform) {
  Matrix raw(2, 4);
  raw << 0, 0, 0, 0, -1, -2, 0, -3;
  const Matrix out = repair_simplex_rows(raw);
  EXPECT_TRUE((out.array() == 0.25).all());
}

TEST(Repair, ValidRowsAreUnchanged) {
  Matrix raw(1, 2);
  raw << 0.2, 0.8;
  EXPECT_TRUE(repair_simplex_rows(raw).isApprox(raw, 1e-15));
}

TEST(Simplex, ReportsFirstOffendingRow) {
  Matrix d(3, 2);
  d << 0.5, 0.5, 0.6, 0.3, 1.0, 0.0;
  EXPECT_EQ(first_non_simplex_row(d), 1);
  d(1, 1) = 0.4;
  EXPECT_EQ(first_non_simplex_row(d), -1);
}

TEST(Format, SeventeenDigitsRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::strtod(format_g17(v).c_str(), nullptr), v);
    EXPECT_EQ(std::strtod(format_sci(v).c_str(), nullptr), v);
  }
  EXPECT_NE(format_sci(1.5).find('e'), std::string::npos);
}

TEST(Errors, NumericalCodesAreClassified) {
  EXPECT_TRUE(is_numerical(Errc::singular_pencil));
  EXPECT_TRUE(is_numerical(Errc::not_psd));
  EXPECT_TRUE(is_numerical(Errc::line_search_failure));
  EXPECT_FALSE(is_numerical(Errc::parse_error));
  EXPECT_FALSE(is_numerical(Errc::invariant_violation));
  const Error e(Errc::k_too_large, "k = 5");
  EXPECT_EQ(e.code(), Errc::k_too_large);
  EXPECT_NE(std::string(e.what()).find("KTooLarge"), std::string::npos);
}

}  // namespace
}  // namespace bdl
