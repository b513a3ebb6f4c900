// Copyright 2026 The HaloScope Authors.
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

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "haloscope/evaluation.hpp"
#include "haloscope/log.hpp"
#include "oracles.hpp"

namespace haloscope {
namespace {

using Tokens = std::vector<std::string>;

class CaptureWarnings {
 public:
  CaptureWarnings()
      : previous_(set_warning_handler([this](std::string_view m) { messages.emplace_back(m); })) {}
  ~CaptureWarnings() { set_warning_handler(previous_); }
  std::vector<std::string> messages;

 private:
  WarningHandler previous_;
};

TEST(Tokenize, LowercasePunctuationWhitespace) {
  EXPECT_EQ(tokenize("The Cat, sat."), (Tokens{"the", "cat", "sat"}));
  EXPECT_EQ(tokenize("  a\tb\nc  "), (Tokens{"a", "b", "c"}));
  EXPECT_EQ(tokenize("don't stop-now"), (Tokens{"dont", "stopnow"}));
  EXPECT_EQ(tokenize("... !!"), Tokens{});
  EXPECT_EQ(tokenize(""), Tokens{});
  // U+00A0 no-break space and U+3000 ideographic space split tokens.
  EXPECT_EQ(tokenize("x y　z"), (Tokens{"x", "y", "z"}));
  EXPECT_EQ(tokenize("Café"), Tokens{"café"});
}

TEST(RougeL, HandValues) {
  EXPECT_EQ(rouge_l("the cat sat", "the cat sat"), 1.0);
  EXPECT_EQ(rouge_l("red blue", "green yellow"), 0.0);
  // LCS 2, P = 2/3, R = 1, F1 = 0.8.
  EXPECT_NEAR(rouge_l("a b c", "a c"), 0.8, 1e-15);
  EXPECT_EQ(rouge_l("A, B!", "a b"), 1.0);
}

TEST(RougeL, EmptySideWarnsAndReturnsZero) {
  CaptureWarnings w;
  EXPECT_EQ(rouge_l("", "a b"), 0.0);
  EXPECT_EQ(rouge_l("a b", "?!"), 0.0);
  EXPECT_EQ(w.messages.size(), 2u);
}

TEST(RougeL, MatchesDynamicProgramOracle) {
  std::mt19937_64 rng(31);
  const Tokens vocab = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 300; ++trial) {
    Tokens x(1 + rng() % 12), y(1 + rng() % 12);
    for (auto& t : x) t = vocab[rng() % vocab.size()];
    for (auto& t : y) t = vocab[rng() % vocab.size()];
    const double lcs = static_cast<double>(testing::reference_lcs(x, y));
    const double p = lcs / x.size(), r = lcs / y.size();
    const double expected = lcs == 0 ? 0.0 : 2 * p * r / (p + r);
    EXPECT_NEAR(rouge_l(x, y), expected, 1e-12);
    EXPECT_NEAR(rouge_l(x, y), rouge_l(y, x), 1e-12);
  }
}

}  // namespace
}  // namespace haloscope
