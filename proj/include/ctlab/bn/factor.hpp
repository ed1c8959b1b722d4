// Copyright 2026 The ctlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTLAB_BN_FACTOR_HPP_
#define CTLAB_BN_FACTOR_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

namespace ctlab::bn {

// A non-negative table over a set of discrete variables. Variables are kept
// sorted by index; values are row-major with the last variable fastest.
class Factor {
 public:
  Factor() : values_{1.0} {}

  Factor(std::vector<std::size_t> vars, std::vector<std::size_t> cards,
         std::vector<double> values)
      : vars_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {}

  const std::vector<std::size_t>& vars() const { return vars_; }
  const std::vector<std::size_t>& cards() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool contains(std::size_t var) const {
    return std::binary_search(vars_.begin(), vars_.end(), var);
  }

  double total() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
  }

  // Fixes `var` to `state` and drops it from the scope.
  Factor Reduce(std::size_t var, std::size_t state) const {
    auto pos = std::lower_bound(vars_.begin(), vars_.end(), var);
    if (pos == vars_.end() || *pos != var) return *this;
    const std::size_t k = static_cast<std::size_t>(pos - vars_.begin());
    std::size_t inner = 1;
    for (std::size_t j = k + 1; j < cards_.size(); ++j) inner *= cards_[j];
    const std::size_t card = cards_[k];
    const std::size_t outer = values_.size() / (inner * card);

    Factor out;
    out.vars_ = vars_;
    out.vars_.erase(out.vars_.begin() + static_cast<std::ptrdiff_t>(k));
    out.cards_ = cards_;
    out.cards_.erase(out.cards_.begin() + static_cast<std::ptrdiff_t>(k));
    out.values_.assign(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        out.values_[o * inner + i] = values_[(o * card + state) * inner + i];
      }
    }
    return out;
  }

  Factor SumOut(std::size_t var) const {
    auto pos = std::lower_bound(vars_.begin(), vars_.end(), var);
    if (pos == vars_.end() || *pos != var) return *this;
    const std::size_t k = static_cast<std::size_t>(pos - vars_.begin());
    std::size_t inner = 1;
    for (std::size_t j = k + 1; j < cards_.size(); ++j) inner *= cards_[j];
    const std::size_t card = cards_[k];
    const std::size_t outer = values_.size() / (inner * card);

    Factor out;
    out.vars_ = vars_;
    out.vars_.erase(out.vars_.begin() + static_cast<std::ptrdiff_t>(k));
    out.cards_ = cards_;
    out.cards_.erase(out.cards_.begin() + static_cast<std::ptrdiff_t>(k));
    out.values_.assign(outer * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t s = 0; s < card; ++s) {
        for (std::size_t i = 0; i < inner; ++i) {
          out.values_[o * inner + i] += values_[(o * card + s) * inner + i];
        }
      }
    }
    return out;
  }

  friend Factor operator*(const Factor& a, const Factor& b) {
    Factor out;
    std::set_union(a.vars_.begin(), a.vars_.end(), b.vars_.begin(),
                   b.vars_.end(), std::back_inserter(out.vars_));
    out.cards_.resize(out.vars_.size());
    std::vector<std::size_t> stride_a(out.vars_.size(), 0);
    std::vector<std::size_t> stride_b(out.vars_.size(), 0);
    for (std::size_t j = 0; j < out.vars_.size(); ++j) {
      const std::size_t v = out.vars_[j];
      auto fill = [&](const Factor& f, std::vector<std::size_t>& stride) {
        auto pos = std::lower_bound(f.vars_.begin(), f.vars_.end(), v);
        if (pos == f.vars_.end() || *pos != v) return;
        const std::size_t k = static_cast<std::size_t>(pos - f.vars_.begin());
        out.cards_[j] = f.cards_[k];
        std::size_t s = 1;
        for (std::size_t m = k + 1; m < f.cards_.size(); ++m) s *= f.cards_[m];
        stride[j] = s;
      };
      fill(a, stride_a);
      fill(b, stride_b);
    }
    std::size_t size = 1;
    for (std::size_t c : out.cards_) size *= c;
    out.values_.assign(size, 0.0);

    std::vector<std::size_t> digit(out.vars_.size(), 0);
    std::size_t ia = 0, ib = 0;
    for (std::size_t idx = 0; idx < size; ++idx) {
      out.values_[idx] = a.values_[ia] * b.values_[ib];
      // Mixed-radix increment, last variable fastest.
      for (std::size_t j = out.vars_.size(); j-- > 0;) {
        if (++digit[j] < out.cards_[j]) {
          ia += stride_a[j];
          ib += stride_b[j];
          break;
        }
        ia -= stride_a[j] * (out.cards_[j] - 1);
        ib -= stride_b[j] * (out.cards_[j] - 1);
        digit[j] = 0;
      }
    }
    return out;
  }

 private:
  std::vector<std::size_t> vars_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

}  // namespace ctlab::bn

#endif  // CTLAB_BN_FACTOR_HPP_
