// Copyright 2026 The RQM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rqm/exact_distribution.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "rqm/errors.h"

namespace rqm {
namespace {

void CheckInput(double x, const RqmParams& params) {
  if (!(std::abs(x) <= params.c())) {
    throw ValidationError("RQM distribution requires |x| <= c");
  }
}

// powers[k] = (1 - q)^k for k in [0, n], built by repeated multiplication.
std::vector<double> ComplementPowers(double q, int n) {
  std::vector<double> powers(static_cast<std::size_t>(n) + 1);
  powers[0] = 1.0;
  for (int k = 1; k <= n; ++k) {
    powers[static_cast<std::size_t>(k)] =
        powers[static_cast<std::size_t>(k) - 1] * (1.0 - q);
  }
  return powers;
}

std::vector<double> ClosedForm(double x, const RqmParams& params,
                               bool lower_endpoint_fault) {
  CheckInput(x, params);
  const QuantizationGrid grid(params);
  const int m = params.levels();
  const double q = params.q();
  const int j = LocateBin(x, grid);
  const std::vector<double> r = ComplementPowers(q, m);
  auto pow_r = [&r](int k) { return r[static_cast<std::size_t>(k)]; };
  auto B = [&grid](int k) { return grid.level(k); };

  std::vector<double> probs(static_cast<std::size_t>(m), 0.0);

  // Output at or below x: the upper bracket k ranges over j+1..m-1.
  for (int i = 0; i <= j; ++i) {
    double inner = pow_r(m - j - 2) * (B(m - 1) - x) / (B(m - 1) - B(i));
    for (int k = j + 1; k <= m - 2; ++k) {
      inner += q * pow_r(k - j - 1) * (B(k) - x) / (B(k) - B(i));
    }
    double pre = pow_r(j - i);
    if (i > 0) pre *= q;
    probs[static_cast<std::size_t>(i)] = pre * inner;
  }

  // Output above x: the lower bracket k ranges over 0..j.
  for (int i = j + 1; i <= m - 1; ++i) {
    double inner = pow_r(j) * (x - B(0)) / (B(i) - B(0));
    for (int k = 1; k <= j; ++k) {
      inner += q * pow_r(j - k) * (x - B(k)) / (B(i) - B(k));
    }
    double post = pow_r(i - j - 1);
    if (i < m - 1) post *= q;
    probs[static_cast<std::size_t>(i)] = post * inner;
  }

  if (lower_endpoint_fault) probs[0] = -probs[0];
  return probs;
}

}  // namespace

Pmf RqmPmf(double x, const RqmParams& params) {
  return Pmf(ClosedForm(x, params, /*lower_endpoint_fault=*/false));
}

Pmf RqmPmfBruteForce(double x, const RqmParams& params) {
  CheckInput(x, params);
  const int m = params.levels();
  if (m > kMaxBruteForceLevels) {
    throw ValidationError("RqmPmfBruteForce: m exceeds enumeration capacity");
  }
  const QuantizationGrid grid(params);
  const double q = params.q();
  const int interior = m - 2;
  const std::vector<double> keep = [&] {
    std::vector<double> v(static_cast<std::size_t>(interior) + 1, 1.0);
    for (int k = 1; k <= interior; ++k) {
      v[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k) - 1] * q;
    }
    return v;
  }();
  const std::vector<double> drop = ComplementPowers(q, interior);

  // Neumaier accumulation per bin; up to 2^18 terms land in one bin.
  std::vector<double> probs(static_cast<std::size_t>(m), 0.0);
  std::vector<double> carry(static_cast<std::size_t>(m), 0.0);
  auto add = [&](int bin, double v) {
    double& s = probs[static_cast<std::size_t>(bin)];
    const double t = s + v;
    carry[static_cast<std::size_t>(bin)] +=
        std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  };
  std::vector<int> kept;
  kept.reserve(static_cast<std::size_t>(m));
  const std::uint32_t subsets = 1u << interior;
  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    kept.clear();
    kept.push_back(0);
    for (int b = 0; b < interior; ++b) {
      if (mask & (1u << b)) kept.push_back(b + 1);
    }
    kept.push_back(m - 1);
    const int size = static_cast<int>(kept.size()) - 2;
    const double weight = keep[static_cast<std::size_t>(size)] *
                          drop[static_cast<std::size_t>(interior - size)];

    // Scan for the kept pair with level(lo) <= x < level(hi).
    std::size_t pos = 0;
    while (pos + 1 < kept.size() - 1 && grid.level(kept[pos + 1]) <= x) ++pos;
    const int lo = kept[pos];
    const int hi = kept[pos + 1];
    const double up = (x - grid.level(lo)) / (grid.level(hi) - grid.level(lo));
    add(lo, weight * (1.0 - up));
    add(hi, weight * up);
  }
  for (int i = 0; i < m; ++i) {
    probs[static_cast<std::size_t>(i)] += carry[static_cast<std::size_t>(i)];
  }
  return Pmf(std::move(probs));
}

double PmfMean(const Pmf& p, const QuantizationGrid& grid) {
  if (p.size() != grid.size()) {
    throw ValidationError("PmfMean: PMF support does not match the grid");
  }
  std::vector<double> terms(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) {
    terms[static_cast<std::size_t>(i)] = p[i] * grid.level(i);
  }
  return CompensatedSum(terms);
}

namespace detail {

Pmf RqmPmfWithLowerEndpointFault(double x, const RqmParams& params) {
  return Pmf(ClosedForm(x, params, /*lower_endpoint_fault=*/true));
}

}  // namespace detail
}  // namespace rqm
