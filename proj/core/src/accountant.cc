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

#include "rqm/accountant.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <string>
#include <thread>

#include "rqm/errors.h"
#include "rqm/exact_distribution.h"

namespace rqm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckSameSupport(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) {
    throw ValidationError("divergence: PMF supports differ");
  }
}

Pmf ConvolveTwo(std::span<const double> a, std::span<const double> b,
                double tolerance) {
  const std::size_t out_size = a.size() + b.size() - 1;
  std::vector<double> out(out_size);
  std::vector<double> terms;
  terms.reserve(std::min(a.size(), b.size()));
  for (std::size_t k = 0; k < out_size; ++k) {
    terms.clear();
    const std::size_t i_lo = k >= b.size() ? k - b.size() + 1 : 0;
    const std::size_t i_hi = std::min(k, a.size() - 1);
    for (std::size_t i = i_lo; i <= i_hi; ++i) terms.push_back(a[i] * b[k - i]);
    out[k] = CompensatedSum(terms);
  }
  return Pmf(std::move(out), tolerance);
}

Pmf SumLaw(const MechanismSpec& mechanism, std::span<const double> inputs) {
  std::map<double, Pmf> cache;
  std::vector<Pmf> pmfs;
  pmfs.reserve(inputs.size());
  bool full_support = true;
  for (double x : inputs) {
    auto it = cache.find(x);
    if (it == cache.end()) {
      it = cache.emplace(x, MechanismPmf(mechanism, x)).first;
      full_support = full_support && it->second.MinEntry() > 0.0;
    }
    pmfs.push_back(it->second);
  }
  Pmf sum = ConvolveSum(pmfs);
  if (full_support && sum.MinEntry() < kTinyProbability) {
    throw ConsistencyError(
        "aggregate PMF underflowed below 1e-300; linear-space convolution "
        "is not accurate at these parameters");
  }
  return sum;
}

void ValidateQuery(const DivergenceQuery& query) {
  if (!(query.alpha > 1.0)) {
    throw ValidationError("divergence order alpha must exceed 1");
  }
  if (query.x.empty()) throw ValidationError("query needs at least one device");
  if (query.x.size() != query.x_prime.size()) {
    throw ValidationError("x and x' must have the same length");
  }
  const double c = MechanismClip(query.mechanism);
  int differing = 0;
  for (std::size_t i = 0; i < query.x.size(); ++i) {
    if (!(std::abs(query.x[i]) <= c && std::abs(query.x_prime[i]) <= c)) {
      throw ValidationError("query inputs must satisfy |x_i| <= c");
    }
    if (query.x[i] != query.x_prime[i]) ++differing;
  }
  if (differing > 1) {
    throw ValidationError("x and x' must differ in exactly one device");
  }
  if (differing == 0 && !query.allow_identical) {
    throw ValidationError("x and x' must differ in exactly one device");
  }
}

}  // namespace

double MechanismClip(const MechanismSpec& mechanism) {
  return std::visit([](const auto& p) { return p.c(); }, mechanism);
}

Pmf MechanismPmf(const MechanismSpec& mechanism, double x) {
  if (const auto* rqm = std::get_if<RqmParams>(&mechanism)) {
    return RqmPmf(x, *rqm);
  }
  return PbmPmf(x, std::get<PbmParams>(mechanism));
}

double RenyiDivergence(const Pmf& p, const Pmf& q, double alpha) {
  if (alpha == kInfiniteOrder) return MaxDivergence(p, q);
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw ValidationError("RenyiDivergence: alpha must be > 1");
  }
  CheckSameSupport(p, q);
  std::vector<double> exponents;
  exponents.reserve(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] < kTinyProbability) return kInf;
    exponents.push_back(alpha * std::log(p[i]) - (alpha - 1.0) * std::log(q[i]));
  }
  const double shift = *std::max_element(exponents.begin(), exponents.end());
  double acc = 0.0;
  for (double e : exponents) acc += std::exp(e - shift);
  const double value = (shift + std::log(acc)) / (alpha - 1.0);
  return std::max(value, 0.0);
}

double MaxDivergence(const Pmf& p, const Pmf& q) {
  CheckSameSupport(p, q);
  double best = -kInf;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] < kTinyProbability) return kInf;
    best = std::max(best, std::log(p[i]) - std::log(q[i]));
  }
  return std::max(best, 0.0);
}

Pmf ConvolveSum(std::span<const Pmf> pmfs) {
  if (pmfs.empty()) throw ValidationError("ConvolveSum: empty list");
  Pmf acc = pmfs.front();
  for (std::size_t k = 1; k < pmfs.size(); ++k) {
    const double tolerance =
        kDefaultNormalizationTolerance * static_cast<double>(k + 1);
    acc = ConvolveTwo(acc.probs(), pmfs[k].probs(), tolerance);
  }
  return acc;
}

int DefaultSplit(int n) { return (n - 1) / 2; }

NeighborPair WorstCaseNeighbors(int n, double c, int split_k) {
  if (n < 1) throw ValidationError("neighbors: n must be >= 1");
  if (!(c > 0.0)) throw ValidationError("neighbors: c must be > 0");
  if (split_k < 0 || split_k > n - 1) {
    throw ValidationError("neighbors: split_k must lie in [0, n-1]");
  }
  NeighborPair pair;
  pair.x.assign(static_cast<std::size_t>(n), -c);
  pair.x[0] = c;
  for (int i = 1; i <= split_k; ++i) pair.x[static_cast<std::size_t>(i)] = c;
  pair.x_prime = pair.x;
  pair.x_prime[0] = -c;
  return pair;
}

NeighborPair RandomWorstCaseNeighbors(int n, double c, RngStream& rng) {
  if (n < 1) throw ValidationError("neighbors: n must be >= 1");
  NeighborPair pair;
  pair.x.resize(static_cast<std::size_t>(n));
  pair.x[0] = c;
  for (int i = 1; i < n; ++i) {
    pair.x[static_cast<std::size_t>(i)] = rng.Bernoulli(0.5) ? c : -c;
  }
  pair.x_prime = pair.x;
  pair.x_prime[0] = -c;
  return pair;
}

std::pair<Pmf, Pmf> AggregatePmfs(const DivergenceQuery& query) {
  ValidateQuery(query);
  return {SumLaw(query.mechanism, query.x),
          SumLaw(query.mechanism, query.x_prime)};
}

double AggregateDivergence(const DivergenceQuery& query) {
  auto [p, q] = AggregatePmfs(query);
  return RenyiDivergence(p, q, query.alpha);
}

double MaxDivergenceBound(const RqmParams& params) {
  const double log_1mq = std::log1p(-params.q());
  return std::log(2.0) + 2.0 * log_1mq +
         std::log1p(params.c() / params.delta()) -
         params.levels() * log_1mq;
}

SweepAxis ParseSweepAxis(std::string_view name) {
  if (name == "devices" || name == "n") return SweepAxis::kDevices;
  if (name == "alpha" || name == "order") return SweepAxis::kOrder;
  if (name == "input" || name == "x") return SweepAxis::kInput;
  throw ValidationError("unknown sweep axis '" + std::string(name) +
                        "' (expected devices|alpha|input)");
}

std::string_view SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kDevices:
      return "devices";
    case SweepAxis::kOrder:
      return "alpha";
    case SweepAxis::kInput:
      return "input";
  }
  return "?";
}

std::vector<double> AxisRange(double from, double to, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ValidationError("sweep step must be > 0");
  }
  if (!(to >= from)) throw ValidationError("sweep range is empty");
  std::vector<double> values;
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 0.5));
  values.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) {
    values.push_back(from + static_cast<double>(i) * step);
  }
  return values;
}

std::vector<SweepRow> DivergenceSweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw ValidationError("sweep has no axis values");
  if (spec.devices < 1) throw ValidationError("sweep needs n >= 1");
  if (spec.axis != SweepAxis::kOrder && !(spec.alpha > 1.0)) {
    throw ValidationError("sweep needs alpha > 1");
  }
  if (spec.rqm.c() != spec.pbm.c()) {
    throw ValidationError("RQM and PBM must share the clipping bound c");
  }
  const double c = spec.rqm.c();
  for (double v : spec.values) {
    const bool ok = spec.axis == SweepAxis::kDevices
                        ? (v >= 1.0 && v == std::floor(v))
                    : spec.axis == SweepAxis::kOrder ? v > 1.0
                                                     : std::abs(v) <= c;
    if (!ok) {
      throw ValidationError("sweep axis value out of range for axis " +
                            std::string(SweepAxisName(spec.axis)));
    }
  }

  auto neighbors_for = [&](int n) {
    if (spec.neighbors == NeighborMode::kBalanced) {
      return WorstCaseNeighbors(n, c, DefaultSplit(n));
    }
    RngStream rng = RngStream::Derive(spec.seed, StreamPurpose::kNeighbors,
                                      {static_cast<std::uint64_t>(n)});
    return RandomWorstCaseNeighbors(n, c, rng);
  };
  auto query_for = [&](const MechanismSpec& mech, const NeighborPair& pair,
                       double alpha, bool allow_identical) {
    return DivergenceQuery{alpha, mech, pair.x, pair.x_prime, allow_identical};
  };

  std::vector<SweepRow> rows(spec.values.size());

  if (spec.axis == SweepAxis::kOrder) {
    // Every row shares the same pair of sum laws.
    const NeighborPair pair = neighbors_for(spec.devices);
    const auto rqm = AggregatePmfs(query_for(spec.rqm, pair, 2.0, false));
    const auto pbm = AggregatePmfs(query_for(spec.pbm, pair, 2.0, false));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double alpha = spec.values[r];
      rows[r] = {alpha, RenyiDivergence(rqm.first, rqm.second, alpha),
                 RenyiDivergence(pbm.first, pbm.second, alpha)};
    }
    return rows;
  }

  auto compute_row = [&](std::size_t r) {
    const double v = spec.values[r];
    NeighborPair pair;
    bool allow_identical = false;
    if (spec.axis == SweepAxis::kDevices) {
      pair = neighbors_for(static_cast<int>(v));
    } else {
      pair = neighbors_for(spec.devices);
      pair.x[0] = v;
      allow_identical = true;
    }
    rows[r] = {v,
               AggregateDivergence(
                   query_for(spec.rqm, pair, spec.alpha, allow_identical)),
               AggregateDivergence(
                   query_for(spec.pbm, pair, spec.alpha, allow_identical))};
  };

  const int threads =
      std::clamp(spec.threads, 1, static_cast<int>(rows.size()));
  if (threads == 1) {
    for (std::size_t r = 0; r < rows.size(); ++r) compute_row(r);
    return rows;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  {
    std::vector<std::jthread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        try {
          for (std::size_t r = static_cast<std::size_t>(t); r < rows.size();
               r += static_cast<std::size_t>(threads)) {
            compute_row(r);
          }
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

ComparisonPreset ParseComparisonPreset(std::string_view name) {
  if (name == "standard") return ComparisonPreset::kStandard;
  if (name == "wide") return ComparisonPreset::kWide;
  if (name == "narrow") return ComparisonPreset::kNarrow;
  throw ValidationError("unknown preset '" + std::string(name) +
                        "' (expected standard, wide or narrow)");
}

std::string_view ComparisonPresetName(ComparisonPreset preset) {
  switch (preset) {
    case ComparisonPreset::kStandard:
      return "standard";
    case ComparisonPreset::kWide:
      return "wide";
    case ComparisonPreset::kNarrow:
      return "narrow";
  }
  return "standard";
}

MechanismPair PresetPair(ComparisonPreset preset, PbmSupport support) {
  constexpr int kLevels = 16;
  const int trials = PbmTrialsFor(kLevels, support);
  switch (preset) {
    case ComparisonPreset::kWide:
      return {RqmParams(1.0, 2.33, kLevels, 0.42), PbmParams(1.0, 0.15, trials)};
    case ComparisonPreset::kNarrow:
      return {RqmParams(1.0, 0.429, kLevels, 0.49),
              PbmParams(1.0, 0.35, trials)};
    case ComparisonPreset::kStandard:
      break;
  }
  return {RqmParams(1.0, 1.0, kLevels, 0.42), PbmParams(1.0, 0.25, trials)};
}

}  // namespace rqm
