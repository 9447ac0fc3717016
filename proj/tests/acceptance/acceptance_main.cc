// Copyright 2026 The bfce Authors
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

// Acceptance suite: runs every exit criterion at its pinned tolerance and
// prints one PASS/FAIL line per criterion. Exit status is non-zero if any
// criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bfce/estimator.h"
#include "bfce/filter.h"
#include "bfce/fpp.h"
#include "bfce/sim.h"
#include "bfce/sizing.h"

namespace {

using namespace bfce;

constexpr uint64_t kPaperM = 162945;
constexpr uint32_t kPaperK = 6;
constexpr uint64_t kSmax = 17000;
constexpr uint64_t kSeed = 0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "ok " : "FAILED ") + what;
  }
};

std::string Fmt(const char* fmt, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a);
  return buf;
}

std::string Fmt(const char* fmt, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

std::string Fmt(const char* fmt, double a, double b, double c) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

bool InRange(double v, double lo, double hi) { return v >= lo && v <= hi; }

const CheckpointMetrics& Row(const TrialMetrics& t, uint64_t s) {
  for (const auto& r : t.rows) {
    if (r.s == s) return r;
  }
  throw std::runtime_error("missing checkpoint " + std::to_string(s));
}

TrialConfig PaperConfig(double p_smax, std::vector<uint64_t> checkpoints) {
  return {kPaperM, kPaperK, UniverseSpec{kSmax, p_smax}, std::move(checkpoints), kSmax,
          FppVariant::kApproximate};
}

// Experiments shared across criteria, computed once.
struct Runs {
  TrialMetrics p1_300;    // p_smax = 1, 300 trials
  TrialMetrics p06_300;   // p_smax = 0.6, 300 trials
  TrialMetrics p1_1000;   // p_smax = 1, 1000 trials
  TrialMetrics overload;  // up to s = 30000
  std::vector<const TrialMetrics*> All() const { return {&p1_300, &p06_300, &p1_1000, &overload}; }
};

// --- independent oracles --------------------------------------------------

// Probability that a probe hits only set bits, by enumerating every hash
// assignment of n inserted elements and one probe (ideal hashing).
double BruteForceFpp(uint64_t m, uint32_t k, uint64_t n) {
  const uint64_t insert_slots = k * n;
  const uint64_t slots = insert_slots + k;
  uint64_t total = 1;
  for (uint64_t i = 0; i < slots; ++i) total *= m;
  uint64_t hits = 0;
  std::vector<uint64_t> digits(slots, 0);
  for (uint64_t code = 0; code < total; ++code) {
    uint64_t c = code;
    for (auto& d : digits) {
      d = c % m;
      c /= m;
    }
    uint64_t mask = 0;
    for (uint64_t i = 0; i < insert_slots; ++i) mask |= uint64_t{1} << digits[i];
    bool all = true;
    for (uint64_t i = insert_slots; i < slots; ++i) all = all && ((mask >> digits[i]) & 1);
    hits += all;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

// --- criteria ---------------------------------------------------------------

Outcome Criterion1() {
  Outcome o;
  const FilterSize size = ClassicalSize(kSmax, 0.01);
  o.Check(size.m == 162945 && size.k == 6,
          "classical_size(17000, 0.01) = (" + std::to_string(size.m) + ", " +
              std::to_string(size.k) + "), expected (162945, 6)");
  const uint32_t k = KOptCumulative(160000, kSmax);
  o.Check(k == 6, "k_opt_cumulative(160000, 17000) = " + std::to_string(k) + ", expected 6");
  return o;
}

Outcome Criterion2(const Runs& runs) {
  Outcome o;
  const auto& r = Row(runs.p1_300, kSmax);
  o.Check(InRange(r.corrected.rmse, 4.5, 6.7), Fmt("corrected RMSE %.3f in [4.5, 6.7]", r.corrected.rmse));
  o.Check(InRange(r.papapetrou.rmse, 27, 42), Fmt("baseline RMSE %.3f in [27, 42]", r.papapetrou.rmse));
  o.Check(std::fabs(r.corrected.mbe) <= 1.5, Fmt("corrected |MBE| %.3f <= 1.5", std::fabs(r.corrected.mbe)));
  o.Check(std::fabs(r.papapetrou.mbe) <= 6, Fmt("baseline |MBE| %.3f <= 6", std::fabs(r.papapetrou.mbe)));
  return o;
}

Outcome Criterion3(const Runs& runs) {
  Outcome o;
  const auto& r = Row(runs.p1_300, kSmax);
  const double ratio = r.papapetrou.mbe_std / r.corrected.mbe_std;
  o.Check(InRange(ratio, 4.5, 9),
          Fmt("std ratio %.3f / %.3f = %.3f in [4.5, 9]", r.papapetrou.mbe_std, r.corrected.mbe_std,
              ratio));
  return o;
}

Outcome Criterion4(const Runs& runs) {
  Outcome o;
  const auto& r06 = Row(runs.p06_300, kSmax);
  const auto& r1 = Row(runs.p1_300, kSmax);
  o.Check(InRange(r06.corrected.rmse, 4.4, 6.7),
          Fmt("p=0.6 corrected RMSE %.3f in [4.4, 6.7]", r06.corrected.rmse));
  o.Check(InRange(r06.mean_stream_len, 27000, 27600),
          Fmt("p=0.6 mean stream length %.1f in [27000, 27600]", r06.mean_stream_len));
  o.Check(InRange(r1.mean_stream_len, 17020, 17045),
          Fmt("p=1 mean stream length %.1f in [17020, 17045]", r1.mean_stream_len));
  return o;
}

Outcome Criterion5(const Runs& runs) {
  Outcome o;
  for (uint64_t s : {5000, 10000, 17000}) {
    const auto& r = Row(runs.p1_1000, s);
    const double rel = std::fabs(r.predicted_std - r.std_true_n) / r.std_true_n;
    o.Check(rel <= 0.15, "s=" + std::to_string(s) +
                             Fmt(" predicted %.4f vs true %.4f, rel %.3f <= 0.15",
                                 r.predicted_std, r.std_true_n, rel));
  }
  return o;
}

Outcome Criterion6() {
  Outcome o;
  const BatchResult r = RunBatchExperiment(kPaperM, kPaperK, 50, 400, 16970, kSeed);
  o.Check(InRange(r.one_by_one_mean_error, 27, 34),
          Fmt("one-by-one mean error %.4f in [27, 34]", r.one_by_one_mean_error));
  o.Check(InRange(r.batch_mean_error, 27, 34),
          Fmt("batch mean error %.4f in [27, 34]", r.batch_mean_error));
  o.Check(r.batch_mean_error < r.one_by_one_mean_error,
          Fmt("batch %.4f < one-by-one %.4f", r.batch_mean_error, r.one_by_one_mean_error));
  return o;
}

Outcome Criterion7(const Runs& runs) {
  Outcome o;
  bool below = true;
  std::string worst;
  for (const auto& r : runs.overload.rows) {
    if (r.s > 20000) continue;
    if (!(r.corrected.mae < r.papapetrou.mae)) {
      below = false;
      worst = " (violated at s=" + std::to_string(r.s) + ")";
    }
  }
  o.Check(below, "corrected MAE < baseline MAE for every s <= 20000" + worst);
  const auto& end = Row(runs.overload, 30000);
  o.Check(end.papapetrou.mae < end.corrected.mae,
          Fmt("s=30000 baseline MAE %.3f < corrected MAE %.3f", end.papapetrou.mae,
              end.corrected.mae));
  return o;
}

Outcome Criterion8(const Runs& runs) {
  Outcome o;
  std::mt19937_64 rng(20260101);

  // No false negatives over randomized histories.
  {
    bool ok = true;
    for (int h = 0; h < 20 && ok; ++h) {
      const uint64_t m = 64 + rng() % 100000;
      const auto k = static_cast<uint32_t>(1 + rng() % 8);
      CountingBloomFilter f(m, k, rng());
      const uint64_t size = 1 + rng() % 10000;
      std::vector<uint64_t> history(size);
      for (auto& x : history) {
        x = rng();
        f.InsertCounting(AsBytes(EncodeId(x)));
      }
      for (uint64_t x : history) ok = ok && f.Check(AsBytes(EncodeId(x)));
      ok = ok && f.ones() == f.RecountOnes();
    }
    o.Check(ok, "no false negatives over 20 random histories");
  }

  // exact_fpp against enumeration.
  {
    bool ok = true;
    double worst = 0.0;
    for (uint64_t m = 1; m <= 4; ++m) {
      for (uint32_t k = 1; k <= std::min<uint64_t>(2, m); ++k) {
        for (uint64_t n = 0; n <= 3; ++n) {
          const double diff = std::fabs(ExactFpp(m, k, n) - BruteForceFpp(m, k, n));
          worst = std::max(worst, diff);
          ok = ok && diff <= 1e-15;
        }
      }
    }
    o.Check(ok, Fmt("exact_fpp == enumeration for m<=4, k<=2, n<=3 (max diff %.2g)", worst));
  }

  // exact >= approx on the small grid.
  {
    bool ok = true;
    for (uint64_t m = 1; m <= 16; ++m) {
      for (uint32_t k = 1; k <= std::min<uint64_t>(3, m); ++k) {
        for (uint64_t n = 0; n <= 8; ++n) ok = ok && ExactFpp(m, k, n) >= ApproxFpp(m, k, n);
      }
    }
    o.Check(ok, "exact_fpp >= approx_fpp for m<=16, k<=3, n<=8");
  }

  // Geometric law of the false positives between two increments.
  {
    const uint64_t m = (1 << 20) + 7;
    const uint32_t k = 3;
    CountingBloomFilter f(m, k, 99);
    uint64_t next = 0;
    while (f.FillRatioFpp() < 0.05) f.InsertCounting(AsBytes(EncodeId(Mix64(next++))));
    const double t = f.FillRatioFpp();
    const int reps = 100000;
    const int bins = 6;  // 0..4 and a tail bin
    std::vector<double> observed(bins, 0.0);
    for (int i = 0; i < reps; ++i) {
      int r = 0;
      while (f.Check(AsBytes(EncodeId(Mix64(next++))))) ++r;
      observed[std::min(r, bins - 1)] += 1;
    }
    double chi2 = 0.0;
    double tail = 1.0;
    for (int r = 0; r < bins; ++r) {
      const double p = r < bins - 1 ? ErrorDistributionPmf(t, r) : tail;
      tail -= p;
      const double expected = p * reps;
      chi2 += (observed[r] - expected) * (observed[r] - expected) / expected;
    }
    const boost::math::chi_squared dist(bins - 1);
    const double p_value = boost::math::cdf(boost::math::complement(dist, chi2));
    o.Check(p_value >= 1e-3,
            Fmt("geometric pmf chi-square %.2f, p=%.4f >= 1e-3 (t=%.4f)", chi2, p_value, t));
  }

  // Metric identities on every emitted row.
  {
    bool ok = true;
    size_t rows = 0;
    for (const TrialMetrics* t : runs.All()) {
      const double n = static_cast<double>(t->trials);
      for (const auto& r : t->rows) {
        for (const ErrorStats* e : {&r.corrected, &r.papapetrou}) {
          const double lhs = e->rmse * e->rmse;
          const double rhs = e->mbe * e->mbe + e->mbe_std * e->mbe_std * (n - 1) / n;
          ok = ok && std::fabs(lhs - rhs) <= 1e-9 * std::max(lhs, 1e-300);
          ok = ok && e->mae <= e->rmse * (1 + 1e-12);
          ++rows;
        }
      }
    }
    o.Check(ok, "rmse^2 decomposition and mae <= rmse on " + std::to_string(rows) + " rows");
  }

  // Serialization round trip with behavioral equality.
  {
    CardinalityCounter c(4099, 4, 17);
    for (uint64_t i = 0; i < 100; ++i) c.Add(Mix64(i));
    const CardinalityCounter back = CardinalityCounter::Deserialize(c.Serialize());
    bool ok = back == c;
    for (uint64_t i = 0; i < 1000; ++i) {
      const auto e = EncodeId(Mix64(1u << 20 | i));
      ok = ok && back.filter().Check(AsBytes(e)) == c.filter().Check(AsBytes(e));
    }
    o.Check(ok, "serialization round trip equal on state and 1000 probes");
  }

  // Determinism under fixed seeds.
  {
    TrialConfig config{4096, 4, UniverseSpec{300, 0.5}, {100, 200, 300}, 300,
                       FppVariant::kApproximate};
    std::ostringstream a, b, c;
    WriteMetricsCsv(RunExperiment(config, 50, 7, 1), a);
    WriteMetricsCsv(RunExperiment(config, 50, 7, 1), b);
    WriteMetricsCsv(RunExperiment(config, 50, 7, 4), c);
    o.Check(a.str() == b.str() && a.str() == c.str(),
            "byte-identical experiment output across reruns and thread counts");
  }
  return o;
}

Outcome Criterion9() {
  Outcome o;
  const uint64_t filters = 2000;
  TrialConfig config{1024, 4, UniverseSpec{400, 1.0}, {100, 200, 300, 400}, 400,
                     FppVariant::kApproximate};
  const TrialMetrics t = RunExperiment(config, filters, kSeed);
  for (const auto& r : t.rows) {
    const double sd = r.predicted_std;
    // mean(n_s - s) - E(S_s) equals the corrected MBE.
    const double tol = 3 * std::sqrt(sd * sd / static_cast<double>(filters));
    o.Check(std::fabs(r.corrected.mbe) <= tol,
            "s=" + std::to_string(r.s) +
                Fmt(" mean(n_s - s) - E(S_s) = %.4f within %.4f", r.corrected.mbe, tol));
    const double rel = std::fabs(r.std_true_n - sd) / sd;
    o.Check(rel <= 0.15, "s=" + std::to_string(r.s) +
                             Fmt(" std(n_s) %.4f vs sqrt(V) %.4f, rel %.3f <= 0.15",
                                 r.std_true_n, sd, rel));
  }
  return o;
}

}  // namespace

int main() {
  Runs runs;
  runs.p1_300 = RunExperiment(PaperConfig(1.0, {5000, 10000, kSmax}), 300, kSeed);
  runs.p06_300 = RunExperiment(PaperConfig(0.6, {kSmax}), 300, kSeed);
  runs.p1_1000 = RunExperiment(PaperConfig(1.0, {5000, 10000, kSmax}), 1000, kSeed);
  runs.overload = OverloadSweep(kPaperM, kPaperK, 300, DefaultCheckpoints(30000, 500), kSeed);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 sizing exactness", [] { return Criterion1(); }},
      {"2 reduced-scale accuracy table at s=17000", [&] { return Criterion2(runs); }},
      {"3 baseline/corrected spread ratio", [&] { return Criterion3(runs); }},
      {"4 true-positive invariance", [&] { return Criterion4(runs); }},
      {"5 predicted std fit", [&] { return Criterion5(runs); }},
      {"6 batch-start experiment", [] { return Criterion6(); }},
      {"7 overload crossover", [&] { return Criterion7(runs); }},
      {"8 property suite", [&] { return Criterion8(runs); }},
      {"9 desk-scale Monte-Carlo of the correction", [] { return Criterion9(); }},
  };

  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(),
                o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
