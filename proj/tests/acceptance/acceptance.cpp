// Prints one PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.
// Usage: acceptance [--only N] [--threads T]

#include "lkpolar/catalog.hpp"
#include "lkpolar/germ.hpp"
#include "lkpolar/lkmeasure.hpp"
#include "lkpolar/polar.hpp"
#include "lkpolar/smoothshape.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <algorithm>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace lkpolar;

namespace tolerance {
constexpr double se_multiplier = 3.0;           // two-route and oracle agreement
constexpr double lk_relative_floor = 0.01;      // lk_measure vs intrinsic volumes
constexpr double steiner_relative = 0.02;       // Steiner fit vs Lambda_k b_{n-k}
constexpr double kinematic_relative = 0.05;     // ratio spread across shapes
constexpr double rejection_rate = 0.01;         // uniform-plane resampling
constexpr double morse_seconds = 10.0;
constexpr double exchange_seconds = 60.0;
constexpr double oracle_seconds = 120.0;
constexpr double polar_seconds_per_shape = 180.0;
constexpr double kinematic_seconds = 180.0;
constexpr double germ_seconds = 120.0;
}  // namespace tolerance

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240917;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

bool within(const Estimate& a, double expected, double m) {
  return std::abs(a.value - expected) <= m * a.std_error + 1e-9 * std::max(1.0, std::abs(expected));
}

std::string fmt(const Estimate& e) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f±%.4f", e.value, e.std_error);
  return buf;
}

int threads_opt = 1;

// 1: sum of PL Morse indices equals chi
void criterion_morse(Outcome& out) {
  const auto t0 = Clock::now();
  struct Case {
    const char* id;
    int chi;
  };
  for (const Case c : {Case{"octahedron", 2}, Case{"torus7", 0}, Case{"cube-boundary", 2}}) {
    const StratifiedComplex k = shape_from_id(c.id).complex();
    RandomSource rng = RandomSource(kSeed).substream(1);
    int checked = 0, mismatches = 0;
    while (checked < 100) {
      const Vec v = sample_unit_sphere(3, rng);
      std::map<int, int> idx;
      try {
        idx = pl_morse_indices(k, v);
      } catch (const DegenerateDirection&) {
        continue;
      }
      int total = 0;
      for (const auto& [vertex, index] : idx) total += index;
      mismatches += total != c.chi;
      ++checked;
    }
    out.detail << " " << c.id << ":" << (100 - mismatches) << "/100";
    out.require(mismatches == 0, std::string(c.id) + " sum differs from chi");
  }
  const double s = seconds_since(t0);
  out.require(s < tolerance::morse_seconds, "time");
}

// 2: Morse counting average equals chi
void criterion_exchange(Outcome& out) {
  const auto t0 = Clock::now();
  struct Case {
    const char* id;
    double chi;
  };
  for (const Case c : {Case{"sphere:1", 2}, Case{"torus:2:1", 0}, Case{"octahedron", 2}}) {
    const ExchangeResult r =
        exchange_lambda0(shape_from_id(c.id), RandomSource(kSeed).substream(2), {2000, threads_opt, 50});
    out.detail << " " << c.id << "=" << fmt(r.estimate);
    out.require(within(r.estimate, c.chi, tolerance::se_multiplier) && r.dropped == 0, c.id);
  }
  out.require(seconds_since(t0) < tolerance::exchange_seconds, "time");
}

// 3: intrinsic volumes of the unit cube and the Steiner fit
void criterion_oracle(Outcome& out) {
  const auto t0 = Clock::now();
  const Shape cube = shape_from_id("cube");
  const double expected[] = {1, 3, 3, 1};
  for (int k = 0; k <= 3; ++k) {
    const LkResult r = lk_measure(cube, k, RandomSource(kSeed).substream(30 + k), {2000, threads_opt, 50});
    const double tol = std::max(tolerance::lk_relative_floor * expected[k], tolerance::se_multiplier * r.estimate.std_error);
    out.detail << " L" << k << "=" << fmt(r.estimate);
    out.require(std::abs(r.estimate.value - expected[k]) <= tol, "Lambda_" + std::to_string(k));
  }
  const SteinerFit fit =
      steiner_oracle(cube, {0.1, 0.2, 0.35, 0.5, 0.7}, 1000000, RandomSource(kSeed).substream(35), threads_opt);
  for (int k = 0; k <= 3; ++k) {
    const double target = expected[k] * ball_volume(3 - k);
    const double got = fit.coefficients[static_cast<std::size_t>(k)].value;
    out.require(std::abs(got - target) <= tolerance::steiner_relative * target, "Steiner c" + std::to_string(k));
    char buf[48];
    std::snprintf(buf, sizeof buf, " c%d/ref=%.4f", k, got / target);
    out.detail << buf;
  }
  out.require(seconds_since(t0) < tolerance::oracle_seconds, "time");
}

struct RejectionTally {
  std::int64_t planes = 0;
  std::int64_t resampled = 0;
};

// 4: Lambda_q and L_q agree
void criterion_main(Outcome& out, std::map<std::string, RejectionTally>& tally) {
  struct Case {
    const char* id;
    std::vector<double> expected;
  };
  const std::vector<Case> cases{{"cube", {1, 3, 3, 1}},
                                {"disk:1", {1, kPi, kPi}},
                                {"sphere:1", {2, 0, 4 * kPi}},
                                {"torus:2:1", {0, 0, 8 * kPi * kPi}}};
  for (const Case& c : cases) {
    const auto t0 = Clock::now();
    const Shape x = shape_from_id(c.id);
    out.detail << " " << c.id << ":";
    for (std::size_t q = 0; q < c.expected.size(); ++q) {
      const int qi = static_cast<int>(q);
      const LkResult lk = lk_measure(x, qi, RandomSource(kSeed).substream(40 + q), {2000, threads_opt, 50});
      PolarLengthOptions po;
      po.n_planes = 2000;
      po.threads = threads_opt;
      const PolarLengthResult pl = polar_length(x, qi, RandomSource(kSeed).substream(50 + q), po);
      if (qi < x.ambient_dim() - 1) {
        tally[c.id].planes += po.n_planes;
        tally[c.id].resampled += pl.resampled;
      }
      const double gap = std::abs(lk.estimate.value - pl.estimate.value);
      const bool ok = gap <= tolerance::se_multiplier * combined_error(lk.estimate, pl.estimate) +
                                 1e-9 * std::max(1.0, std::abs(c.expected[q])) &&
                      within(lk.estimate, c.expected[q], tolerance::se_multiplier);
      out.detail << " q" << q << "=" << fmt(pl.estimate);
      out.require(ok, std::string(c.id) + " q=" + std::to_string(q));
    }
    const double s = seconds_since(t0);
    char buf[32];
    std::snprintf(buf, sizeof buf, " (%.0fs)", s);
    out.detail << buf;
    out.require(s < tolerance::polar_seconds_per_shape, std::string(c.id) + " time");
  }
}

// 5: the kinematic ratio does not depend on the shape
void criterion_kinematic(Outcome& out) {
  const auto t0 = Clock::now();
  for (int k = 1; k <= 2; ++k) {
    std::vector<double> ratios;
    for (const char* id : {"cube", "ball:1", "ball:2.5"}) {
      const KinematicResult r =
          kinematic_check(shape_from_id(id), k, RandomSource(kSeed).substream(60 + k), {20000, threads_opt, 50});
      out.require(!r.division_flagged, std::string(id) + " division");
      ratios.push_back(r.ratio.value);
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    const double spread = (*hi - *lo) / std::abs(ratios.front());
    char buf[64];
    std::snprintf(buf, sizeof buf, " k=%d ratio=%.4f spread=%.3f", k, ratios.front(), spread);
    out.detail << buf;
    out.require(spread <= tolerance::kinematic_relative, "k=" + std::to_string(k) + " spread");
  }
  out.require(seconds_since(t0) < tolerance::kinematic_seconds, "time");
}

std::string write_bent_link() {
  const auto path = std::filesystem::temp_directory_path() / "lkpolar_acceptance_link.plstrat";
  std::ofstream f(path);
  f << "PLSTRAT 3\n3\n0 1 0\n1 0 0\n0 -1 1\n0 0\n0 1\n0 2\n1 0 1\n1 1 2\n";
  return path.string();
}

// 6: local identities on the germ catalog
void criterion_local(Outcome& out) {
  LocalBudget budget;
  budget.n_samples = 5000;
  budget.n_planes = 2000;
  budget.n_dirs = 20000;
  budget.threads = threads_opt;
  budget.tolerance = tolerance::se_multiplier;
  const std::string link = "cone-link:" + write_bent_link();
  for (const std::string id : {"rays:2", "rays:3", "rays:5", "halfplane:2", "halfplane:3", "cone-circle:0.5",
                               "cone-circle:1.2", "flat:1:2", "flat:2:3", link.c_str()}) {
    const auto t0 = Clock::now();
    const ConeGerm g = germ_from_id(id);
    const LocalReport r = verify_local_identities(g, RandomSource(kSeed).substream(70), budget);
    bool ok = true;
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
      ok = ok && r.row_pass[i];
      const bool closed_form_checked = id.rfind("rays:", 0) == 0 || (id == "halfplane:3" && r.ks[i] == 2);
      if (closed_form_checked) {
        const double ref = *reference_local(id, r.ks[i]);
        ok = ok && agrees(r.sigma_diff[i], ref, tolerance::se_multiplier) &&
             agrees(r.l_loc[i], ref, tolerance::se_multiplier) &&
             agrees(r.lambda_loc[i], ref, tolerance::se_multiplier);
      }
    }
    for (const LocalRow& e : r.extra) ok = ok && e.pass;
    const double s = seconds_since(t0);
    out.detail << " " << (id == link ? std::string("cone-link") : id) << (ok ? "" : "!");
    out.require(ok, id);
    out.require(s < tolerance::germ_seconds, id + " time");
  }
  std::filesystem::remove(link.substr(10));
}

LinearSubspace span_cols(std::initializer_list<Vec> cols) {
  Mat m(3, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const Vec& c : cols) m.col(j++) = c;
  return LinearSubspace::span_of(m);
}

// 7: rejection rates and flagging of deliberately degenerate planes
void criterion_degeneracy(Outcome& out, std::map<std::string, RejectionTally>& tally) {
  for (const char* id : {"cube-boundary", "octahedron", "torus7", "square", "segment", "hemisphere:1", "circle:1",
                         "ellipse:2:1", "ball:1"}) {
    const Shape x = shape_from_id(id);
    for (int q = 0; q < std::min(x.dim() + 1, x.ambient_dim() - 1); ++q) {
      PolarLengthOptions po;
      po.n_planes = 300;
      po.threads = threads_opt;
      const PolarLengthResult r = polar_length(x, q, RandomSource(kSeed).substream(80 + q), po);
      tally[id].planes += po.n_planes;
      tally[id].resampled += r.resampled;
    }
  }
  double worst = 0.0;
  for (const auto& [id, t] : tally) {
    const double rate = t.planes ? static_cast<double>(t.resampled) / t.planes : 0.0;
    worst = std::max(worst, rate);
    out.require(rate < tolerance::rejection_rate, id + " rejection rate");
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, " worst rejection %.4f over %zu shapes;", worst, tally.size());
  out.detail << buf;

  RandomSource rng = RandomSource(kSeed).substream(90);
  const PolarContext cube{shape_from_id("cube")};
  const PolarContext torus{shape_from_id("torus:2:1")};
  int flagged = 0, total = 0;
  auto check = [&](const PolarContext& ctx, const LinearSubspace& p) {
    ++total;
    flagged += polar_sample(ctx, p).degenerate();
  };
  const Vec e[3] = {Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
  for (int i = 0; i < 3; ++i) {
    check(cube, span_cols({e[i]}));
    for (int j = 0; j < 20; ++j) {
      Vec u = sample_unit_sphere(3, rng);
      u -= u.dot(e[i]) * e[i];
      check(cube, span_cols({e[i], u.normalized()}));
    }
  }
  check(torus, span_cols({e[2]}));
  for (int j = 0; j < 40; ++j) {
    const double phi = rng.uniform(0, 2 * kPi);
    check(torus, span_cols({e[2], std::cos(phi) * e[0] + std::sin(phi) * e[1]}));
  }
  out.detail << " degenerate planes flagged " << flagged << "/" << total;
  out.require(flagged == total, "degenerate planes missed");
}

// 8: same seed gives bitwise equal results serially and in parallel
void criterion_determinism(Outcome& out) {
  const int par = std::max(2, threads_opt == 1 ? 4 : threads_opt);
  std::vector<std::pair<std::string, std::function<double(int)>>> runs{
      {"lk cube k0", [](int t) { return lk_measure(shape_from_id("cube"), 0, RandomSource(kSeed), {2000, t, 50}).estimate.value; }},
      {"exchange torus",
       [](int t) { return exchange_lambda0(shape_from_id("torus:2:1"), RandomSource(kSeed), {300, t, 50}).estimate.value; }},
      {"polar cube q1",
       [](int t) {
         PolarLengthOptions o;
         o.n_planes = 500;
         o.threads = t;
         const auto r = polar_length(shape_from_id("cube"), 1, RandomSource(kSeed), o);
         return r.estimate.value + r.estimate.std_error;
       }},
      {"polar disk q1",
       [](int t) {
         PolarLengthOptions o;
         o.n_planes = 100;
         o.threads = t;
         return polar_length(shape_from_id("disk:1"), 1, RandomSource(kSeed), o).estimate.value;
       }},
      {"kinematic ball",
       [](int t) { return kinematic_check(shape_from_id("ball:1"), 1, RandomSource(kSeed), {2000, t, 50}).ratio.value; }},
      {"sigma rays:3", [](int t) { return sigma_invariant(germ_from_id("rays:3"), 1, 2000, RandomSource(kSeed), t).estimate.value; }},
      {"L_loc halfplane:3",
       [](int t) { return local_polar_length(germ_from_id("halfplane:3"), 1, 500, RandomSource(kSeed), t).estimate.value; }},
  };
  int same = 0;
  for (const auto& [name, f] : runs) {
    const double a = f(1), b = f(1), c = f(par);
    const bool ok = std::memcmp(&a, &b, sizeof a) == 0 && std::memcmp(&a, &c, sizeof a) == 0;
    same += ok;
    out.require(ok, name);
  }
  out.detail << " " << same << "/" << runs.size() << " bitwise equal (1 vs " << par << " threads)";
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
    if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) threads_opt = std::max(1, std::atoi(argv[++i]));
  }
  std::map<std::string, RejectionTally> tally;
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"PL Morse indices sum to chi", criterion_morse},
      {"exchange formula", criterion_exchange},
      {"intrinsic-volume and Steiner oracles", criterion_oracle},
      {"L_q = Lambda_q two-route agreement", [&](Outcome& o) { criterion_main(o, tally); }},
      {"kinematic ratio constancy", criterion_kinematic},
      {"local identities on germs", criterion_local},
      {"degeneracy discipline", [&](Outcome& o) { criterion_degeneracy(o, tally); }},
      {"determinism", criterion_determinism},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (only && number != only) continue;
    Outcome out;
    const auto t0 = Clock::now();
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << " exception: " << e.what();
    }
    all = all && out.pass;
    std::printf("criterion %d: %s  %s (%.1fs)%s\n", number, out.pass ? "PASS" : "FAIL", criteria[i].first,
                seconds_since(t0), out.detail.str().c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
