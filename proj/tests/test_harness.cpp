#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "vpp/harness/edge_study.hpp"
#include "vpp/harness/oracle.hpp"
#include "vpp/harness/run.hpp"
#include "vpp/harness/sweep.hpp"

using namespace vpp;
using namespace vpp::harness;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.process = ProcessKind::v;
  p.alpha = 0.5;
  p.n_points = 150;
  p.steps_per_point = 4;
  p.replicates = 3;
  p.seed = 11;
  p.r_points = 16;
  p.reference_grid = 32;
  return p;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("vpp_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(Plan, JsonRoundTripPreservesFingerprint) {
  auto p = small_plan();
  p.r_grid = {0.01, 0.02};
  const auto q = plan_from_json(to_json(p));
  EXPECT_EQ(fingerprint(p), fingerprint(q));
  EXPECT_EQ(to_json(p).dump(), to_json(q).dump());
}

TEST(Plan, FingerprintIgnoresThreadsOnly) {
  auto p = small_plan();
  auto q = p;
  q.threads = 7;
  EXPECT_EQ(fingerprint(p), fingerprint(q));
  q.alpha = 0.25;
  EXPECT_NE(fingerprint(p), fingerprint(q));
}

TEST(Plan, RejectsUnknownKeysAndBadValues) {
  auto j = to_json(small_plan());
  j["no_such_field"] = 1;
  EXPECT_THROW(plan_from_json(j), std::invalid_argument);
  auto p = small_plan();
  p.replicates = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Run, DeterministicAcrossThreadCounts) {
  auto p = small_plan();
  p.threads = 1;
  const auto a = run(p);
  p.threads = 3;
  const auto b = run(p);
  ASSERT_EQ(a.replicates.size(), b.replicates.size());
  for (std::size_t i = 0; i < a.replicates.size(); ++i) {
    EXPECT_EQ(a.replicates[i].r_star, b.replicates[i].r_star);
    EXPECT_EQ(a.replicates[i].pattern.points, b.replicates[i].pattern.points);
  }
  EXPECT_EQ(record_json(a).dump(), record_json(b).dump());
}

TEST(Run, ReplicatesUseDistinctStreams) {
  const auto rec = run(small_plan());
  EXPECT_NE(rec.replicates[0].seed, rec.replicates[1].seed);
  EXPECT_NE(rec.replicates[0].r_star, rec.replicates[1].r_star);
}

TEST(Run, ZeroStepsIsTheInitialPattern) {
  auto p = small_plan();
  p.process = ProcessKind::csr;
  p.steps_per_point = 0;
  p.replicates = 1;
  p.depth_filter = 1;
  const auto rec = run(p);
  ASSERT_EQ(rec.failures, 0u);
  const auto& r = rec.replicates[0];
  const auto tess = Tessellation::build(r.pattern, Domain{DomainKind::unit_square});
  std::vector<double> areas;
  for (const auto& c : tess.cells()) areas.push_back(c.area);
  EXPECT_NEAR(r.r_star, stats::thiel_redundancy(areas), 1e-12);
  EXPECT_EQ(rec.r_star.count, 1u);
  EXPECT_EQ(rec.r_star.sd, 0.0);
}

TEST(Run, StepCallbackSeesEveryStepOfFirstReplicate) {
  auto p = small_plan();
  std::uint64_t seen = 0, last = 0;
  (void)run(p, [&](const dynamics::StepRecord& s) {
    ++seen;
    last = s.step;
  });
  EXPECT_EQ(seen, p.total_steps());
  EXPECT_EQ(last, p.total_steps());
}

TEST(Aggregate, StandardErrorAndOrderInvariance) {
  std::vector<double> xs = {0.12, 0.15, 0.11, 0.19, 0.14, 0.13};
  const auto a = aggregate(xs);
  double m = 0.0;
  for (double x : xs) m += x;
  m /= xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / (xs.size() - 1));
  EXPECT_NEAR(a.mean, m, 1e-15);
  EXPECT_NEAR(a.sd, sd, 1e-15);
  EXPECT_NEAR(a.se, sd / std::sqrt(6.0), 1e-15);
  std::mt19937 g(3);
  for (int k = 0; k < 20; ++k) {
    std::shuffle(xs.begin(), xs.end(), g);
    const auto b = aggregate(xs);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.sd, b.sd);
  }
}

TEST(Sweep, ParsesRangesAndLists) {
  const auto r = parse_values("-2:0.3:1");
  ASSERT_EQ(r.size(), 11u);
  EXPECT_EQ(r.front(), "-2");
  EXPECT_EQ(r.back(), "1");
  EXPECT_EQ(parse_values("vanilla,pro-6").size(), 2u);
  EXPECT_THROW(parse_values("1:0:2"), std::invalid_argument);
}

TEST(Sweep, RejectsEmptyGridAndUnknownParameter) {
  EXPECT_THROW(sweep(small_plan(), "alpha", {}), std::invalid_argument);
  EXPECT_THROW(sweep(small_plan(), "colour", {"1"}), std::invalid_argument);
}

TEST(Sweep, FailingPointDoesNotStopOthers) {
  auto p = small_plan();
  p.replicates = 1;
  p.process = ProcessKind::n;
  const auto pts = sweep(p, "selection", {"vanilla", "not-a-rule", "anti-few"});
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_TRUE(pts[0].record.has_value());
  EXPECT_FALSE(pts[1].record.has_value());
  EXPECT_FALSE(pts[1].error.empty());
  EXPECT_TRUE(pts[2].record.has_value());
  const auto csv = sweep_csv(pts, "selection", p);
  EXPECT_NE(csv.find("not-a-rule"), std::string::npos);
}

TEST(Oracle, EveryCheckPasses) {
  for (const auto& name : oracle_names()) {
    const auto r = run_oracle(name, 40, 5);
    EXPECT_TRUE(r.pass) << name << ": " << r.detail;
    EXPECT_TRUE(r.instance.is_null()) << name;
  }
  EXPECT_THROW(run_oracle("bogus", 10, 1), std::invalid_argument);
}

TEST(EdgeStudy, IdenticalResponsesAreNotSignificant) {
  // Same level of every factor in every cell: no effect can be flagged.
  std::vector<std::vector<std::vector<double>>> cells(2, std::vector<std::vector<double>>(3, {0.4, 0.6, 0.5}));
  const auto t = stats::two_way_anova(cells);
  EXPECT_GE(t.a.p, kSignificance);
  EXPECT_GE(t.ab.p, kSignificance);
  EXPECT_GE(t.b.p, kSignificance);
}

TEST(EdgeStudy, RunsAndReportsBothTables) {
  auto p = small_plan();
  p.n_points = 200;
  p.replicates = 3;
  const auto s = edge_study(p, {"csr", "v:-1"}, 3);
  ASSERT_EQ(s.responses.size(), 2u);
  ASSERT_EQ(s.responses[0].size(), 3u);
  EXPECT_EQ(s.responses[0][0].size(), 3u);
  ASSERT_TRUE(s.interior.has_value());
  EXPECT_EQ(s.interior->b.df, 1.0);
  const auto j = edge_study_json(s);
  EXPECT_TRUE(j.contains("anova_without_boundary"));
}

TEST(EdgeStudy, ClassContributionsSumToRedundancy) {
  auto p = small_plan();
  p.replicates = 1;
  const auto rec = run(p);
  const auto tess = Tessellation::build(rec.replicates[0].pattern, Domain{DomainKind::unit_square});
  const auto depth = geometry::nn_depths(tess);
  const auto c = class_contributions(tess, 4);
  std::vector<double> count(4, 0.0);
  for (int d : depth) count[depth_class(d, 4)] += 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) total += c[k] * count[k];
  std::vector<double> areas;
  for (const auto& cell : tess.cells()) areas.push_back(cell.area);
  EXPECT_NEAR(total / tess.size(), stats::thiel_redundancy(areas), 1e-12);
}

TEST(EdgeStudy, PreconditionsAreChecked) {
  EXPECT_THROW(edge_study(small_plan(), {"csr"}), std::invalid_argument);
  EXPECT_THROW(edge_study(small_plan(), {"csr", "v:1"}, 1), std::invalid_argument);
  EXPECT_THROW(edge_study(small_plan(), {"csr", "q:1"}), std::invalid_argument);
}

TEST(Output, WritesEveryArtefactWithoutTemporaries) {
  auto p = small_plan();
  p.replicates = 2;
  const auto rec = run(p);
  const auto dir = scratch_dir("csv");
  write_outputs(rec, dir, "csv");
  for (const char* f : {"manifest.json", "summary.csv", "replicates.csv", "epmf.csv", "epmf.json",
                        "jcurve.csv", "patterns/replicate_000.txt", "patterns/replicate_001.txt"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  std::ifstream in(dir / "manifest.json");
  const auto m = json::parse(in);
  EXPECT_EQ(m["fingerprint"], rec.fingerprint);

  const auto jdir = scratch_dir("json");
  write_outputs(rec, jdir, "json");
  EXPECT_TRUE(std::filesystem::exists(jdir / "results.json"));
  EXPECT_THROW(write_outputs(rec, jdir, "xml"), std::invalid_argument);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(jdir);
}
