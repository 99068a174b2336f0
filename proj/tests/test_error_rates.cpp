#include <doctest.h>

#include <cmath>
#include <random>

#include "error_rates.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bbr;
using testutil::ingest_text;

namespace {

// dataset with exact cell counts, one shared item per ground truth
StudyDataset dataset_with_cells(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                std::uint64_t d, std::uint64_t e, std::uint64_t f) {
  StudyDataset ds;
  std::uint64_t n = 0;
  auto add = [&](GroundTruth gt, Conclusion concl, std::uint64_t count) {
    for (std::uint64_t k = 0; k < count; ++k) {
      Response r;
      r.examiner_id = "E" + std::to_string(n);
      r.item_id = gt == GroundTruth::SameSource ? "ISS" : "IDS";
      r.ground_truth = gt;
      r.canonical = concl;
      r.raw_conclusion = to_string(concl);
      r.sequence = n++;
      ds.responses.push_back(std::move(r));
    }
  };
  add(GroundTruth::SameSource, Conclusion::Identification, a);
  add(GroundTruth::SameSource, Conclusion::Inconclusive, b);
  add(GroundTruth::SameSource, Conclusion::Exclusion, c);
  add(GroundTruth::DifferentSource, Conclusion::Identification, d);
  add(GroundTruth::DifferentSource, Conclusion::Inconclusive, e);
  add(GroundTruth::DifferentSource, Conclusion::Exclusion, f);
  return ds;
}

}  // namespace

TEST_CASE("contingency counts one response per cell") {
  const auto ds = dataset_with_cells(1, 1, 1, 1, 1, 1);
  const auto t = build_contingency(ds);
  CHECK(t.a == 1);
  CHECK(t.b == 1);
  CHECK(t.c == 1);
  CHECK(t.d == 1);
  CHECK(t.e == 1);
  CHECK(t.f == 1);
}

TEST_CASE("contingency of an empty dataset is all zeros") {
  const auto t = build_contingency(StudyDataset{});
  CHECK(t.a + t.b + t.c + t.d + t.e + t.f == 0);
}

TEST_CASE("contingency refuses unsuitable responses") {
  StudyDataset ds;
  Response r;
  r.examiner_id = "E";
  r.item_id = "I";
  r.canonical = Conclusion::Unsuitable;
  ds.responses.push_back(r);
  CHECK_THROWS_AS(build_contingency(ds), Error);
}

TEST_CASE("contingency matches a brute-force recount on random data") {
  std::mt19937 gen(42);
  std::uniform_int_distribution<int> gt_dist(0, 1), concl_dist(0, 2);
  StudyDataset ds;
  std::uint64_t oracle[2][3] = {};
  for (int k = 0; k < 200; ++k) {
    const int gt = gt_dist(gen);
    const int concl = concl_dist(gen);
    oracle[gt][concl]++;
    Response r;
    r.examiner_id = "E" + std::to_string(k);
    r.item_id = (gt == 0 ? "S" : "D") + std::to_string(k);
    r.ground_truth = gt == 0 ? GroundTruth::SameSource : GroundTruth::DifferentSource;
    r.canonical = concl == 0   ? Conclusion::Identification
                  : concl == 1 ? Conclusion::Inconclusive
                               : Conclusion::Exclusion;
    ds.responses.push_back(std::move(r));
  }
  const auto t = build_contingency(ds);
  CHECK(t.a == oracle[0][0]);
  CHECK(t.b == oracle[0][1]);
  CHECK(t.c == oracle[0][2]);
  CHECK(t.d == oracle[1][0]);
  CHECK(t.e == oracle[1][1]);
  CHECK(t.f == oracle[1][2]);
  CHECK(t.same_source_total() == oracle[0][0] + oracle[0][1] + oracle[0][2]);
}

TEST_CASE("conclusive summary reproduces the published study margins") {
  // latent prints: SS 4314 conclusive / 7264 not, DS 3953 / 1590
  auto ds = dataset_with_cells(4314, 7264, 0, 3953, 1590, 0);
  auto s = summarize_conclusive(ds);
  REQUIRE(s.p_same_source_given_not_conclusive.has_value());
  CHECK(*s.p_same_source_given_not_conclusive == Rational(7264, 8854));
  CHECK(s.p_same_source_given_not_conclusive->value() ==
        doctest::Approx(0.82).epsilon(0.01));

  // bullets: SS 1117 / 312, DS 981 / 1910
  ds = dataset_with_cells(1117, 312, 0, 981, 1910, 0);
  s = summarize_conclusive(ds);
  CHECK(*s.p_same_source_given_not_conclusive == Rational(312, 2222));
  CHECK(s.p_same_source_given_not_conclusive->value() ==
        doctest::Approx(0.14).epsilon(0.01));
}

TEST_CASE("conclusive probability is undefined without non-conclusive responses") {
  const auto s = summarize_conclusive(dataset_with_cells(5, 0, 2, 1, 0, 9));
  CHECK_FALSE(s.p_same_source_given_not_conclusive.has_value());
}

TEST_CASE("all four options agree when there are no inconclusives") {
  const ContingencyTable t{90, 0, 2, 1, 0, 79};
  const auto base = rates(t, RateOption::Ignored);
  for (auto option : {RateOption::Correct, RateOption::HalfCredit, RateOption::Incorrect}) {
    const auto rs = rates(t, option);
    CHECK(*rs.fpr == *base.fpr);
    CHECK(*rs.fnr == *base.fnr);
  }
}

TEST_CASE("rates reproduce the hand-computed table exactly") {
  // (a..f) = (90,8,2,1,20,79); expected fractions worked out by hand
  const ContingencyTable t{90, 8, 2, 1, 20, 79};
  const auto ignored = rates(t, RateOption::Ignored);
  CHECK(*ignored.fpr == Rational(1, 80));
  CHECK(*ignored.fnr == Rational(1, 46));  // 2/92
  const auto correct = rates(t, RateOption::Correct);
  CHECK(*correct.fpr == Rational(1, 100));
  CHECK(*correct.fnr == Rational(1, 50));  // 2/100
  const auto half = rates(t, RateOption::HalfCredit);
  CHECK(*half.fpr == Rational(11, 100));  // (1 + 10)/100
  CHECK(*half.fnr == Rational(3, 50));    // (2 + 4)/100
  const auto incorrect = rates(t, RateOption::Incorrect);
  CHECK(*incorrect.fpr == Rational(21, 100));
  CHECK(*incorrect.fnr == Rational(1, 10));  // 10/100
}

TEST_CASE("rates handle zero denominators as absent") {
  const ContingencyTable t{0, 3, 0, 0, 4, 0};
  const auto rs = rates(t, RateOption::Ignored);
  CHECK_FALSE(rs.fpr.has_value());
  CHECK_FALSE(rs.fnr.has_value());
  const auto correct = rates(t, RateOption::Correct);
  CHECK(correct.fpr->value() == 0.0);
}

TEST_CASE("option ordering holds for random tables") {
  std::mt19937 gen(7);
  std::uniform_int_distribution<std::uint64_t> cell(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const ContingencyTable t{cell(gen), cell(gen), cell(gen),
                             cell(gen), cell(gen), cell(gen)};
    const auto correct = rates(t, RateOption::Correct);
    const auto half = rates(t, RateOption::HalfCredit);
    const auto incorrect = rates(t, RateOption::Incorrect);
    const auto ignored = rates(t, RateOption::Ignored);
    if (correct.fpr) {
      CHECK(*correct.fpr <= *half.fpr);
      CHECK(*half.fpr <= *incorrect.fpr);
    }
    if (correct.fnr) {
      CHECK(*correct.fnr <= *half.fnr);
      CHECK(*half.fnr <= *incorrect.fnr);
    }
    // the Ignored rate never undershoots the Correct rate
    if (ignored.fpr && correct.fpr) CHECK(*correct.fpr <= *ignored.fpr);
    if (ignored.fnr && correct.fnr) CHECK(*correct.fnr <= *ignored.fnr);
  }
}

TEST_CASE("rates are invariant under uniform scaling of the cells") {
  const ContingencyTable t{9, 4, 1, 2, 11, 30};
  const ContingencyTable scaled{27, 12, 3, 6, 33, 90};
  for (auto option : {RateOption::Ignored, RateOption::Correct, RateOption::HalfCredit,
                      RateOption::Incorrect}) {
    CHECK(*rates(t, option).fpr == *rates(scaled, option).fpr);
    CHECK(*rates(t, option).fnr == *rates(scaled, option).fnr);
  }
}

TEST_CASE("failure rate interpolates the published rows") {
  CHECK(failure_rate(0.075, 0.548, 0.067) == doctest::Approx(0.106).epsilon(0.01));
  CHECK(failure_rate(0.001, 0.208, 0.200) == doctest::Approx(0.042).epsilon(0.02));
  CHECK(failure_rate(0.004, 1.000, 0.995) == doctest::Approx(0.995).epsilon(0.001));
}

TEST_CASE("failure rate endpoints recover the bounding rates") {
  CHECK(failure_rate(0.1, 0.7, 0.0) == 0.1);
  CHECK(failure_rate(0.1, 0.7, 1.0) == 0.7);
}

TEST_CASE("failure rate is monotone in the ratio") {
  double prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.05) {
    const double v = failure_rate(0.02, 0.63, r);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("failure rate agrees with its count form") {
  // rate form from exact fractions vs (errors + r*inconclusives)/total
  const ContingencyTable t{90, 8, 2, 0, 0, 0};
  const double inc_correct = rates(t, RateOption::Correct).fnr->value();
  const double inc_incorrect = rates(t, RateOption::Incorrect).fnr->value();
  for (double r : {0.0, 0.25, 1.0 / 3.0, 0.5, 0.9, 1.0}) {
    const double by_rates = failure_rate(inc_correct, inc_incorrect, r);
    const double by_counts = failure_rate_counts(2, 8, 100, r);
    CHECK(std::fabs(by_rates - by_counts) < 1e-12);
  }
}

TEST_CASE("failure rate rejects out-of-order inputs") {
  CHECK_THROWS_AS(failure_rate(0.5, 0.2, 0.5), Error);
  CHECK_THROWS_AS(failure_rate(0.1, 0.9, 1.5), Error);
  CHECK_THROWS_AS(failure_rate(-0.1, 0.9, 0.5), Error);
  CHECK_THROWS_AS(failure_rate_counts(5, 10, 3, 0.5), Error);
}

TEST_CASE("sums partition the dataset by ground truth") {
  const auto ds = dataset_with_cells(12, 5, 3, 7, 9, 11);
  const auto t = build_contingency(ds);
  std::size_t ss = 0, total = ds.responses.size();
  for (const auto& r : ds.responses)
    if (r.ground_truth == GroundTruth::SameSource) ++ss;
  CHECK(t.same_source_total() == ss);
  CHECK(t.same_source_total() + t.different_source_total() == total);
}
