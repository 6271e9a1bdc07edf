#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "fkbs/error.hpp"
#include "fkbs/evaluation.hpp"
#include "fkbs/fuzzy.hpp"
#include "support.hpp"

using namespace fkbs;

namespace {

AccuracyReport fixture(const std::string& name) {
  return report_from_percentages(load_percentage_table(testkit::source_dir() / "fixtures" / name));
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

bool has_note(const AccuracyReport& r, const std::string& needle) {
  for (const auto& n : r.notes) {
    if (n.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST(Confusion, PerfectClassifier) {
  ConfusionMatrix cm = ConfusionMatrix::emotions();
  for (int rep = 0; rep < 3; ++rep) {
    for (auto label : kEmotionNames) cm.accumulate(label, label);
  }
  const auto r = report(cm);
  for (double p : r.per_class) EXPECT_DOUBLE_EQ(p, 100.0);
  EXPECT_DOUBLE_EQ(r.overall, 100.0);
  EXPECT_DOUBLE_EQ(*r.micro_accuracy, 100.0);
}

TEST(Confusion, MacroAndMicroDiffer) {
  ConfusionMatrix cm({"a", "b"});
  for (int i = 0; i < 9; ++i) cm.accumulate("a", "a");
  cm.accumulate("a", "b");
  cm.accumulate("b", "a");
  const auto r = report(cm);
  EXPECT_DOUBLE_EQ(r.per_class[0], 90.0);
  EXPECT_DOUBLE_EQ(r.per_class[1], 0.0);
  EXPECT_DOUBLE_EQ(r.overall, 45.0);
  EXPECT_NEAR(*r.micro_accuracy, 900.0 / 11.0, 1e-12);
  for (const auto& row : r.percentages) EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 100.0, 1e-9);
}

TEST(Confusion, UnknownLabelAndEmptyRow) {
  ConfusionMatrix cm = ConfusionMatrix::emotions();
  try {
    cm.accumulate("anger", "boredom");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownLabel);
  }
  EXPECT_EQ(cm.total(), 0u);
  cm.accumulate("anger", "anger");
  try {
    report(cm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyRow);
    EXPECT_NE(std::string(e.what()).find("happiness"), std::string::npos);
  }
  EXPECT_THROW(ConfusionMatrix({"a", "a"}), Error);
}

TEST(Confusion, AccumulationIsAdditive) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pick(0, 5);
  ConfusionMatrix a = ConfusionMatrix::emotions();
  ConfusionMatrix b = ConfusionMatrix::emotions();
  ConfusionMatrix all = ConfusionMatrix::emotions();
  for (int i = 0; i < 3000; ++i) {
    const auto t = kEmotionNames[pick(rng)];
    const auto p = kEmotionNames[i % 7 == 0 ? pick(rng) : static_cast<std::size_t>(*all.index_of(t))];
    (i % 2 ? a : b).accumulate(t, p);
    all.accumulate(t, p);
  }
  a.merge(b);
  EXPECT_EQ(a, all);
  const auto ra = report(a);
  const auto rall = report(all);
  EXPECT_EQ(ra.percentages, rall.percentages);
  EXPECT_EQ(ra.overall, rall.overall);
}

TEST(Confusion, PermutingLabelsPermutesRowsAndKeepsOverall) {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> pick(0, 5);
  std::vector<std::string> labels(kEmotionNames.begin(), kEmotionNames.end());
  std::vector<std::string> shuffled = labels;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  ConfusionMatrix a(labels);
  ConfusionMatrix b(shuffled);
  for (int i = 0; i < 2000; ++i) {
    const auto& t = labels[pick(rng)];
    const auto& p = labels[pick(rng)];
    a.accumulate(t, p);
    b.accumulate(t, p);
  }
  const auto ra = report(a);
  const auto rb = report(b);
  EXPECT_NEAR(ra.overall, rb.overall, 1e-12);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t j = *b.index_of(labels[i]);
    EXPECT_DOUBLE_EQ(ra.per_class[i], rb.per_class[j]);
    for (std::size_t k = 0; k < labels.size(); ++k) {
      EXPECT_DOUBLE_EQ(ra.percentages[i][k], rb.percentages[j][*b.index_of(labels[k])]);
    }
  }
}

TEST(Fixtures, TableOneDiagonal) {
  const auto r = fixture("table1.tsv");
  EXPECT_EQ(r.per_class, (std::vector<double>{66.7, 50, 60, 63.5, 43.2, 53.3}));
  EXPECT_NEAR(r.overall, (66.7 + 50 + 60 + 63.5 + 43.2 + 53.3) / 6, 1e-12);
  EXPECT_NEAR(r.overall, 56.1, 0.1);
  EXPECT_EQ(r.stated_overall, 58.3);
  EXPECT_TRUE(has_note(r, "58.3"));
}

TEST(Fixtures, TableTwoDiagonal) {
  const auto r = fixture("table2.tsv");
  EXPECT_NEAR(r.overall, mean(r.per_class), 1e-12);
  EXPECT_NEAR(r.overall, 62.6, 0.1);
  EXPECT_EQ(r.stated_overall, 67.0);
  EXPECT_TRUE(has_note(r, "67"));
}

TEST(Fixtures, TableThreeDiagonal) {
  const auto r = fixture("table3.tsv");
  EXPECT_EQ(r.per_class, (std::vector<double>{98.3, 95.4, 92.1, 87.5, 90.2, 83.3}));
  EXPECT_NEAR(r.overall, 91.1, 0.1);
  EXPECT_FALSE(r.stated_overall);
  EXPECT_TRUE(has_note(r, "102.6"));
}

TEST(Fixtures, RenderedInFixtureOrder) {
  const std::string text = render_table(fixture("table1.tsv"));
  std::size_t pos = 0;
  for (const char* label : {"Ang.", "Hap.", "Sad", "Surp.", "Disg.", "Fear"}) {
    const auto at = text.find(label, pos);
    ASSERT_NE(at, std::string::npos) << label;
    pos = at;
  }
  EXPECT_NE(text.find("56.1"), std::string::npos);
  EXPECT_NE(text.find("58.3"), std::string::npos);
  EXPECT_NE(text.find("63.5"), std::string::npos);
}

TEST(Fixtures, ParserRejectsMalformedTables) {
  EXPECT_THROW(parse_percentage_table(""), Error);
  EXPECT_THROW(parse_percentage_table("\tAng.\tHap.\nAng.\t50\n"), Error);
  EXPECT_THROW(parse_percentage_table("\tAng.\tHap.\nAng.\t50\tx\nHap.\t1\t2\n"), Error);
}

TEST(Labels, ShortAndCanonicalForms) {
  EXPECT_EQ(short_label("anger"), "Ang.");
  EXPECT_EQ(short_label("surprise"), "Surp.");
  EXPECT_EQ(short_label("other"), "other");
  EXPECT_EQ(canonical_emotion_label("Disg."), "disgust");
  EXPECT_EQ(canonical_emotion_label("Surpr"), "surprise");
  EXPECT_EQ(canonical_emotion_label("fear"), "fear");
  EXPECT_FALSE(canonical_emotion_label("joy"));
}
