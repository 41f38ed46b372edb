#include "affect/labels.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace affect;

TEST(Compensation, WorkedExample) { EXPECT_EQ(compensate_baseline(9, 2), 6.0); }

TEST(Compensation, NeutralBaselineIsIdentity) {
  for (double x = 1.0; x <= 9.0; x += 0.25) EXPECT_EQ(compensate_baseline(5, x), x);
}

TEST(Compensation, ClampsToScale) {
  EXPECT_EQ(compensate_baseline(9, 9), 9.0);
  EXPECT_EQ(compensate_baseline(1, 1), 1.0);
  EXPECT_EQ(compensate_baseline(1, 3), 1.0);
}

TEST(Compensation, RejectsOutOfRange) {
  EXPECT_THROW(compensate_baseline(0.5, 5), std::invalid_argument);
  EXPECT_THROW(compensate_baseline(5, 9.5), std::invalid_argument);
  EXPECT_THROW(compensate_baseline(std::nan(""), 5), std::invalid_argument);
}

TEST(Compensation, MonotoneInBothArguments) {
  for (double pre = 1; pre <= 9; pre += 0.5) {
    for (double post = 1; post <= 9; post += 0.5) {
      const double c = compensate_baseline(pre, post);
      EXPECT_GE(c, 1.0);
      EXPECT_LE(c, 9.0);
      if (pre + 0.5 <= 9) EXPECT_LE(c, compensate_baseline(pre + 0.5, post));
      if (post + 0.5 <= 9) EXPECT_LE(c, compensate_baseline(pre, post + 0.5));
    }
  }
}

TEST(Binarize, Examples) {
  EXPECT_EQ(binarize(5), Level::High);
  EXPECT_EQ(binarize(1), Level::Low);
  EXPECT_EQ(binarize(9), Level::High);
  EXPECT_EQ(binarize(4.99), Level::Low);
}

TEST(Quadrant, Examples) {
  EXPECT_EQ(quadrant4(7, 7), Quadrant::HVHA);
  EXPECT_EQ(quadrant4(2, 8), Quadrant::LVHA);
  EXPECT_EQ(quadrant4(5, 5), Quadrant::HVHA);
  EXPECT_EQ(quadrant4(2, 2), Quadrant::LVLA);
  EXPECT_EQ(quadrant4(8, 2), Quadrant::HVLA);
}

TEST(Octant, Examples) {
  EXPECT_EQ(octant8(9, 5), Octant::Pleased);
  EXPECT_EQ(octant8(5, 9), Octant::Annoying);
  EXPECT_EQ(octant8(3, 3), Octant::Sleepy);
  EXPECT_EQ(octant8(5, 5), Octant::Pleased);
  EXPECT_EQ(octant8(7, 7), Octant::Excited);
  EXPECT_EQ(octant8(1, 5), Octant::Sad);
  EXPECT_EQ(octant8(5, 1), Octant::Calm);
  EXPECT_EQ(octant8(7, 3), Octant::Relaxed);
  EXPECT_EQ(octant8(3, 7), Octant::Nervous);
}

TEST(Octant, TinyOffsetsFromDiagonal) {
  EXPECT_EQ(octant8(7, 7 - 1e-12), Octant::Pleased);
  EXPECT_EQ(octant8(7, 7 + 1e-12), Octant::Excited);
  EXPECT_EQ(octant8(5 + 1e-12, 9), Octant::Excited);
  EXPECT_EQ(octant8(5, 5 - 1e-12), Octant::Calm);
}

TEST(Octant, QuadrantConsistencyOffAxes) {
  for (int i = 0; i < 17; ++i) {
    for (int j = 0; j < 17; ++j) {
      const double v = 1 + 0.5 * i, a = 1 + 0.5 * j;
      if (v == 5 || a == 5) continue;
      EXPECT_EQ(octant_quadrant(octant8(v, a)), quadrant4(v, a)) << v << "," << a;
    }
  }
}

TEST(Octant, AxisBoundaryRules) {
  for (double t = 5.5; t <= 9; t += 0.5) {
    EXPECT_EQ(octant8(t, 5), Octant::Pleased);
    EXPECT_EQ(octant8(5, t), Octant::Annoying);
    EXPECT_EQ(octant8(10 - t, 5), Octant::Sad);
    EXPECT_EQ(octant8(5, 10 - t), Octant::Calm);
  }
}

TEST(Labels, GridSnapshot) {
  std::ifstream in(std::string(AFFECT_TEST_DATA) + "/label_grid.csv");
  ASSERT_TRUE(in);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "valence,arousal,valence_level,arousal_level,quadrant4,octant8");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<std::string> f;
    for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
    ASSERT_EQ(f.size(), 6u);
    const double v = std::stod(f[0]), a = std::stod(f[1]);
    EXPECT_EQ(level_name(binarize(v)), f[2]) << line;
    EXPECT_EQ(level_name(binarize(a)), f[3]) << line;
    EXPECT_EQ(quadrant_name(quadrant4(v, a)), f[4]) << line;
    EXPECT_EQ(octant_name(octant8(v, a)), f[5]) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 289);
}

TEST(Labels, WorkedExamplePerDimension) {
  const LabelSet l = make_labels({9, 9, 9, 9}, {2, 2, 2, 2}, true);
  EXPECT_EQ(l.compensated, (Ratings{6, 6, 6, 6}));
  EXPECT_EQ(l.valence, Level::High);
  EXPECT_EQ(l.arousal, Level::High);
  EXPECT_EQ(l.liking, Level::High);
  EXPECT_EQ(l.dominance, Level::High);
  EXPECT_EQ(l.quadrant, Quadrant::HVHA);
}

TEST(Labels, RawModeUsesPost) {
  const LabelSet l = make_labels({9, 9, 9, 9}, {2, 7, 4, 6}, false);
  EXPECT_EQ(l.compensated, (Ratings{2, 7, 4, 6}));
  EXPECT_EQ(l.valence, Level::Low);
  EXPECT_EQ(l.arousal, Level::High);
  EXPECT_EQ(l.liking, Level::Low);
  EXPECT_EQ(l.dominance, Level::High);
  EXPECT_EQ(l.quadrant, Quadrant::LVHA);
  EXPECT_EQ(l.octant, Octant::Nervous);
}

TEST(Labels, NeutralBaselineModesAgree) {
  const Ratings pre{5, 5, 5, 5};
  for (double v = 1; v <= 9; v += 1.5) {
    const Ratings post{v, 10 - v, 3, 8};
    const LabelSet a = make_labels(pre, post, true), b = make_labels(pre, post, false);
    EXPECT_EQ(a.compensated, b.compensated);
    EXPECT_EQ(a.quadrant, b.quadrant);
    EXPECT_EQ(a.octant, b.octant);
  }
}

TEST(Labels, QuadrantMatchesBinaryLevels) {
  for (double v = 1; v <= 9; v += 0.5) {
    for (double a = 1; a <= 9; a += 0.5) {
      const LabelSet l = make_labels({5, 5, 5, 5}, {v, a, 5, 5}, false);
      const bool hv = l.valence == Level::High, ha = l.arousal == Level::High;
      const Quadrant q = hv ? (ha ? Quadrant::HVHA : Quadrant::HVLA) : (ha ? Quadrant::LVHA : Quadrant::LVLA);
      EXPECT_EQ(l.quadrant, q);
    }
  }
}
