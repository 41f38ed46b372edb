#pragma once

#include "affect/types.hpp"

#include <array>
#include <string>

namespace affect {

inline constexpr double kNeutralRating = 5.0;

enum class Level { Low = 0, High = 1 };

// Circumplex quadrants: H/L valence x H/L arousal.
enum class Quadrant { HVHA = 0, LVHA = 1, LVLA = 2, HVLA = 3 };

// Counter-clockwise 45-degree sectors starting at the positive valence axis.
enum class Octant { Pleased = 0, Excited, Annoying, Nervous, Sad, Sleepy, Calm, Relaxed };

const char* level_name(Level l);
const char* quadrant_name(Quadrant q);
const char* octant_name(Octant o);

// clamp(post + (pre - 5), 1, 9)
double compensate_baseline(double pre, double post);

// High iff v >= 5.
Level binarize(double v);

Quadrant quadrant4(double valence, double arousal);

// Sector of atan2(arousal - 5, valence - 5) in [0, 360), lower edges
// inclusive. Evaluated with exact comparisons so sector edges (including
// the diagonals) are never misassigned by rounding. (5, 5) is Pleased.
Octant octant8(double valence, double arousal);

struct LabelSet {
  Ratings compensated;  // equals post when compensation is off
  Level valence{Level::Low};
  Level arousal{Level::Low};
  Level liking{Level::Low};
  Level dominance{Level::Low};
  Quadrant quadrant{Quadrant::HVHA};
  Octant octant{Octant::Pleased};
};

LabelSet make_labels(const Ratings& pre, const Ratings& post, bool compensate);

// Quadrant that contains an octant's open sector.
Quadrant octant_quadrant(Octant o);

}  // namespace affect
