#include "affect/labels.hpp"

#include "affect/validate.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace affect {

namespace {

void require_rating(double v, const char* what) {
  if (!rating_in_range(v)) {
    throw std::invalid_argument(std::string(what) + " rating " + std::to_string(v) + " outside [1, 9]");
  }
}

}  // namespace

const char* level_name(Level l) { return l == Level::High ? "high" : "low"; }

const char* quadrant_name(Quadrant q) {
  static constexpr std::array<const char*, 4> names{"HVHA", "LVHA", "LVLA", "HVLA"};
  return names[static_cast<int>(q)];
}

const char* octant_name(Octant o) {
  static constexpr std::array<const char*, 8> names{"pleased", "excited", "annoying", "nervous",
                                                    "sad",     "sleepy",  "calm",     "relaxed"};
  return names[static_cast<int>(o)];
}

double compensate_baseline(double pre, double post) {
  require_rating(pre, "pre");
  require_rating(post, "post");
  return std::clamp(post + (pre - kNeutralRating), 1.0, 9.0);
}

Level binarize(double v) {
  require_rating(v, "binarize");
  return v >= kNeutralRating ? Level::High : Level::Low;
}

Quadrant quadrant4(double valence, double arousal) {
  const bool hv = binarize(valence) == Level::High;
  const bool ha = binarize(arousal) == Level::High;
  if (hv && ha) return Quadrant::HVHA;
  if (!hv && ha) return Quadrant::LVHA;
  if (!hv && !ha) return Quadrant::LVLA;
  return Quadrant::HVLA;
}

Octant octant8(double valence, double arousal) {
  require_rating(valence, "valence");
  require_rating(arousal, "arousal");
  const double v = valence - kNeutralRating;  // exact for ratings in [1, 9]
  const double a = arousal - kNeutralRating;
  if (v == 0.0 && a == 0.0) return Octant::Pleased;
  if (a > 0.0 || (a == 0.0 && v > 0.0)) {
    // theta in [0, 180)
    if (v > 0.0) return a < v ? Octant::Pleased : Octant::Excited;
    return a > -v ? Octant::Annoying : Octant::Nervous;  // theta = 90 lands here with v == 0
  }
  // theta in [180, 360)
  if (v < 0.0) return a > v ? Octant::Sad : Octant::Sleepy;
  return -a > v ? Octant::Calm : Octant::Relaxed;  // theta = 270 lands here with v == 0
}

Quadrant octant_quadrant(Octant o) {
  switch (o) {
    case Octant::Pleased:
    case Octant::Excited: return Quadrant::HVHA;
    case Octant::Annoying:
    case Octant::Nervous: return Quadrant::LVHA;
    case Octant::Sad:
    case Octant::Sleepy: return Quadrant::LVLA;
    case Octant::Calm:
    case Octant::Relaxed: return Quadrant::HVLA;
  }
  return Quadrant::HVHA;
}

LabelSet make_labels(const Ratings& pre, const Ratings& post, bool compensate) {
  LabelSet l;
  if (compensate) {
    l.compensated = {compensate_baseline(pre.valence, post.valence),
                     compensate_baseline(pre.arousal, post.arousal),
                     compensate_baseline(pre.liking, post.liking),
                     compensate_baseline(pre.dominance, post.dominance)};
  } else {
    l.compensated = post;
  }
  const Ratings& r = l.compensated;
  l.valence = binarize(r.valence);
  l.arousal = binarize(r.arousal);
  l.liking = binarize(r.liking);
  l.dominance = binarize(r.dominance);
  l.quadrant = quadrant4(r.valence, r.arousal);
  l.octant = octant8(r.valence, r.arousal);
  return l;
}

}  // namespace affect
