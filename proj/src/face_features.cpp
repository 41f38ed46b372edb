#include "affect/face_features.hpp"

#include "affect/dsp.hpp"
#include "affect/error.hpp"
#include "affect/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace affect::face {

AuFeatureConfig AuFeatureConfig::default_30() {
  using N = Normalizer;
  AuFeatureConfig c;
  c.pairs = {
      {3, 21, N::Height, "left brow centre to upper eyelid"},
      {8, 28, N::Height, "right brow centre to upper eyelid"},
      {5, 23, N::Height, "left inner brow to inner eye corner"},
      {6, 26, N::Height, "right inner brow to inner eye corner"},
      {1, 20, N::Height, "left outer brow to outer eye corner"},
      {10, 29, N::Height, "right outer brow to outer eye corner"},
      {5, 6, N::Width, "inter-brow gap"},
      {21, 25, N::Height, "left eye openness, outer"},
      {22, 24, N::Height, "left eye openness, inner"},
      {27, 31, N::Height, "right eye openness, inner"},
      {28, 30, N::Height, "right eye openness, outer"},
      {20, 23, N::Width, "left eye width"},
      {26, 29, N::Width, "right eye width"},
      {32, 38, N::Width, "mouth width"},
      {35, 41, N::Height, "outer lip height"},
      {45, 48, N::Height, "upper to lower lip centre gap"},
      {44, 46, N::Width, "inner upper lip width"},
      {20, 32, N::Height, "left outer eye corner to mouth corner"},
      {29, 38, N::Height, "right outer eye corner to mouth corner"},
      {14, 32, N::Height, "nose tip to left mouth corner"},
      {14, 35, N::Height, "nose tip to upper lip centre"},
      {17, 35, N::Height, "nose base to upper lip centre"},
      {14, 41, N::Height, "nose tip to lower lip centre"},
      {15, 32, N::Height, "left nostril to mouth corner"},
      {19, 38, N::Height, "right nostril to mouth corner"},
      {1, 3, N::Height, "left brow arch"},
      {8, 10, N::Height, "right brow arch"},
      {5, 11, N::Height, "left inner brow to nose bridge"},
      {6, 11, N::Height, "right inner brow to nose bridge"},
      {15, 19, N::Width, "nostril width"},
  };
  return c;
}

std::vector<std::string> validate_config(const AuFeatureConfig& cfg) {
  std::vector<std::string> out;
  if (cfg.pairs.size() != kAuFeatures) out.push_back("AU config must have exactly 30 entries");
  for (std::size_t i = 0; i < cfg.pairs.size(); ++i) {
    const auto& p = cfg.pairs[i];
    const bool ok = p.index_a >= 1 && p.index_a <= static_cast<int>(kLandmarkPoints) && p.index_b >= 1 &&
                    p.index_b <= static_cast<int>(kLandmarkPoints) && p.index_a != p.index_b;
    if (!ok) out.push_back("AU entry " + std::to_string(i + 1) + " has invalid indices");
  }
  return out;
}

AuFeatureConfig read_au_config_csv(const std::filesystem::path& path) {
  const std::string buf = text::read_file(path);
  text::LineReader lines(buf);
  std::string_view line;
  AuFeatureConfig cfg;
  bool header = false;
  while (lines.next(line)) {
    const auto s = text::trim(line);
    if (s.empty() || s.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const std::string where = path.filename().string() + ":" + std::to_string(lines.line_number());
    auto f = text::split(s);
    if (f.size() < 3) throw DataError(where + ": rows must be index_a,index_b,normalizer,comment");
    AuPair p;
    p.index_a = static_cast<int>(text::parse_double(f[0], where));
    p.index_b = static_cast<int>(text::parse_double(f[1], where));
    const auto norm = text::trim(f[2]);
    if (norm == "width") {
      p.normalizer = Normalizer::Width;
    } else if (norm == "height") {
      p.normalizer = Normalizer::Height;
    } else {
      throw DataError(where + ": normalizer must be width or height");
    }
    // The comment may itself contain commas.
    const std::size_t prefix = static_cast<std::size_t>(f[2].data() + f[2].size() - s.data());
    if (prefix < s.size()) p.comment = std::string(text::trim(s.substr(prefix + 1)));
    cfg.pairs.push_back(std::move(p));
  }
  const auto problems = validate_config(cfg);
  if (!problems.empty()) throw DataError(path.string() + ": " + problems.front());
  return cfg;
}

void write_au_config_csv(const AuFeatureConfig& cfg, const std::filesystem::path& path) {
  std::string out = "index_a,index_b,normalizer,comment\n";
  for (const auto& p : cfg.pairs) {
    out += std::to_string(p.index_a) + "," + std::to_string(p.index_b) + "," +
           (p.normalizer == Normalizer::Width ? "width" : "height") + "," + p.comment + "\n";
  }
  text::write_file(path, out);
}

FaceBox face_box(const LandmarkFrame& f) {
  if (f.points.empty()) throw std::invalid_argument("face_box: no landmarks");
  double x0 = f.points[0].x, x1 = x0, y0 = f.points[0].y, y1 = y0;
  for (const auto& p : f.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  FaceBox b{x1 - x0, y1 - y0};
  if (!(b.width > 0.0) || !(b.height > 0.0)) {
    throw std::invalid_argument("face_box: degenerate landmark bounding box");
  }
  return b;
}

std::vector<double> au_features_frame(const LandmarkFrame& f, const AuFeatureConfig& cfg) {
  if (f.points.size() != kLandmarkPoints) {
    throw std::invalid_argument("au_features_frame: expected 49 landmarks, got " +
                                std::to_string(f.points.size()));
  }
  const FaceBox box = face_box(f);
  std::vector<double> out;
  out.reserve(cfg.pairs.size());
  for (const auto& p : cfg.pairs) {
    const Point2& a = f.points.at(static_cast<std::size_t>(p.index_a - 1));
    const Point2& b = f.points.at(static_cast<std::size_t>(p.index_b - 1));
    const double d = std::hypot(a.x - b.x, a.y - b.y);
    out.push_back(d / (p.normalizer == Normalizer::Width ? box.width : box.height));
  }
  return out;
}

std::optional<FeatureVector> au_features_trial(const std::vector<LandmarkFrame>& frames,
                                               const AuFeatureConfig& cfg) {
  if (frames.empty()) return std::nullopt;
  const std::size_t nf = cfg.pairs.size();
  std::vector<std::vector<double>> per_feature(nf, std::vector<double>(frames.size()));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto v = au_features_frame(frames[i], cfg);
    for (std::size_t k = 0; k < nf; ++k) per_feature[k][i] = v[k];
  }
  FeatureVector fv;
  fv.values.resize(3 * nf);
  fv.names.resize(3 * nf);
  for (std::size_t k = 0; k < nf; ++k) {
    const auto st = dsp::summary_stats(per_feature[k]);
    const std::string id = "au" + std::to_string(k + 1);
    fv.names[k] = id + "_mean";
    fv.names[nf + k] = id + "_p95";
    fv.names[2 * nf + k] = id + "_std";
    fv.values[k] = st.mean;
    fv.values[nf + k] = st.p95;
    fv.values[2 * nf + k] = st.std;
  }
  return fv;
}

std::vector<double> aggregate_embeddings(const std::vector<EmbeddingFrame>& frames) {
  if (frames.empty()) throw std::invalid_argument("aggregate_embeddings: no frames");
  std::vector<double> out(kAggregateDim);
  std::vector<double> column(frames.size());
  for (std::size_t d = 0; d < kEmbeddingDim; ++d) {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i].vector.size() != kEmbeddingDim) {
        throw std::invalid_argument("aggregate_embeddings: frame with wrong embedding length");
      }
      column[i] = frames[i].vector[d];
    }
    const auto st = dsp::summary_stats(column);
    out[d] = st.mean;
    out[kEmbeddingDim + d] = st.p95;
    out[2 * kEmbeddingDim + d] = st.std;
  }
  return out;
}

FeatureVector face_embedding_features(const std::vector<double>& aggregate, const PcaModel& pca) {
  if (!pca.fitted()) throw std::invalid_argument("face_embedding_features: PCA model not fitted");
  const Matrix row = Eigen::Map<const Matrix>(aggregate.data(), 1, static_cast<Eigen::Index>(aggregate.size()));
  const Matrix y = pca_transform(pca, row);
  FeatureVector fv;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    fv.names.push_back("face_pc" + std::to_string(k + 1));
    fv.values.push_back(y(0, k));
  }
  return fv;
}

std::optional<FeatureVector> face_embedding_trial(const std::vector<EmbeddingFrame>& frames,
                                                  const PcaModel& pca) {
  if (frames.empty()) return std::nullopt;
  return face_embedding_features(aggregate_embeddings(frames), pca);
}

}  // namespace affect::face
