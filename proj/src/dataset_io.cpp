#include "affect/dataset_io.hpp"

#include "affect/error.hpp"
#include "affect/parallel.hpp"
#include "affect/text.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <set>

namespace affect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string ctx(const fs::path& p, std::size_t line) {
  return p.filename().string() + ":" + std::to_string(line);
}

// Reads the numeric rows of a CSV with a header line, skipping '#' comments.
// Returns header column count; rows are appended to `rows` flat.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::size_t cols{0};
  std::vector<double> values;  // row-major
  std::size_t rows{0};
};

CsvTable parse_numeric_csv(const std::string& buf, const fs::path& path) {
  CsvTable t;
  text::LineReader lines(buf);
  std::string_view line;
  bool have_header = false;
  while (lines.next(line)) {
    const std::string_view s = text::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      t.comments.emplace_back(s.substr(1));
      continue;
    }
    if (!have_header) {
      for (auto h : text::split(s)) t.header.emplace_back(text::trim(h));
      t.cols = t.header.size();
      have_header = true;
      continue;
    }
    const auto fields = text::split(s);
    if (fields.size() != t.cols) {
      throw DataError(ctx(path, lines.line_number()) + ": expected " + std::to_string(t.cols) +
                      " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) t.values.push_back(text::parse_double(f, ctx(path, lines.line_number())));
    ++t.rows;
  }
  if (!have_header) throw DataError(path.string() + ": missing header row");
  return t;
}

Ratings parse_ratings(const json& j, const std::string& where) {
  if (!j.is_object()) throw DataError("manifest: " + where + " must be an object");
  Ratings r;
  try {
    r.valence = j.at("valence").get<double>();
    r.arousal = j.at("arousal").get<double>();
    r.liking = j.at("liking").get<double>();
    r.dominance = j.at("dominance").get<double>();
  } catch (const json::exception& e) {
    throw DataError("manifest: " + where + ": " + e.what());
  }
  return r;
}

json ratings_json(const Ratings& r) {
  return {{"valence", r.valence}, {"arousal", r.arousal}, {"liking", r.liking}, {"dominance", r.dominance}};
}

void truncate_to(SignalBlock& s, double duration_s) {
  const auto keep = static_cast<std::size_t>(std::llround(duration_s * s.sample_rate_hz));
  if (s.n_samples() <= keep) return;
  for (auto& ch : s.samples) ch.resize(keep);
}

struct PendingTrial {
  TrialRecord trial;
  std::optional<std::string> eeg, ecg, gsr, landmarks, embeddings;
  std::vector<std::string> warnings;
  std::optional<std::string> rejection;
};

std::optional<std::string> optional_path(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw DataError(std::string("manifest: '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

void load_trial_files(PendingTrial& p, const fs::path& base, const ValidationOptions& vopts) {
  auto& t = p.trial;
  const std::string key = t.key();
  auto resolve = [&](const std::optional<std::string>& rel, const char* what) -> std::optional<fs::path> {
    if (!rel) return std::nullopt;
    fs::path full = fs::path(*rel).is_absolute() ? fs::path(*rel) : base / *rel;
    if (!fs::exists(full)) {
      p.warnings.push_back(key + ": " + what + " file missing (" + full.string() + "), modality omitted");
      return std::nullopt;
    }
    return full;
  };
  try {
    if (auto f = resolve(p.eeg, "eeg")) t.eeg = read_signal_csv(*f, Modality::EEG);
    if (auto f = resolve(p.ecg, "ecg")) t.ecg = read_signal_csv(*f, Modality::ECG);
    if (auto f = resolve(p.gsr, "gsr")) t.gsr = read_signal_csv(*f, Modality::GSR);
    if (auto f = resolve(p.landmarks, "landmarks")) t.landmarks = read_landmarks_csv(*f);
    if (auto f = resolve(p.embeddings, "embeddings")) t.face_embeddings = read_embeddings_csv(*f);
  } catch (const DataError& e) {
    p.rejection = key + ": unparseable file: " + e.what();
    return;
  }

  for (auto* s : {&t.eeg, &t.ecg, &t.gsr}) {
    if (*s && std::abs((*s)->duration_s() - t.duration_s) <= vopts.duration_tolerance_s) {
      truncate_to(**s, t.duration_s);
    }
  }

  const auto findings = validate_trial(t, vopts);
  if (!findings.empty()) {
    std::string why;
    for (const auto& f : findings) why += (why.empty() ? "" : "; ") + f.code + " (" + f.detail + ")";
    p.rejection = key + ": " + why;
  }
}

}  // namespace

Dataset load_manifest(const fs::path& path, const LoadOptions& opts, LoadReport* report) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("trials") || !doc.at("trials").is_array()) {
    throw DataError("manifest " + path.string() + ": expected an object with a \"trials\" array");
  }

  std::vector<PendingTrial> pending;
  std::set<std::string> seen;
  for (const auto& jt : doc.at("trials")) {
    if (!jt.is_object()) throw DataError("manifest: trial entries must be objects");
    PendingTrial p;
    auto& t = p.trial;
    try {
      t.subject_id = jt.at("subject_id").get<std::string>();
      t.video_id = jt.at("video_id").get<std::string>();
      t.duration_s = jt.at("duration_s").get<double>();
      t.ratings_pre = parse_ratings(jt.at("ratings_pre"), "ratings_pre");
      t.ratings_post = parse_ratings(jt.at("ratings_post"), "ratings_post");
    } catch (const json::exception& e) {
      throw DataError(std::string("manifest: malformed trial entry: ") + e.what());
    }
    for (const std::string* id : {&t.subject_id, &t.video_id}) {
      if (id->empty() || id->find_first_of("/\\,:\"") != std::string::npos) {
        throw DataError("manifest: trial id \"" + *id + "\" must be non-empty without / \\ , : or quotes");
      }
    }
    if (!seen.insert(t.key()).second) throw DataError("manifest: duplicate trial " + t.key());
    p.eeg = optional_path(jt, "eeg_csv");
    p.ecg = optional_path(jt, "ecg_csv");
    p.gsr = optional_path(jt, "gsr_csv");
    p.landmarks = optional_path(jt, "landmarks_csv");
    p.embeddings = optional_path(jt, "embeddings_csv");
    if (!ratings_in_range(t.ratings_pre) || !ratings_in_range(t.ratings_post)) {
      p.rejection = t.key() + ": rating-out-of-range";
    }
    pending.push_back(std::move(p));
  }

  const fs::path base = path.parent_path();
  parallel_for(pending.size(), opts.threads, [&](std::size_t i) {
    if (!pending[i].rejection) load_trial_files(pending[i], base, opts.validation);
  });

  Dataset d;
  d.manifest_path = path.string();
  for (auto& p : pending) {
    if (report) report->warnings.insert(report->warnings.end(), p.warnings.begin(), p.warnings.end());
    if (p.rejection) {
      if (report) report->rejected.push_back(*p.rejection);
      continue;
    }
    d.trials.push_back(std::move(p.trial));
  }
  return d;
}

fs::path write_dataset(const Dataset& d, const fs::path& dir) {
  fs::create_directories(dir);
  json trials = json::array();
  for (const auto& t : d.trials) {
    const std::string stem = t.subject_id + "_" + t.video_id;
    json jt = {{"subject_id", t.subject_id},
               {"video_id", t.video_id},
               {"duration_s", t.duration_s},
               {"ratings_pre", ratings_json(t.ratings_pre)},
               {"ratings_post", ratings_json(t.ratings_post)}};
    if (t.eeg) {
      write_signal_csv(*t.eeg, dir / (stem + "_eeg.csv"));
      jt["eeg_csv"] = stem + "_eeg.csv";
    }
    if (t.ecg) {
      write_signal_csv(*t.ecg, dir / (stem + "_ecg.csv"));
      jt["ecg_csv"] = stem + "_ecg.csv";
    }
    if (t.gsr) {
      write_signal_csv(*t.gsr, dir / (stem + "_gsr.csv"));
      jt["gsr_csv"] = stem + "_gsr.csv";
    }
    if (t.landmarks) {
      write_landmarks_csv(*t.landmarks, dir / (stem + "_landmarks.csv"));
      jt["landmarks_csv"] = stem + "_landmarks.csv";
    }
    if (t.face_embeddings) {
      write_embeddings_csv(*t.face_embeddings, dir / (stem + "_embeddings.csv"));
      jt["embeddings_csv"] = stem + "_embeddings.csv";
    }
    trials.push_back(std::move(jt));
  }
  const fs::path manifest = dir / "manifest.json";
  text::write_file(manifest, json{{"trials", trials}}.dump(1) + "\n");
  return manifest;
}

SignalBlock read_signal_csv(const fs::path& path, Modality modality) {
  const std::string buf = text::read_file(path);
  const CsvTable t = parse_numeric_csv(buf, path);
  SignalBlock s;
  s.modality = modality;
  bool rate_found = false;
  for (const auto& c : t.comments) {
    const auto body = text::trim(c);
    if (body.rfind("rate_hz=", 0) == 0) {
      s.sample_rate_hz = text::parse_double(body.substr(8), path.filename().string() + ": rate_hz");
      rate_found = true;
    }
  }
  if (!rate_found) throw DataError(path.string() + ": missing '# rate_hz=' comment");
  s.samples.assign(t.cols, std::vector<double>(t.rows));
  for (std::size_t r = 0; r < t.rows; ++r) {
    for (std::size_t c = 0; c < t.cols; ++c) s.samples[c][r] = t.values[r * t.cols + c];
  }
  return s;
}

void write_signal_csv(const SignalBlock& s, const fs::path& path) {
  std::string out = "# rate_hz=" + text::format_double(s.sample_rate_hz) + "\n";
  for (std::size_t c = 0; c < s.channel_count(); ++c) {
    out += (c ? ",ch" : "ch") + std::to_string(c + 1);
  }
  out += '\n';
  out.reserve(out.size() + s.n_samples() * s.channel_count() * 8);
  for (std::size_t i = 0; i < s.n_samples(); ++i) {
    for (std::size_t c = 0; c < s.channel_count(); ++c) {
      if (c) out += ',';
      text::append_double(out, s.samples[c][i]);
    }
    out += '\n';
  }
  text::write_file(path, out);
}

std::vector<LandmarkFrame> read_landmarks_csv(const fs::path& path) {
  const CsvTable t = parse_numeric_csv(text::read_file(path), path);
  if (t.cols < 1 || t.header[0] != "t_s" || (t.cols - 1) % 2 != 0) {
    throw DataError(path.string() + ": landmarks header must be t_s,x1,y1,...");
  }
  std::vector<LandmarkFrame> frames(t.rows);
  const std::size_t n_points = (t.cols - 1) / 2;
  for (std::size_t r = 0; r < t.rows; ++r) {
    const double* row = t.values.data() + r * t.cols;
    frames[r].t_s = row[0];
    frames[r].points.resize(n_points);
    for (std::size_t p = 0; p < n_points; ++p) frames[r].points[p] = {row[1 + 2 * p], row[2 + 2 * p]};
  }
  return frames;
}

void write_landmarks_csv(const std::vector<LandmarkFrame>& frames, const fs::path& path) {
  std::string out = "t_s";
  for (std::size_t p = 1; p <= kLandmarkPoints; ++p) {
    out += ",x" + std::to_string(p) + ",y" + std::to_string(p);
  }
  out += '\n';
  for (const auto& f : frames) {
    text::append_double(out, f.t_s);
    for (const auto& p : f.points) {
      out += ',';
      text::append_double(out, p.x);
      out += ',';
      text::append_double(out, p.y);
    }
    out += '\n';
  }
  text::write_file(path, out);
}

std::vector<EmbeddingFrame> read_embeddings_csv(const fs::path& path) {
  const CsvTable t = parse_numeric_csv(text::read_file(path), path);
  if (t.cols < 2 || t.header[0] != "t_s") {
    throw DataError(path.string() + ": embeddings header must be t_s,e1,...");
  }
  std::vector<EmbeddingFrame> frames(t.rows);
  for (std::size_t r = 0; r < t.rows; ++r) {
    const double* row = t.values.data() + r * t.cols;
    frames[r].t_s = row[0];
    frames[r].vector.assign(row + 1, row + t.cols);
  }
  return frames;
}

void write_embeddings_csv(const std::vector<EmbeddingFrame>& frames, const fs::path& path) {
  std::string out = "t_s";
  for (std::size_t e = 1; e <= kEmbeddingDim; ++e) out += ",e" + std::to_string(e);
  out += '\n';
  for (const auto& f : frames) {
    text::append_double(out, f.t_s);
    for (double v : f.vector) {
      out += ',';
      text::append_double(out, v);
    }
    out += '\n';
  }
  text::write_file(path, out);
}

}  // namespace affect
