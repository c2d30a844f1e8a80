#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>
#include <json.hpp>

#include "rgnet/dataio.hpp"
#include "rgnet/errors.hpp"

namespace rgnet {

using nlohmann::json;

namespace {

constexpr double kAnnotationSlack_s = 0.5;

enum class RecordKind { Video, Query, Annotation };

RecordKind classify(const json& rec, std::size_t line) {
  if (rec.contains("type")) {
    const auto t = rec.at("type").get<std::string>();
    if (t == "video") return RecordKind::Video;
    if (t == "query") return RecordKind::Query;
    if (t == "annotation") return RecordKind::Annotation;
    throw DataError(DataErrorKind::Parse, "line " + std::to_string(line) + ": unknown record type '" + t + "'");
  }
  if (rec.contains("start_s")) return RecordKind::Annotation;
  if (rec.contains("video_id") && (rec.contains("fps") || rec.contains("duration_s"))) return RecordKind::Video;
  if (rec.contains("query_id")) return RecordKind::Query;
  throw DataError(DataErrorKind::Parse, "line " + std::to_string(line) + ": cannot classify manifest record");
}

FeatureMatrix inline_tokens(const json& rows, const std::string& query_id) {
  if (!rows.is_array() || rows.empty()) {
    throw DataError(DataErrorKind::Parse, "query " + query_id + ": tokens must be a non-empty list of vectors");
  }
  const auto cols = static_cast<std::int64_t>(rows.front().size());
  std::vector<float> values;
  values.reserve(rows.size() * static_cast<std::size_t>(cols));
  for (const auto& r : rows) {
    if (static_cast<std::int64_t>(r.size()) != cols) {
      throw DataError(DataErrorKind::Parse, "query " + query_id + ": ragged token matrix");
    }
    for (const auto& v : r) values.push_back(v.get<float>());
  }
  FeatureMatrix m(static_cast<std::int64_t>(rows.size()), cols, std::move(values));
  if (!m.all_finite()) throw NumericError("query " + query_id + ": non-finite token value");
  return m;
}

}  // namespace

void Dataset::reindex() {
  video_by_id_.clear();
  query_by_id_.clear();
  for (std::size_t i = 0; i < videos.size(); ++i) {
    if (!video_by_id_.emplace(videos[i].video_id, i).second) {
      throw DataError(DataErrorKind::DuplicateId, "duplicate video_id '" + videos[i].video_id + "'");
    }
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!query_by_id_.emplace(queries[i].query_id, i).second) {
      throw DataError(DataErrorKind::DuplicateId, "duplicate query_id '" + queries[i].query_id + "'");
    }
  }
  for (const auto& a : annotations) {
    const auto v = video_by_id_.find(a.video_id);
    if (v == video_by_id_.end()) {
      throw DataError(DataErrorKind::DanglingReference,
                      "annotation for query '" + a.query_id + "' references unknown video_id '" + a.video_id + "'");
    }
    if (!query_by_id_.contains(a.query_id)) {
      throw DataError(DataErrorKind::DanglingReference, "annotation references unknown query_id '" + a.query_id + "'");
    }
    const auto span = a.interval();
    const double duration = videos[v->second].duration_s();
    if (span.start() < -kAnnotationSlack_s || span.end() > duration + kAnnotationSlack_s) {
      throw DataError(DataErrorKind::Parse, "annotation for query '" + a.query_id + "' lies outside video '" +
                                                a.video_id + "' (duration " + std::to_string(duration) + " s)");
    }
  }
}

std::size_t Dataset::video_index(const std::string& video_id) const {
  const auto it = video_by_id_.find(video_id);
  if (it == video_by_id_.end()) {
    throw DataError(DataErrorKind::DanglingReference, "unknown video_id '" + video_id + "'");
  }
  return it->second;
}

std::size_t Dataset::query_index(const std::string& query_id) const {
  const auto it = query_by_id_.find(query_id);
  if (it == query_by_id_.end()) {
    throw DataError(DataErrorKind::DanglingReference, "unknown query_id '" + query_id + "'");
  }
  return it->second;
}

Dataset load_manifest(const std::filesystem::path& path, std::size_t workers) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  Dataset ds;
  struct PendingVideo {
    std::size_t line_no;
    json rec;
  };
  std::vector<PendingVideo> pending;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(DataErrorKind::Parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      switch (classify(rec, line_no)) {
        case RecordKind::Video:
          rec.at("video_id").get<std::string>();
          rec.at("feature_path").get<std::string>();
          pending.push_back({line_no, std::move(rec)});
          break;
        case RecordKind::Query: {
          QueryFeatures q;
          q.query_id = rec.at("query_id").get<std::string>();
          if (rec.contains("tokens")) {
            q.tokens = inline_tokens(rec.at("tokens"), q.query_id);
          } else {
            q.tokens = read_feature_file(base / rec.at("feature_path").get<std::string>(), q.query_id).features;
          }
          ds.queries.push_back(std::move(q));
          break;
        }
        case RecordKind::Annotation: {
          const double start = rec.at("start_s").get<double>();
          const double end = rec.at("end_s").get<double>();
          ds.annotations.push_back(Annotation{rec.at("query_id").get<std::string>(),
                                              rec.at("video_id").get<std::string>(),
                                              interval_to_moment(TimeInterval(start, end))});
          break;
        }
      }
    } catch (const json::exception& e) {
      throw DataError(DataErrorKind::Parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw DataError(DataErrorKind::Parse, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  // Feature files are read concurrently; results land by index so the
  // dataset order never depends on scheduling.
  ds.videos.resize(pending.size());
  std::vector<std::exception_ptr> failures(pending.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      try {
        const auto& rec = pending[i].rec;
        const auto id = rec.at("video_id").get<std::string>();
        auto seq = read_feature_file(base / rec.at("feature_path").get<std::string>(), id);
        if (rec.contains("fps")) {
          const double fps = rec.at("fps").get<double>();
          if (std::abs(fps - seq.fps) > 1e-6 * std::max(1.0, fps)) {
            throw DataError(DataErrorKind::Parse, "video '" + id + "': manifest fps disagrees with feature file");
          }
        }
        if (rec.contains("duration_s") &&
            std::abs(rec.at("duration_s").get<double>() - seq.duration_s()) > 1.0 / seq.fps) {
          throw DataError(DataErrorKind::Parse, "video '" + id + "': duration_s disagrees with frame count");
        }
        ds.videos[i] = std::move(seq);
      } catch (const json::exception& e) {
        failures[i] = std::make_exception_ptr(
            DataError(DataErrorKind::Parse, "manifest line " + std::to_string(pending[i].line_no) + ": " + e.what()));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(pending.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  ds.reindex();
  return ds;
}

std::filesystem::path write_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "features");
  const auto manifest = dir / "manifest.jsonl";
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot write " + manifest.string());
  for (const auto& v : dataset.videos) {
    const auto rel = std::filesystem::path("features") / (v.video_id + ".rgft");
    write_feature_file(v, dir / rel);
    out << json{{"type", "video"},
                {"video_id", v.video_id},
                {"feature_path", rel.string()},
                {"fps", v.fps},
                {"duration_s", v.duration_s()}}
               .dump()
        << '\n';
  }
  for (const auto& q : dataset.queries) {
    json rows = json::array();
    for (std::int64_t r = 0; r < q.tokens.rows(); ++r) {
      const auto row = q.tokens.row(r);
      rows.push_back(std::vector<float>(row.begin(), row.end()));
    }
    out << json{{"type", "query"}, {"query_id", q.query_id}, {"tokens", rows}}.dump() << '\n';
  }
  for (const auto& a : dataset.annotations) {
    const auto span = a.interval();
    out << json{{"type", "annotation"},
                {"query_id", a.query_id},
                {"video_id", a.video_id},
                {"start_s", span.start()},
                {"end_s", span.end()}}
               .dump()
        << '\n';
  }
  return manifest;
}

}  // namespace rgnet
