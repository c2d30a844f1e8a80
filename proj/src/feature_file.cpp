#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rgnet/dataio.hpp"
#include "rgnet/errors.hpp"

namespace rgnet {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

FeatureMatrix::FeatureMatrix(std::int64_t rows, std::int64_t cols)
    : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows * cols), 0.0f) {
  if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix shape");
}

FeatureMatrix::FeatureMatrix(std::int64_t rows, std::int64_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0) throw InvalidArgument("negative matrix shape");
  if (values_.size() != static_cast<std::size_t>(rows * cols)) {
    throw InvalidArgument("matrix payload does not match " + std::to_string(rows) + "x" + std::to_string(cols));
  }
}

std::span<float> FeatureMatrix::row(std::int64_t r) {
  return {values_.data() + r * cols_, static_cast<std::size_t>(cols_)};
}

std::span<const float> FeatureMatrix::row(std::int64_t r) const {
  return {values_.data() + r * cols_, static_cast<std::size_t>(cols_)};
}

bool FeatureMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

namespace {

constexpr std::array<char, 4> kMagic = {'R', 'G', 'F', 'T'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 4;

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(const char* bytes) {
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_feature_file(const FrameFeatureSequence& seq, const std::filesystem::path& path) {
  if (!seq.features.all_finite()) {
    throw FormatError(FormatErrorKind::NonFiniteValue, "refusing to write non-finite features for " + seq.video_id);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kFeatureFileVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.features.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(seq.features.cols()));
  put<float>(out, static_cast<float>(seq.fps));
  const auto& values = seq.features.values();
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw FormatError(FormatErrorKind::Io, "write failed for " + path.string());
}

FrameFeatureSequence read_feature_file(const std::filesystem::path& path, std::string video_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open feature file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError(FormatErrorKind::BadMagic, "bad magic in feature file " + path.string());
  }
  if (bytes.size() < kHeaderBytes) {
    throw FormatError(FormatErrorKind::TruncatedPayload, "truncated header in " + path.string());
  }
  const auto version = get<std::uint32_t>(bytes.data() + 4);
  if (version != kFeatureFileVersion) {
    throw FormatError(FormatErrorKind::VersionMismatch,
                      "feature file version " + std::to_string(version) + " != " + std::to_string(kFeatureFileVersion));
  }
  const auto rows = get<std::uint32_t>(bytes.data() + 8);
  const auto cols = get<std::uint32_t>(bytes.data() + 12);
  const auto fps = get<float>(bytes.data() + 16);
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (bytes.size() - kHeaderBytes != count * sizeof(float)) {
    throw FormatError(FormatErrorKind::TruncatedPayload,
                      "truncated payload: header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " but file carries " + std::to_string(bytes.size() - kHeaderBytes) + " payload bytes");
  }
  std::vector<float> values(count);
  std::memcpy(values.data(), bytes.data() + kHeaderBytes, count * sizeof(float));

  FrameFeatureSequence seq{std::move(video_id), static_cast<double>(fps),
                           FeatureMatrix(rows, cols, std::move(values))};
  if (!std::isfinite(fps) || !seq.features.all_finite()) {
    throw FormatError(FormatErrorKind::NonFiniteValue, "non-finite value in " + path.string());
  }
  return seq;
}

}  // namespace rgnet
