#include "fepl/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fepl/error.hpp"

namespace fepl {

namespace {

constexpr char kMagic[4] = {'F', 'E', 'P', 'L'};

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }

  std::string finish() {
    const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(out_.data()), static_cast<uInt>(out_.size()));
    u32(static_cast<std::uint32_t>(crc));
    return std::move(out_);
  }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(FormatError::Kind::kTruncated, "file is truncated");
  }

 private:
  std::string_view bytes_;
  std::size_t pos_{0};
};

void write_header(Writer& w, FileKind kind) {
  w.raw(kMagic, 4);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(kind));
}

// Validates magic, version, kind and checksum; returns a reader positioned
// at the payload, limited to the payload bytes.
Reader open_envelope(std::string_view bytes, FileKind kind) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(FormatError::Kind::kVersionMismatch, "not an FEPL file (bad magic bytes)");
  }
  Reader header(bytes.substr(4));
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion) {
    throw FormatError(FormatError::Kind::kVersionMismatch,
                      "unsupported format version " + std::to_string(version) + " (expected " +
                          std::to_string(kFormatVersion) + ")");
  }
  const std::uint32_t k = header.u32();
  if (k != static_cast<std::uint32_t>(kind)) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      kind == FileKind::kModel ? "file is not a model file" : "file is not a dataset file");
  }
  if (bytes.size() < 16) throw FormatError(FormatError::Kind::kTruncated, "file is truncated");
  return Reader(bytes.substr(12));
}

void verify_trailer(std::string_view bytes, const Reader& payload) {
  if (payload.remaining() < 4) throw FormatError(FormatError::Kind::kTruncated, "file is truncated");
  if (payload.remaining() > 4) throw FormatError(FormatError::Kind::kCorrupt, "trailing bytes after payload");
  const std::size_t body = 12 + payload.position();
  Reader tail(bytes.substr(body));
  const std::uint32_t stored = tail.u32();
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(body));
  if (stored != static_cast<std::uint32_t>(crc)) {
    throw FormatError(FormatError::Kind::kChecksumMismatch, "checksum mismatch");
  }
}

void write_layer(Writer& w, const LayerSpec& l) {
  w.u32(static_cast<std::uint32_t>(l.kind));
  w.u32(static_cast<std::uint32_t>(l.in));
  w.u32(static_cast<std::uint32_t>(l.out));
  w.u32(static_cast<std::uint32_t>(l.kernel));
  w.u32(static_cast<std::uint32_t>(l.stride));
  w.u32(static_cast<std::uint32_t>(l.padding));
  w.u32(static_cast<std::uint32_t>(l.activation));
}

LayerSpec read_layer(Reader& r) {
  LayerSpec l;
  const std::uint32_t kind = r.u32();
  if (kind > 2) throw FormatError(FormatError::Kind::kCorrupt, "unknown layer kind");
  l.kind = static_cast<LayerKind>(kind);
  l.in = static_cast<int>(r.u32());
  l.out = static_cast<int>(r.u32());
  l.kernel = static_cast<int>(r.u32());
  l.stride = static_cast<int>(r.u32());
  l.padding = static_cast<int>(r.u32());
  const std::uint32_t act = r.u32();
  if (act > 1) throw FormatError(FormatError::Kind::kCorrupt, "unknown activation");
  l.activation = static_cast<Activation>(act);
  return l;
}

// Caps prevent absurd allocations from corrupt length fields.
constexpr std::uint32_t kMaxLayers = 1024;

std::vector<LayerSpec> read_layers(Reader& r) {
  const std::uint32_t n = r.u32();
  if (n > kMaxLayers) throw FormatError(FormatError::Kind::kCorrupt, "layer count is implausible");
  std::vector<LayerSpec> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(read_layer(r));
  return out;
}

}  // namespace

std::string encode_model(const GenModel& model) {
  const Architecture& a = model.architecture();
  Writer w;
  write_header(w, FileKind::kModel);
  w.u32(static_cast<std::uint32_t>(a.input_dim));
  w.u32(static_cast<std::uint32_t>(a.dense.size()));
  for (const LayerSpec& l : a.dense) write_layer(w, l);
  w.u32(static_cast<std::uint32_t>(a.reshape_channels));
  w.u32(static_cast<std::uint32_t>(a.reshape_length));
  w.u32(static_cast<std::uint32_t>(a.conv.size()));
  for (const LayerSpec& l : a.conv) write_layer(w, l);
  w.u32(static_cast<std::uint32_t>(a.output_length));
  const auto params = model.parameters();
  w.u64(params.size());
  for (double p : params) w.f64(p);
  return w.finish();
}

GenModel decode_model(std::string_view bytes) {
  Reader r = open_envelope(bytes, FileKind::kModel);
  Architecture a;
  a.input_dim = static_cast<int>(r.u32());
  a.dense = read_layers(r);
  a.reshape_channels = static_cast<int>(r.u32());
  a.reshape_length = static_cast<int>(r.u32());
  a.conv = read_layers(r);
  a.output_length = static_cast<int>(r.u32());
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / 8) throw FormatError(FormatError::Kind::kTruncated, "file is truncated");
  std::vector<double> params(n);
  for (double& p : params) p = r.f64();
  verify_trailer(bytes, r);
  try {
    return GenModel(std::move(a), std::move(params));
  } catch (const ValidationError& e) {
    throw FormatError(FormatError::Kind::kCorrupt, std::string("invalid model: ") + e.what());
  }
}

std::string encode_dataset(const Dataset& data) {
  Writer w;
  write_header(w, FileKind::kDataset);
  w.u64(data.map_hash);
  w.f64(data.bounds.xmin);
  w.f64(data.bounds.ymin);
  w.f64(data.bounds.xmax);
  w.f64(data.bounds.ymax);
  w.u32(static_cast<std::uint32_t>(data.sensor.beam_count));
  w.f64(data.sensor.aperture);
  w.f64(data.sensor.max_range);
  w.f64(data.sensor.noise_sigma);
  w.f64(data.sensor.heading);
  w.u32(static_cast<std::uint32_t>(data.beam_count()));
  w.u64(data.records.size());
  for (const Record& rec : data.records) {
    w.f64(rec.pose.u);
    w.f64(rec.pose.v);
    for (float v : rec.scan) w.f32(v);
  }
  return w.finish();
}

Dataset decode_dataset(std::string_view bytes) {
  Reader r = open_envelope(bytes, FileKind::kDataset);
  Dataset d;
  d.map_hash = r.u64();
  d.bounds.xmin = r.f64();
  d.bounds.ymin = r.f64();
  d.bounds.xmax = r.f64();
  d.bounds.ymax = r.f64();
  d.sensor.beam_count = static_cast<int>(r.u32());
  d.sensor.aperture = r.f64();
  d.sensor.max_range = r.f64();
  d.sensor.noise_sigma = r.f64();
  d.sensor.heading = r.f64();
  const std::uint32_t b = r.u32();
  if (static_cast<int>(b) != d.sensor.beam_count) {
    throw FormatError(FormatError::Kind::kCorrupt, "beam count disagrees with sensor config");
  }
  const std::uint64_t n = r.u64();
  if (n > r.remaining() / (16 + 4ULL * b)) {
    throw FormatError(FormatError::Kind::kTruncated, "file is truncated");
  }
  d.records.resize(n);
  for (Record& rec : d.records) {
    rec.pose.u = r.f64();
    rec.pose.v = r.f64();
    rec.scan.resize(b);
    for (float& v : rec.scan) v = r.f32();
  }
  verify_trailer(bytes, r);
  return d;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write file '" + path.string() + "'");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing file '" + path.string() + "'");
}

void save_model(const GenModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}
GenModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }
void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  write_file(path, encode_dataset(data));
}
Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(read_file(path)); }

}  // namespace fepl
