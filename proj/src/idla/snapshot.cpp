#include "idla/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <boost/crc.hpp>

namespace idla {

namespace {

constexpr char kMagic[8] = {'I', 'D', 'L', 'A', 'S', 'N', 'A', 'P'};
constexpr std::uint8_t kTagHeader = 1;
constexpr std::uint8_t kTagSites = 2;
constexpr std::uint8_t kTagEdges = 3;
constexpr std::uint8_t kTagTraces = 4;

class Writer {
 public:
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      buf.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    buf.push_back(static_cast<std::uint8_t>(v));
  }
  void zigzag(std::int64_t v) {
    varint((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63));
  }
  void section(std::uint8_t tag, const Writer& payload) {
    u8(tag);
    u64(payload.buf.size());
    buf.insert(buf.end(), payload.buf.begin(), payload.buf.end());
  }
  std::vector<std::uint8_t> buf;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  bool done() const noexcept { return pos_ == n_; }
  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p_[pos_++]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
    }
    corrupt("varint too long");
  }
  std::int64_t zigzag() {
    const std::uint64_t u = varint();
    return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
  }
  Reader sub(std::size_t len) {
    need(len);
    Reader r(p_ + pos_, len);
    pos_ += len;
    return r;
  }
  [[noreturn]] static void corrupt(const std::string& what) {
    throw Error(ErrorCode::io, "malformed snapshot: " + what);
  }

 private:
  void need(std::size_t k) const {
    if (n_ - pos_ < k) corrupt("section truncated");
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

std::int64_t coord_delta(const Site& s, const Site* prev, int i) {
  return static_cast<std::int64_t>(s[i]) - (prev ? static_cast<std::int64_t>((*prev)[i]) : 0);
}

}  // namespace

const char* build_mode_name(BuildMode m) noexcept {
  return m == BuildMode::level_ordered ? "level" : "time";
}

BuildMode parse_build_mode(const std::string& text) {
  if (text == "time") return BuildMode::time_ordered;
  if (text == "level") return BuildMode::level_ordered;
  throw Error(ErrorCode::config, "mode must be 'time' or 'level', got '" + text + "'");
}

std::uint64_t crc64(const std::uint8_t* data, std::size_t size) noexcept {
  boost::crc_optimal<64, 0x42F0E1EBA9EA3693ULL, 0xFFFFFFFFFFFFFFFFULL, 0xFFFFFFFFFFFFFFFFULL, true, true> crc;
  crc.process_bytes(data, size);
  return crc.checksum();
}

Snapshot capture(const SnapshotHeader& header, const GrowthResult& result) {
  Snapshot s;
  s.header = header;
  const auto& order = result.aggregate.order();
  if (result.traces.size() != order.size()) {
    throw Error(ErrorCode::invalid_argument, "snapshot capture needs one trace per site");
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    s.sites.push_back(order[i].site);
    s.emissions.push_back(order[i].emission);
    s.parents.push_back(order[i].parent);
    s.digests.push_back({result.traces[i].steps_taken, result.traces[i].radius});
  }
  return s;
}

Snapshot simulate(const SnapshotHeader& header) {
  check_dimension(header.dim);
  GrowthOptions opts;
  opts.step_budget = header.step_budget;
  opts.keep_traces = true;
  const GrowthResult res = header.mode == BuildMode::time_ordered
                               ? build_aggregate_forest(header.seed, header.dim, header.M, header.n, opts)
                               : build_ordered_aggregate(header.seed, header.dim, header.M, header.n, opts);
  return capture(header, res);
}

Aggregate to_aggregate(const Snapshot& snap) {
  Aggregate agg(snap.header.dim, DenseBox::for_strip(SourceBox::window(snap.header.dim, snap.header.M), snap.header.n));
  for (std::size_t i = 0; i < snap.size(); ++i) agg.insert(snap.sites[i], snap.emissions[i], snap.parents[i]);
  return agg;
}

std::vector<std::uint8_t> encode_snapshot(const Snapshot& snap) {
  const int d = snap.header.dim;
  Writer out;
  out.buf.insert(out.buf.end(), std::begin(kMagic), std::end(kMagic));
  out.u32(kSnapshotSchemaVersion);

  Writer head;
  head.u8(static_cast<std::uint8_t>(d));
  head.zigzag(snap.header.M);
  head.f64(snap.header.n);
  head.u64(snap.header.seed);
  head.u8(static_cast<std::uint8_t>(snap.header.mode));
  head.u64(snap.header.step_budget);
  head.varint(snap.size());
  out.section(kTagHeader, head);

  Writer sites;
  const Site* prev = nullptr;
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const Site& s = snap.sites[i];
    for (int k = 0; k < d; ++k) sites.zigzag(coord_delta(s, prev, k));
    prev = &s;
    const Emission& e = snap.emissions[i];
    for (int k = 1; k < d; ++k) sites.zigzag(e.source[k]);
    sites.f64(e.time);
    sites.varint(e.particle_index);
  }
  out.section(kTagSites, sites);

  Writer edges;
  for (auto p : snap.parents) edges.varint(static_cast<std::uint64_t>(static_cast<std::int64_t>(p) + 1));
  out.section(kTagEdges, edges);

  Writer traces;
  for (const auto& t : snap.digests) {
    traces.varint(t.steps);
    traces.varint(static_cast<std::uint64_t>(t.radius));
  }
  out.section(kTagTraces, traces);

  const std::uint64_t crc = crc64(out.buf.data(), out.buf.size());
  out.u64(crc);
  return out.buf;
}

Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t kPrefix = sizeof(kMagic) + 4;
  if (bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::io, "not a snapshot file (bad magic)");
  }
  if (bytes.size() < kPrefix + 8) throw Error(ErrorCode::checksum_mismatch, "snapshot truncated");
  const std::size_t body = bytes.size() - 8;
  Reader tail(bytes.data() + body, 8);
  if (tail.u64() != crc64(bytes.data(), body)) {
    throw Error(ErrorCode::checksum_mismatch, "snapshot checksum mismatch (file corrupted or truncated)");
  }
  Reader in(bytes.data() + sizeof(kMagic), body - sizeof(kMagic));
  const std::uint32_t version = in.u32();
  if (version != kSnapshotSchemaVersion) {
    throw Error(ErrorCode::schema_version_mismatch, "snapshot schema version " + std::to_string(version) +
                                                        " is not supported (expected " +
                                                        std::to_string(kSnapshotSchemaVersion) + ")");
  }

  Snapshot snap;
  std::uint64_t count = 0;
  bool seen[5] = {false, false, false, false, false};
  while (!in.done()) {
    const std::uint8_t tag = in.u8();
    const std::uint64_t len = in.u64();
    Reader sec = in.sub(static_cast<std::size_t>(len));
    if (tag < kTagHeader || tag > kTagTraces) continue;  // unknown sections are skipped
    if (seen[tag]) Reader::corrupt("duplicate section");
    if (tag != kTagHeader && !seen[kTagHeader]) Reader::corrupt("header section must come first");
    seen[tag] = true;
    const int d = snap.header.dim;
    switch (tag) {
      case kTagHeader: {
        snap.header.dim = sec.u8();
        check_dimension(snap.header.dim);
        snap.header.M = sec.zigzag();
        snap.header.n = sec.f64();
        snap.header.seed = sec.u64();
        const std::uint8_t mode = sec.u8();
        if (mode > 1) Reader::corrupt("unknown build mode");
        snap.header.mode = static_cast<BuildMode>(mode);
        snap.header.step_budget = sec.u64();
        count = sec.varint();
        if (count > (std::uint64_t{1} << 31)) Reader::corrupt("site count out of range");
        break;
      }
      case kTagSites: {
        std::array<std::int64_t, kMaxDim> cur{};
        for (std::uint64_t i = 0; i < count; ++i) {
          for (int k = 0; k < d; ++k) cur[static_cast<std::size_t>(k)] += sec.zigzag();
          snap.sites.push_back(Site::from_span(cur.data(), d));
          std::array<std::int64_t, kMaxDim> src{};
          for (int k = 1; k < d; ++k) src[static_cast<std::size_t>(k)] = sec.zigzag();
          Emission e;
          e.source = Source(Site::from_span(src.data(), d));
          e.time = sec.f64();
          e.particle_index = static_cast<std::uint32_t>(sec.varint());
          snap.emissions.push_back(e);
        }
        break;
      }
      case kTagEdges:
        for (std::uint64_t i = 0; i < count; ++i) {
          const std::uint64_t p = sec.varint();
          if (p > i) Reader::corrupt("parent index must precede its child");
          snap.parents.push_back(static_cast<std::int32_t>(p) - 1);
        }
        break;
      case kTagTraces:
        for (std::uint64_t i = 0; i < count; ++i) {
          TraceDigest t;
          t.steps = sec.varint();
          t.radius = static_cast<std::int64_t>(sec.varint());
          snap.digests.push_back(t);
        }
        break;
    }
    if (!sec.done()) Reader::corrupt("section has trailing bytes");
  }
  for (std::uint8_t t = kTagHeader; t <= kTagTraces; ++t)
    if (!seen[t]) Reader::corrupt("missing section " + std::to_string(t));
  return snap;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return {s.begin(), s.end()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file_bytes(path, {text.begin(), text.end()});
}

void save_snapshot(const Snapshot& snap, const std::string& path) { write_file_bytes(path, encode_snapshot(snap)); }

Snapshot load_snapshot(const std::string& path) { return decode_snapshot(read_file_bytes(path)); }

VerifyReport verify_snapshot(const Snapshot& snap) {
  const Snapshot fresh = simulate(snap.header);
  if (fresh.size() != snap.size()) {
    return {false, "site count " + std::to_string(snap.size()) + " but replay produced " +
                       std::to_string(fresh.size())};
  }
  for (std::size_t i = 0; i < snap.size(); ++i) {
    const std::string at = "insertion " + std::to_string(i) + ": ";
    if (fresh.sites[i] != snap.sites[i]) {
      return {false, at + "site " + snap.sites[i].to_string() + " vs replay " + fresh.sites[i].to_string()};
    }
    if (!(fresh.emissions[i] == snap.emissions[i])) return {false, at + "emission differs"};
    if (fresh.parents[i] != snap.parents[i]) return {false, at + "parent edge differs"};
    if (!(fresh.digests[i] == snap.digests[i])) return {false, at + "trace digest differs"};
  }
  if (encode_snapshot(fresh) != encode_snapshot(snap)) return {false, "re-encoded bytes differ"};
  return {true, ""};
}

}  // namespace idla
