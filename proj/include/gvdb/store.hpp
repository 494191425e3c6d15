#pragma once

// On-disk layout of a store directory; see FORMAT.md for the byte layouts.

#include "gvdb/error.hpp"
#include "gvdb/store_data.hpp"

#include "json.hpp"
#include <zlib.h>

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <array>
#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace gvdb {

namespace fs = std::filesystem;

inline constexpr std::string_view kManifestFile = "manifest.json";

struct SectionName {
  std::string_view name;
  std::string_view file;
};

inline constexpr std::array<SectionName, 5> kSections{{
    {"node table", "nodes.bin"},
    {"edge table", "edges.bin"},
    {"level-0 R-tree", "rtree.l0.bin"},
    {"level-1 R-tree", "rtree.l1.bin"},
    {"label table", "labels.bin"},
}};

inline std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  const auto* p = reinterpret_cast<const Bytef*>(bytes.data());
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = ::crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace detail {

class ByteWriter {
public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void pad(std::size_t n) { buf_.append(n, '\0'); }
  void raw(std::string_view s) { buf_.append(s); }
  void rect(const Rect& r) {
    f64(r.x_min);
    f64(r.y_min);
    f64(r.x_max);
    f64(r.y_max);
  }

  std::string& bytes() { return buf_; }

private:
  std::string buf_;
};

class ByteReader {
public:
  ByteReader(std::string_view data, std::string section) : data_(data), section_(std::move(section)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<std::uint8_t>(data_[pos_ + i])} << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  Rect rect() {
    Rect r;
    r.x_min = f64();
    r.y_min = f64();
    r.x_max = f64();
    r.y_max = f64();
    return r;
  }
  void magic(std::string_view expected) {
    if (raw(expected.size()) != expected) fail("bad magic");
  }
  // Guards count * record_size against the remaining bytes before allocating.
  std::uint64_t count(std::size_t record_size) {
    const std::uint64_t n = u64();
    if (record_size > 0 && n > (data_.size() - pos_) / record_size) fail("record count exceeds section size");
    return n;
  }
  void finish() const {
    if (pos_ != data_.size()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const { throw StoreError(section_, what); }

private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) fail("truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
  std::string section_;
};

inline constexpr std::string_view kNodesMagic = "GVDBNODE";
inline constexpr std::string_view kEdgesMagic = "GVDBEDGE";
inline constexpr std::string_view kLabelsMagic = "GVDBLABL";
inline constexpr std::string_view kTree0Magic = "GVDBRTR0";
inline constexpr std::string_view kTree1Magic = "GVDBRTR1";

inline void write_tree(ByteWriter& w, const RTree& t) {
  w.u32(static_cast<std::uint32_t>(t.fanout()));
  w.u32(static_cast<std::uint32_t>(t.height()));
  w.u64(t.items().size());
  w.u64(t.nodes().size());
  for (const SpatialItem& it : t.items()) {
    w.u8(static_cast<std::uint8_t>(it.kind));
    w.pad(7);
    w.u64(it.id);
    w.f64(it.geometry.a.x);
    w.f64(it.geometry.a.y);
    w.f64(it.geometry.b.x);
    w.f64(it.geometry.b.y);
  }
  for (const RTreeNode& n : t.nodes()) {
    w.rect(n.box);
    w.u32(n.first);
    w.u32(n.count);
    w.u8(n.leaf ? 1 : 0);
    w.pad(7);
  }
}

inline RTree read_tree(ByteReader& r) {
  const std::uint32_t fanout = r.u32();
  const std::uint32_t height = r.u32();
  const std::uint64_t item_count = r.count(48);
  const std::uint64_t node_count = r.u64();
  if (fanout < 2) r.fail("invalid fanout");
  std::vector<SpatialItem> items;
  items.reserve(item_count);
  for (std::uint64_t i = 0; i < item_count; ++i) {
    const std::uint8_t kind = r.u8();
    r.skip(7);
    const std::uint64_t id = r.u64();
    const double ax = r.f64(), ay = r.f64(), bx = r.f64(), by = r.f64();
    if (kind == 0) {
      items.push_back(SpatialItem::node(id, {ax, ay}));
    } else if (kind == 1) {
      if (ax == bx && ay == by) r.fail("degenerate edge segment");
      items.push_back(SpatialItem::edge(id, {ax, ay}, {bx, by}));
    } else {
      r.fail("unknown item kind");
    }
  }
  std::vector<RTreeNode> nodes;
  for (std::uint64_t i = 0; i < node_count; ++i) {
    RTreeNode n;
    n.box = r.rect();
    n.first = r.u32();
    n.count = r.u32();
    n.leaf = r.u8() != 0;
    r.skip(7);
    nodes.push_back(n);
  }
  try {
    return RTree::from_parts(std::move(items), std::move(nodes), fanout, height);
  } catch (const ContractViolation& e) {
    r.fail(std::string("invalid tree: ") + e.what());
  }
}

inline std::string encode_nodes(const StoreData& s) {
  ByteWriter w;
  w.raw(kNodesMagic);
  w.u64(s.nodes.size());
  for (const NodeRecord& n : s.nodes) {
    w.f64(n.pos.x);
    w.f64(n.pos.y);
    w.u32(n.partition);
    w.u32(0);
  }
  return std::move(w.bytes());
}

inline std::string encode_edges(const StoreData& s) {
  ByteWriter w;
  w.raw(kEdgesMagic);
  w.u64(s.edges.size());
  for (const EdgeRecord& e : s.edges) {
    w.u64(e.src);
    w.u64(e.dst);
    w.u32(e.crossing ? 1u : 0u);
    w.u32(0);
  }
  return std::move(w.bytes());
}

inline std::string encode_labels(const StoreData& s) {
  ByteWriter w;
  w.raw(kLabelsMagic);
  w.u64(s.node_labels.size());
  w.u64(s.edge_labels.size());
  for (const std::string& l : s.node_labels) {
    w.u32(static_cast<std::uint32_t>(l.size()));
    w.raw(l);
  }
  for (const auto& l : s.edge_labels) {
    w.u32(l ? static_cast<std::uint32_t>(l->size()) : 0u);
    if (l) w.raw(*l);
  }
  return std::move(w.bytes());
}

inline std::string encode_level0(const StoreData& s) {
  ByteWriter w;
  w.raw(kTree0Magic);
  write_tree(w, s.level0);
  return std::move(w.bytes());
}

inline std::string encode_level1(const StoreData& s) {
  ByteWriter w;
  w.raw(kTree1Magic);
  write_tree(w, s.level1);
  w.u64(s.supernodes.size());
  for (const SuperNode& sn : s.supernodes) {
    w.u32(sn.partition);
    w.u32(0);
    w.f64(sn.centroid.x);
    w.f64(sn.centroid.y);
    w.u64(sn.member_count);
  }
  w.u64(s.superedges.size());
  for (const SuperEdge& se : s.superedges) {
    w.u32(se.a);
    w.u32(se.b);
    w.u64(se.weight);
  }
  return std::move(w.bytes());
}

inline nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["counts"] = {{"nodes", m.node_count},
                 {"edges", m.edge_count},
                 {"partitions", m.partition_count},
                 {"crossing_edges", m.crossing_count}};
  j["global_bbox"] = {{"x_min", m.global_bbox.x_min},
                      {"y_min", m.global_bbox.y_min},
                      {"x_max", m.global_bbox.x_max},
                      {"y_max", m.global_bbox.y_max}};
  const BuildParams& p = m.params;
  j["params"] = {{"k", p.k},
                 {"balance_eps", p.balance_eps},
                 {"edge_length", p.edge_length},
                 {"layout_iterations", p.layout_iterations},
                 {"margin", p.margin},
                 {"gap", p.gap},
                 {"partition_seed", p.partition_seed},
                 {"layout_seed", p.layout_seed},
                 {"rtree_fanout", p.rtree_fanout}};
  nlohmann::json sections = nlohmann::json::object();
  for (const auto& [name, info] : m.sections) {
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", info.crc32);
    sections[name] = {{"file", info.file}, {"bytes", info.bytes}, {"crc32", hex}};
  }
  j["sections"] = std::move(sections);
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kFormatVersion)
    throw VersionError("manifest", "unsupported format_version " + std::to_string(m.format_version) +
                                       " (this build reads " + std::to_string(kFormatVersion) + ")");
  const auto& c = j.at("counts");
  m.node_count = c.at("nodes").get<std::uint64_t>();
  m.edge_count = c.at("edges").get<std::uint64_t>();
  m.partition_count = c.at("partitions").get<std::uint64_t>();
  m.crossing_count = c.at("crossing_edges").get<std::uint64_t>();
  const auto& b = j.at("global_bbox");
  m.global_bbox = {b.at("x_min").get<double>(), b.at("y_min").get<double>(), b.at("x_max").get<double>(),
                   b.at("y_max").get<double>()};
  const auto& p = j.at("params");
  m.params.k = p.at("k").get<std::uint64_t>();
  m.params.balance_eps = p.at("balance_eps").get<double>();
  m.params.edge_length = p.at("edge_length").get<double>();
  m.params.layout_iterations = p.at("layout_iterations").get<std::uint64_t>();
  m.params.margin = p.at("margin").get<double>();
  m.params.gap = p.at("gap").get<double>();
  m.params.partition_seed = p.at("partition_seed").get<std::uint64_t>();
  m.params.layout_seed = p.at("layout_seed").get<std::uint64_t>();
  m.params.rtree_fanout = p.at("rtree_fanout").get<std::uint64_t>();
  for (const auto& [name, info] : j.at("sections").items()) {
    SectionInfo s;
    s.file = info.at("file").get<std::string>();
    s.bytes = info.at("bytes").get<std::uint64_t>();
    s.crc32 = static_cast<std::uint32_t>(std::stoul(info.at("crc32").get<std::string>(), nullptr, 16));
    m.sections.emplace(name, std::move(s));
  }
  return m;
}

// Writes the whole buffer and fsyncs; throws IoError naming `section`.
inline void write_file_synced(const fs::path& path, std::string_view bytes, const std::string& section) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError(section, "cannot create " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw IoError(section, "write failed: " + std::string(std::strerror(err)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw IoError(section, "fsync failed: " + std::string(std::strerror(err)));
  }
  if (::close(fd) != 0) throw IoError(section, "close failed: " + std::string(std::strerror(errno)));
}

inline void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

inline std::string read_file(const fs::path& path, const std::string& section) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(section, "cannot open " + path.string());
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw IoError(section, "cannot stat " + path.string());
  std::string data(size, '\0');
  in.read(data.data(), static_cast<std::streamsize>(size));
  if (in.bad() || static_cast<std::uintmax_t>(in.gcount()) != size)
    throw IoError(section, "read failed for " + path.string());
  return data;
}

}  // namespace detail

// Serializes `store` into the directory `path`. Section files are written into
// a sibling temporary directory (manifest last) which is then renamed into
// place, so a failed persist leaves nothing at `path`. Returns the manifest
// with section checksums filled in.
inline Manifest persist(const StoreData& store, const fs::path& path, bool overwrite = false) {
  std::error_code ec;
  const bool exists = fs::exists(path, ec);
  const bool empty_dir = exists && fs::is_directory(path, ec) && fs::is_empty(path, ec);
  if (exists && !empty_dir && !overwrite)
    throw IoError("store", path.string() + " already exists (pass overwrite to replace it)");

  const fs::path target = fs::absolute(path, ec).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent, ec);
  if (ec) throw IoError("store", "cannot create " + parent.string() + ": " + ec.message());

  static std::atomic<unsigned> counter{0};
  const fs::path tmp = parent / ("." + target.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter++));
  fs::create_directory(tmp, ec);
  if (ec) throw IoError("store", "cannot create " + tmp.string() + ": " + ec.message());

  Manifest manifest = store.manifest;
  manifest.format_version = kFormatVersion;
  manifest.sections.clear();
  try {
    const std::array<std::string (*)(const StoreData&), 5> encoders{
        detail::encode_nodes, detail::encode_edges, detail::encode_level0, detail::encode_level1,
        detail::encode_labels};
    for (std::size_t i = 0; i < kSections.size(); ++i) {
      const std::string name(kSections[i].name);
      const std::string bytes = encoders[i](store);
      detail::write_file_synced(tmp / kSections[i].file, bytes, name);
      manifest.sections[name] = {std::string(kSections[i].file), bytes.size(), crc32_of(bytes)};
    }
    const std::string text = detail::manifest_to_json(manifest).dump(2) + "\n";
    detail::write_file_synced(tmp / kManifestFile, text, "manifest");
    detail::fsync_dir(tmp);

    if (exists) {
      const fs::path backup = tmp.string() + ".old";
      fs::rename(target, backup, ec);
      if (ec) throw IoError("store", "cannot move existing store aside: " + ec.message());
      fs::rename(tmp, target, ec);
      if (ec) {
        fs::rename(backup, target);
        throw IoError("store", "cannot rename into place: " + ec.message());
      }
      fs::remove_all(backup, ec);
    } else {
      fs::rename(tmp, target, ec);
      if (ec) throw IoError("store", "cannot rename into place: " + ec.message());
    }
    detail::fsync_dir(parent);
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  return manifest;
}

// Reads and verifies every section checksum, then decodes.
inline StoreData load(const fs::path& path) {
  const fs::path manifest_path = path / kManifestFile;
  if (!fs::exists(manifest_path)) throw MissingManifestError("manifest", "no manifest.json in " + path.string());
  StoreData s;
  try {
    s.manifest = detail::manifest_from_json(nlohmann::json::parse(detail::read_file(manifest_path, "manifest")));
  } catch (const StoreError&) {
    throw;
  } catch (const std::exception& e) {
    throw StoreError("manifest", std::string("malformed manifest: ") + e.what());
  }

  std::array<std::string, kSections.size()> payload;
  for (std::size_t i = 0; i < kSections.size(); ++i) {
    const std::string name(kSections[i].name);
    auto it = s.manifest.sections.find(name);
    if (it == s.manifest.sections.end()) throw StoreError(name, "section missing from manifest");
    payload[i] = detail::read_file(path / it->second.file, name);
    if (payload[i].size() != it->second.bytes || crc32_of(payload[i]) != it->second.crc32)
      throw ChecksumError(name, "checksum mismatch in " + it->second.file);
  }

  {
    detail::ByteReader r(payload[0], "node table");
    r.magic(detail::kNodesMagic);
    const std::uint64_t n = r.count(24);
    s.nodes.resize(n);
    for (auto& node : s.nodes) {
      node.pos.x = r.f64();
      node.pos.y = r.f64();
      node.partition = r.u32();
      r.skip(4);
    }
    r.finish();
    if (n != s.manifest.node_count) r.fail("node count disagrees with manifest");
  }
  {
    detail::ByteReader r(payload[1], "edge table");
    r.magic(detail::kEdgesMagic);
    const std::uint64_t m = r.count(24);
    s.edges.resize(m);
    for (auto& e : s.edges) {
      e.src = r.u64();
      e.dst = r.u64();
      e.crossing = (r.u32() & 1u) != 0;
      r.skip(4);
      if (e.src >= s.nodes.size() || e.dst >= s.nodes.size()) r.fail("edge endpoint out of range");
    }
    r.finish();
    if (m != s.manifest.edge_count) r.fail("edge count disagrees with manifest");
  }
  {
    detail::ByteReader r(payload[2], "level-0 R-tree");
    r.magic(detail::kTree0Magic);
    s.level0 = detail::read_tree(r);
    r.finish();
  }
  {
    detail::ByteReader r(payload[3], "level-1 R-tree");
    r.magic(detail::kTree1Magic);
    s.level1 = detail::read_tree(r);
    const std::uint64_t sn = r.count(32);
    s.supernodes.resize(sn);
    for (auto& x : s.supernodes) {
      x.partition = r.u32();
      r.skip(4);
      x.centroid.x = r.f64();
      x.centroid.y = r.f64();
      x.member_count = r.u64();
    }
    const std::uint64_t se = r.count(16);
    s.superedges.resize(se);
    for (auto& x : s.superedges) {
      x.a = r.u32();
      x.b = r.u32();
      x.weight = r.u64();
    }
    r.finish();
  }
  {
    detail::ByteReader r(payload[4], "label table");
    r.magic(detail::kLabelsMagic);
    const std::uint64_t nl = r.count(4);
    const std::uint64_t el = r.u64();
    if (nl != s.nodes.size() || el != s.edges.size()) r.fail("label count disagrees with tables");
    s.node_labels.reserve(nl);
    for (std::uint64_t i = 0; i < nl; ++i) s.node_labels.emplace_back(r.raw(r.u32()));
    s.edge_labels.reserve(el);
    for (std::uint64_t i = 0; i < el; ++i) {
      const std::uint32_t len = r.u32();
      if (len == 0)
        s.edge_labels.emplace_back(std::nullopt);
      else
        s.edge_labels.emplace_back(std::string(r.raw(len)));
    }
    r.finish();
  }
  return s;
}

}  // namespace gvdb
