#include "gvdb/gvdb.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace gvdb;
namespace fs = std::filesystem;

namespace {

StoreData sample_store() {
  auto s = gvdb::testing::store_from_edgelist("a b\nb c\nc d\nd a\nb d\ne f\n", 2);
  s.edge_labels[1] = "knows";
  return s;
}

void flip_byte(const fs::path& file, std::size_t offset) {
  std::fstream f(file, std::ios::in | std::ios::out | std::ios::binary);
  f.seekg(static_cast<std::streamoff>(offset));
  char c = 0;
  f.read(&c, 1);
  c = static_cast<char>(c ^ 0x5a);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(&c, 1);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(gvdb::testing::temp_dir(name)) {}
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Crc32, KnownValue) { EXPECT_EQ(crc32_of("123456789"), 0xcbf43926u); }

TEST(Store, RoundTripPreservesEverything) {
  TempDir dir("roundtrip");
  const StoreData s = sample_store();
  const Manifest m = persist(s, dir.path / "store");
  EXPECT_EQ(m.sections.size(), 5u);
  const StoreData r = load(dir.path / "store");
  ASSERT_EQ(r.nodes.size(), s.nodes.size());
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    EXPECT_EQ(r.nodes[i].pos, s.nodes[i].pos);
    EXPECT_EQ(r.nodes[i].partition, s.nodes[i].partition);
  }
  ASSERT_EQ(r.edges.size(), s.edges.size());
  for (std::size_t i = 0; i < s.edges.size(); ++i) {
    EXPECT_EQ(r.edges[i].src, s.edges[i].src);
    EXPECT_EQ(r.edges[i].dst, s.edges[i].dst);
    EXPECT_EQ(r.edges[i].crossing, s.edges[i].crossing);
  }
  EXPECT_EQ(r.node_labels, s.node_labels);
  EXPECT_EQ(r.edge_labels, s.edge_labels);
  EXPECT_EQ(r.supernodes, s.supernodes);
  EXPECT_EQ(r.superedges, s.superedges);
  EXPECT_EQ(r.manifest.global_bbox, s.manifest.global_bbox);
  EXPECT_EQ(r.manifest.params.k, 2u);
  EXPECT_EQ(r.level0.size(), s.level0.size());
  EXPECT_EQ(r.level1.size(), s.level1.size());

  QueryEngine a(std::make_shared<const StoreData>(s)), b(std::make_shared<const StoreData>(r));
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Rect w = gvdb::testing::random_window(rng, s.manifest.global_bbox, 0.6);
    for (Level level : {Level::detail, Level::abstraction}) {
      const auto va = a.view(w, level), vb = b.view(w, level);
      ASSERT_EQ(va.nodes.size(), vb.nodes.size());
      ASSERT_EQ(va.edges.size(), vb.edges.size());
      for (std::size_t k = 0; k < va.nodes.size(); ++k) EXPECT_EQ(va.nodes[k].id, vb.nodes[k].id);
      for (std::size_t k = 0; k < va.edges.size(); ++k) EXPECT_EQ(va.edges[k].id, vb.edges[k].id);
    }
  }
}

TEST(Store, BytesAreDeterministic) {
  TempDir dir("determinism");
  const StoreData s = sample_store();
  persist(s, dir.path / "one");
  persist(s, dir.path / "two");
  for (const auto& entry : fs::directory_iterator(dir.path / "one")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(gvdb::testing::slurp(entry.path()), gvdb::testing::slurp(dir.path / "two" / name)) << name;
  }
}

TEST(Store, CorruptByteNamesSection) {
  TempDir dir("corrupt");
  const StoreData s = sample_store();
  persist(s, dir.path / "store");
  flip_byte(dir.path / "store" / "nodes.bin", 20);
  try {
    load(dir.path / "store");
    FAIL() << "expected ChecksumError";
  } catch (const ChecksumError& e) {
    EXPECT_EQ(e.section(), "node table");
  }
}

TEST(Store, EveryCorruptedSectionIsNamed) {
  TempDir dir("corrupt_all");
  const StoreData s = sample_store();
  for (const auto& sec : kSections) {
    const fs::path p = dir.path / std::string(sec.file);
    persist(s, p);
    flip_byte(p / std::string(sec.file), gvdb::testing::slurp(p / std::string(sec.file)).size() / 2);
    try {
      load(p);
      ADD_FAILURE() << sec.file;
    } catch (const ChecksumError& e) {
      EXPECT_EQ(e.section(), sec.name);
    }
  }
}

TEST(Store, TruncatedFileIsChecksumError) {
  TempDir dir("truncated");
  persist(sample_store(), dir.path / "store");
  fs::resize_file(dir.path / "store" / "edges.bin", 10);
  try {
    load(dir.path / "store");
    FAIL();
  } catch (const ChecksumError& e) {
    EXPECT_EQ(e.section(), "edge table");
  }
}

TEST(Store, UnwritablePathLeavesNothing) {
  TempDir dir("unwritable");
  fs::create_directories(dir.path);
  std::ofstream(dir.path / "plainfile") << "x";
  EXPECT_THROW(persist(sample_store(), dir.path / "plainfile" / "store"), IoError);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Store, RefusesNonEmptyTargetWithoutOverwrite) {
  TempDir dir("overwrite");
  const StoreData s = sample_store();
  persist(s, dir.path / "store");
  EXPECT_THROW(persist(s, dir.path / "store"), IoError);
  EXPECT_NO_THROW(persist(s, dir.path / "store", true));
  EXPECT_NO_THROW(load(dir.path / "store"));
  fs::create_directories(dir.path / "empty");
  EXPECT_NO_THROW(persist(s, dir.path / "empty"));
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++entries;
  EXPECT_EQ(entries, 2u);  // no leftover temporaries
}

TEST(Store, EmptyDirectoryIsMissingManifest) {
  TempDir dir("empty");
  fs::create_directories(dir.path);
  try {
    load(dir.path);
    FAIL();
  } catch (const MissingManifestError& e) {
    EXPECT_EQ(e.section(), "manifest");
  }
}

TEST(Store, FutureVersionRejected) {
  TempDir dir("version");
  persist(sample_store(), dir.path / "store");
  const fs::path mp = dir.path / "store" / "manifest.json";
  auto j = nlohmann::json::parse(gvdb::testing::slurp(mp));
  j["format_version"] = kFormatVersion + 1;
  std::ofstream(mp) << j.dump();
  EXPECT_THROW(load(dir.path / "store"), VersionError);
}

TEST(Store, MalformedManifest) {
  TempDir dir("malformed");
  persist(sample_store(), dir.path / "store");
  std::ofstream(dir.path / "store" / "manifest.json") << "{not json";
  try {
    load(dir.path / "store");
    FAIL();
  } catch (const StoreError& e) {
    EXPECT_EQ(e.section(), "manifest");
  }
}

TEST(Store, ManifestContents) {
  TempDir dir("manifest");
  const StoreData s = sample_store();
  persist(s, dir.path / "store");
  const auto j = nlohmann::json::parse(gvdb::testing::slurp(dir.path / "store" / "manifest.json"));
  EXPECT_EQ(j["format_version"], kFormatVersion);
  EXPECT_EQ(j["counts"]["nodes"], 6);
  EXPECT_EQ(j["counts"]["edges"], 6);
  EXPECT_EQ(j["counts"]["crossing_edges"], s.manifest.crossing_count);
  const std::string nodes = gvdb::testing::slurp(dir.path / "store" / "nodes.bin");
  EXPECT_EQ(nodes.size(), 16u + 24u * 6u);
  EXPECT_EQ(nodes.substr(0, 8), "GVDBNODE");
  char hex[9];
  std::snprintf(hex, sizeof hex, "%08x", crc32_of(nodes));
  EXPECT_EQ(j["sections"]["node table"]["crc32"], hex);
}
