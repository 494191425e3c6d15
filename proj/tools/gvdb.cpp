// gvdb: preprocessing, serving, and synthetic-data command line.
//
//   gvdb build --input graph.nt --format ntriples --out store/
//   gvdb serve --store store/ --bind 127.0.0.1:8080
//   gvdb generate --kind communities --nodes 100000 --edges 500000 --out g.tsv

#include "gvdb/gvdb.hpp"
#include "gvdb/server.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct BuildArgs {
  std::string input;
  std::string format;
  std::string out;
  std::optional<std::size_t> k;
  double eps = 0.05;
  double edge_length = 60.0;
  double gap = 50.0;
  std::uint64_t seed = 1;
  std::size_t iterations = 300;
  unsigned threads = 0;
  bool overwrite = false;
};

struct ServeArgs {
  std::string store;
  std::string bind = "127.0.0.1:8080";
  std::string assets;
  std::size_t max_items = gvdb::kDefaultMaxItems;
  std::size_t threads = 32;
  bool log = false;
};

struct GenerateArgs {
  std::string kind = "communities";
  std::size_t nodes = 1000;
  std::size_t edges = 5000;
  std::size_t m = 3;
  std::size_t communities = 0;
  double inter = 0.05;
  std::uint64_t seed = 1;
  std::string out;
};

int run_build(const BuildArgs& a) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  std::string format = a.format;
  if (format.empty()) format = a.input.ends_with(".nt") ? "ntriples" : "edgelist";
  std::ifstream in(a.input, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open " << a.input << "\n";
    return 1;
  }
  const auto t_ingest = clock::now();
  gvdb::Ingested ingested =
      gvdb::ingest(in, format == "ntriples" ? gvdb::InputFormat::ntriples : gvdb::InputFormat::edgelist);
  const double ingest_ms = std::chrono::duration<double, std::milli>(clock::now() - t_ingest).count();
  if (ingested.graph.empty()) {
    std::cerr << "error: input contains no nodes\n";
    return 1;
  }

  gvdb::PipelineParams params;
  params.partitioner.k = a.k;
  params.partitioner.balance_eps = a.eps;
  params.partitioner.seed = a.seed;
  params.layout.ideal_edge_length = a.edge_length;
  params.layout.iterations = a.iterations;
  params.layout.seed = a.seed;
  params.placer.gap = a.gap;
  params.threads = a.threads;
  gvdb::PipelineOutput out = gvdb::run_pipeline(ingested.graph, params);

  const auto t_persist = clock::now();
  gvdb::persist(out.store, a.out, a.overwrite);
  const double persist_ms = std::chrono::duration<double, std::milli>(clock::now() - t_persist).count();
  const double total_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();

  const auto& m = out.store.manifest;
  std::printf("nodes                 %llu\n", static_cast<unsigned long long>(m.node_count));
  std::printf("edges                 %llu\n", static_cast<unsigned long long>(m.edge_count));
  std::printf("self-loops dropped    %zu\n", ingested.report.self_loops_dropped);
  std::printf("duplicates dropped    %zu\n", ingested.report.duplicates_dropped);
  std::printf("partitions            %llu\n", static_cast<unsigned long long>(m.partition_count));
  std::printf("cut size              %llu\n", static_cast<unsigned long long>(m.crossing_count));
  std::printf("total crossing length %.3f\n", out.global.total_crossing_length);
  std::printf("global bbox           [%.3f, %.3f] x [%.3f, %.3f]\n", m.global_bbox.x_min, m.global_bbox.x_max,
              m.global_bbox.y_min, m.global_bbox.y_max);
  std::printf("timings (ms)          ingest %.1f  partition %.1f  layout %.1f  place %.1f  index %.1f  persist %.1f"
              "  total %.1f\n",
              ingest_ms, out.timings.partition_ms, out.timings.layout_ms, out.timings.place_ms,
              out.timings.index_ms, persist_ms, total_ms);
  return 0;
}

int run_serve(const ServeArgs& a) {
  gvdb::ServerConfig cfg;
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --bind expects addr:port\n";
    return 1;
  }
  cfg.host = a.bind.substr(0, colon);
  try {
    cfg.port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "error: invalid port in --bind\n";
    return 1;
  }
  if (cfg.port < 1 || cfg.port > 65535) {
    std::cerr << "error: port must be in [1, 65535]\n";
    return 1;
  }
  cfg.max_items = a.max_items;
  cfg.threads = a.threads;
  cfg.log_requests = a.log;
  if (!a.assets.empty()) cfg.assets = a.assets;

  auto data = std::make_shared<const gvdb::StoreData>(gvdb::load(a.store));
  auto engine = std::make_shared<const gvdb::QueryEngine>(data);
  gvdb::HttpServer server(engine, cfg);
  const int port = server.bind();
  std::cerr << "serving " << a.store << " on http://" << cfg.host << ":" << port << "\n";
  return server.run() ? 0 : 1;
}

int run_generate(const GenerateArgs& a) {
  gvdb::Graph g;
  if (a.kind == "ba") {
    g = gvdb::synthetic::barabasi_albert(a.nodes, a.m, a.seed);
  } else if (a.kind == "communities") {
    const std::size_t c = a.communities ? a.communities : std::max<std::size_t>(1, a.nodes / 1000);
    g = gvdb::synthetic::community_graph(a.nodes, a.edges, c, a.inter, a.seed);
  } else {
    std::cerr << "error: unknown --kind " << a.kind << "\n";
    return 1;
  }
  std::ofstream out(a.out, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << a.out << "\n";
    return 1;
  }
  gvdb::synthetic::write_edgelist(g, out);
  std::cerr << "wrote " << g.node_count() << " nodes, " << g.edge_count() << " edges to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gvdb: disk-backed graph exploration engine"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Lay out a graph and write a store directory");
  b->add_option("--input", build.input, "Input graph file")->required()->check(CLI::ExistingFile);
  b->add_option("--format", build.format, "Input format (default: from extension)")
      ->check(CLI::IsMember({"ntriples", "edgelist"}));
  b->add_option("--out", build.out, "Store directory")->required();
  b->add_option("--k", build.k, "Partition count (default: ceil(n/2000))");
  b->add_option("--eps", build.eps, "Balance tolerance")->check(CLI::NonNegativeNumber);
  b->add_option("--edge-length", build.edge_length, "Ideal edge length")->check(CLI::PositiveNumber);
  b->add_option("--gap", build.gap, "Gap between partitions")->check(CLI::NonNegativeNumber);
  b->add_option("--seed", build.seed, "Seed for partitioning and layout");
  b->add_option("--iterations", build.iterations, "Layout iterations");
  b->add_option("--threads", build.threads, "Layout threads (0: all cores)");
  b->add_flag("--overwrite", build.overwrite, "Replace an existing store");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Serve a store over HTTP");
  s->add_option("--store", serve.store, "Store directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--bind", serve.bind, "addr:port");
  s->add_option("--assets", serve.assets, "Static asset directory")->check(CLI::ExistingDirectory);
  s->add_option("--max-items", serve.max_items, "Default window result cap")->check(CLI::PositiveNumber);
  s->add_option("--threads", serve.threads, "Worker threads");
  s->add_flag("--log", serve.log, "Log requests to stderr");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic edge list");
  g->add_option("--kind", gen.kind, "ba | communities")->check(CLI::IsMember({"ba", "communities"}));
  g->add_option("--nodes", gen.nodes, "Node count");
  g->add_option("--edges", gen.edges, "Edge count (communities)");
  g->add_option("--m", gen.m, "Edges per new node (ba)");
  g->add_option("--communities", gen.communities, "Community count (default nodes/1000)");
  g->add_option("--inter", gen.inter, "Inter-community edge fraction");
  g->add_option("--seed", gen.seed, "Seed");
  g->add_option("--out", gen.out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*b) return run_build(build);
    if (*s) return run_serve(serve);
    if (*g) return run_generate(gen);
  } catch (const gvdb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
