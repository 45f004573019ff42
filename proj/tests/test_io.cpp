#include <gtest/gtest.h>

#include <filesystem>

#include "oracles.hpp"
#include "treepart/io/documents.hpp"
#include "treepart/mesh/generate.hpp"

using namespace treepart;
using io::Json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "treepart_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(MeshDoc, RoundTrip) {
  for (auto m : {mesh::triangle_grid(3, 2), mesh::tet_box(2, 1, 1)}) {
    m.elements[1].weight = 2.5;
    EXPECT_EQ(io::mesh_from_json(io::mesh_to_json(m), "m"), m);
    auto path = scratch("mesh.json");
    io::write_json(path, io::mesh_to_json(m));
    EXPECT_EQ(io::read_mesh(path), m);
  }
}

TEST(MeshDoc, ChunkRoundTrip) {
  auto m = mesh::triangle_grid(4, 4);
  auto chunk = mesh::block_chunk(m, 3, 1);
  EXPECT_EQ(io::mesh_from_json(io::mesh_to_json(chunk), "c", false), chunk);
}

TEST(MeshDoc, DiagnosticsNameTheRecord) {
  auto doc = io::mesh_to_json(mesh::triangle_grid(2, 2));
  doc["elements"][3][2] = 999;
  EXPECT_NE(error_of([&] { io::mesh_from_json(doc, "bad.json"); }).find("bad.json"), std::string::npos);
  auto shape = io::mesh_to_json(mesh::triangle_grid(2, 2));
  shape["elements"][3] = "oops";
  EXPECT_NE(error_of([&] { io::mesh_from_json(shape, "s.json"); }).find("s.json.elements[3]"),
            std::string::npos);
  auto schema = io::mesh_to_json(mesh::triangle_grid(1, 1));
  schema["schema"] = "other";
  EXPECT_THROW(io::mesh_from_json(schema, "x"), InputError);
}

TEST(ReadJson, MalformedAndMissing) {
  auto path = scratch("broken.json");
  io::write_text(path, "{\"schema\": ");
  EXPECT_NE(error_of([&] { io::read_json(path); }).find("broken.json"), std::string::npos);
  EXPECT_THROW(io::read_json(scratch("absent.json")), InputError);
}

TEST(TopologyDoc, RoundTrip) {
  auto tree = oracle::tree({2, 3});
  auto back = io::topology_from_json(io::topology_to_json(tree), "t");
  EXPECT_EQ(back.total_ranks(), 6);
  EXPECT_EQ(back.levels(), tree.levels());
  Json bad = io::topology_to_json(tree);
  bad["levels"][1]["arity"] = 0;
  EXPECT_THROW(io::topology_from_json(bad, "t"), InputError);
}

TEST(AssignmentDoc, RoundTripAndChecks) {
  mesh::Assignment a(std::vector<int>{1, 0, 2, 2});
  auto doc = io::assignment_to_json(a);
  EXPECT_EQ(io::assignment_from_json(doc, "a", 4, 3), a);
  EXPECT_THROW(io::assignment_from_json(doc, "a", 5, 3), InputError);
  EXPECT_THROW(io::assignment_from_json(doc, "a", 4, 2), InputError);
  auto dup = doc;
  dup["assignment"][3][0] = 0;
  EXPECT_THROW(io::assignment_from_json(dup, "a", 4, 3), InputError);
}

TEST(WeightsAndTiming, RoundTrip) {
  balance::ElementWeights w{{0, 1.5}, {3, 2.0}};
  EXPECT_EQ(io::weights_from_json(io::weights_to_json(w), "w"), w);
  std::vector<balance::BlockTiming> t{{{0, 1}, 0.5}, {{2}, 0.0}};
  EXPECT_EQ(io::timing_from_json(io::timing_to_json(t), "t"), t);
  auto neg = io::weights_to_json(w);
  neg["weights"][0][1] = -1.0;
  EXPECT_THROW(io::weights_from_json(neg, "w"), InputError);
}

TEST(PartDoc, RoundTrip) {
  auto m = mesh::triangle_grid(2, 2);
  shhalo::HaloSchedule s;
  s.part = 1;
  s.neighbors.push_back({0, {1, 4}, {1, 4}, simrt::Locality::intranode});
  s.neighbors.push_back({3, {4}, {4}, simrt::Locality::internode});
  auto chunk = mesh::block_chunk(m, 2, 1);
  auto [c, back] = io::part_from_json(io::part_to_json(1, chunk, s), "p");
  EXPECT_EQ(c, chunk);
  EXPECT_EQ(back, s);
}

TEST(ReportDoc, RoundTrip) {
  metrics::Report r;
  r.parts = 4;
  r.elements = 320;
  r.edge_cut = 26;
  r.element_imbalance = 1.0;
  r.weight_imbalance = 1.25;
  r.comm_imbalance = 1.1;
  r.delta_p1 = 12.5;
  r.delta_p2 = 26.0;
  r.pairs.push_back({0, 1, 9, 72, simrt::Locality::intranode});
  r.traffic.push_back({"halo", 4, 100, 0, 72});
  r.levels.push_back({0, 100, 1e-7});
  r.halo_predicted_internode_bytes = 100;
  r.halo_ledger_internode_bytes = 100;
  EXPECT_EQ(io::report_from_json(io::report_to_json(r), "r"), r);
}

TEST(Csv, Layout) {
  EXPECT_EQ(io::level_cost_csv({{0, 10, 1e-8}, {1, 4, 1e-9}}).substr(0, 6), "level,");
  auto hist = io::balance_hist_csv({3, 1}, {2, 2});
  EXPECT_EQ(hist, "partition,pre,post\n0,1.5,1\n1,0.5,1\n");
}
