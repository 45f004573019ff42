#include "treepart/cli/driver.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "treepart/balance/balance.hpp"
#include "treepart/io/documents.hpp"
#include "treepart/mesh/dual_graph.hpp"
#include "treepart/mesh/generate.hpp"
#include "treepart/mesh/shared_nodes.hpp"
#include "treepart/metrics/metrics.hpp"
#include "treepart/partition/hierarchical.hpp"
#include "treepart/shhalo/halo.hpp"
#include "treepart/simrt/collectives.hpp"

namespace treepart::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Options {
  std::string mesh;
  std::string topo;
  std::string assignment;
  std::string weights;
  std::string timing;
  std::string method = "rcb";
  int approach = 2;
  int bpl = 0;
  double tolerance = 1.02;
  std::vector<int> levels;
  double cost_intra = 1.0 / 3.0;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool no_timestamp = false;

  std::string kind = "triangle";
  int nx = 8;
  int ny = 8;
  int nz = 1;
};

// Per-rank results of the final metrics pass; each rank writes only its own slots.
struct Collected {
  std::vector<mesh::MeshChunk> chunks;
  std::vector<shhalo::HaloSchedule> schedules;
  mesh::Graph dual;
  mesh::Assignment assignment;
};

void collect(simrt::Communicator& world, const mesh::MeshChunk& chunk, std::int64_t elements,
             Collected& c) {
  const int me = world.rank();
  c.chunks[me] = chunk;
  {
    simrt::PhaseScope phase(world, "metrics");
    const auto rows = mesh::build_dual_graph(world, chunk);
    auto dual = mesh::gather_dual_graph(world, rows, elements);
    auto assignment = mesh::gather_assignment(world, chunk, elements);
    const auto shared = mesh::find_shared_nodes(world, chunk);
    c.schedules[me] = shhalo::build_schedule(shared, me, world.topology());
    if (me == 0) {
      c.dual = std::move(dual);
      c.assignment = std::move(assignment);
    }
  }
  simrt::PhaseScope phase(world, "halo");
  std::vector<mesh::NodeId> nodes;
  for (const auto& n : chunk.nodes) nodes.push_back(n.id);
  auto field = shhalo::FieldData::zeros(nodes, 1);
  for (std::size_t i = 0; i < field.nodes.size(); ++i) field.values[i] = static_cast<double>(field.nodes[i]);
  shhalo::exchange(world, c.schedules[me], field, shhalo::HaloMode::replicate_owner);
}

metrics::Report build_report(const Collected& c, const simrt::TrafficLedger& ledger,
                             const metrics::CostModel& model, int bpl) {
  const int parts = static_cast<int>(c.schedules.size());
  auto report = metrics::quality_report(c.dual, c.assignment, parts, c.schedules, model);
  report.traffic = metrics::phase_traffic(ledger);
  report.levels = metrics::level_costs(ledger, model, bpl);
  for (const auto& s : c.schedules) {
    report.halo_predicted_internode_bytes += s.send_bytes(simrt::Locality::internode);
  }
  simrt::TrafficFilter halo;
  halo.phase_prefix = "halo";
  halo.locality = simrt::Locality::internode;
  report.halo_ledger_internode_bytes = ledger.network(halo).bytes;
  if (report.halo_predicted_internode_bytes != report.halo_ledger_internode_bytes) {
    throw InvariantViolation("halo: schedules predict " +
                             std::to_string(report.halo_predicted_internode_bytes) +
                             " internode bytes but the ledger recorded " +
                             std::to_string(report.halo_ledger_internode_bytes));
  }
  return report;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream out;
  out << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

Json report_document(const std::string& verb, Json config, const metrics::Report& report,
                     const Options& o) {
  Json doc{{"schema", io::kSchema}, {"verb", verb}, {"config", std::move(config)}};
  const Json body = io::report_to_json(report);
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  if (!o.no_timestamp) doc["timestamp"] = timestamp();
  return doc;
}

std::vector<double> rank_weights(const std::vector<mesh::MeshChunk>& chunks) {
  std::vector<double> out;
  for (const auto& c : chunks) out.push_back(c.total_weight());
  return out;
}

std::vector<mesh::MeshChunk> chunks_from(const mesh::Mesh& m, const mesh::Assignment& a, int ranks) {
  std::vector<std::vector<mesh::ElementId>> ids(static_cast<std::size_t>(ranks));
  for (std::size_t e = 0; e < a.size(); ++e) ids[a[static_cast<mesh::ElementId>(e)]].push_back(static_cast<mesh::ElementId>(e));
  std::vector<mesh::MeshChunk> out;
  for (const auto& list : ids) out.push_back(mesh::extract(m, list));
  return out;
}

void load_weights(mesh::Mesh& m, const Options& o) {
  if (!o.weights.empty() && !o.timing.empty()) {
    throw InputError("--weights and --timing are mutually exclusive");
  }
  if (!o.weights.empty()) {
    const auto weights = io::weights_from_json(io::read_json(o.weights), o.weights);
    try {
      balance::apply_weights(m, weights);
    } catch (const InputError& e) {
      throw InputError(o.weights + ": " + e.what());
    }
  } else if (!o.timing.empty()) {
    const auto timing = io::timing_from_json(io::read_json(o.timing), o.timing);
    const auto ids = m.element_ids();
    try {
      balance::apply_weights(m, balance::derive_weights(timing, ids));
    } catch (const InputError& e) {
      throw InputError(o.timing + ": " + e.what());
    }
  }
}

metrics::CostModel cost_model(const Options& o) {
  metrics::CostModel model;
  model.intranode = o.cost_intra;
  model.check();
  return model;
}

partition::Method method_of(const Options& o) {
  auto m = partition::parse_method(o.method);
  if (!m) throw InputError("unknown method \"" + o.method + "\"");
  return *m;
}

void write_outputs(const Options& o, const Collected& c, const Json& report,
                   const std::vector<metrics::LevelCost>& levels, const std::vector<double>& pre,
                   bool part_files) {
  fs::create_directories(o.out);
  const fs::path dir(o.out);
  if (part_files) {
    for (std::size_t r = 0; r < c.chunks.size(); ++r) {
      io::write_json(dir / ("part_" + std::to_string(r) + ".json"),
                     io::part_to_json(static_cast<int>(r), c.chunks[r], c.schedules[r]));
    }
  }
  if (part_files) io::write_json(dir / "assignment.json", io::assignment_to_json(c.assignment));
  io::write_json(dir / "report.json", report);
  io::write_text(dir / "level_cost.csv", io::level_cost_csv(levels));
  io::write_text(dir / "balance_hist.csv", io::balance_hist_csv(pre, rank_weights(c.chunks)));
}

Collected empty_collected(int ranks) {
  Collected c;
  c.chunks.resize(static_cast<std::size_t>(ranks));
  c.schedules.resize(static_cast<std::size_t>(ranks));
  return c;
}

int run_partition(const Options& o, std::ostream& out) {
  auto m = io::read_mesh(o.mesh);
  load_weights(m, o);
  const auto tree = io::read_topology(o.topo);
  const auto model = cost_model(o);
  partition::HierarchicalPlan plan;
  plan.bpl = o.bpl;
  plan.method = method_of(o);
  plan.approach = static_cast<partition::Approach>(o.approach);
  plan.tolerance = o.tolerance;
  partition::check(plan, tree);

  const int ranks = tree.total_ranks();
  std::vector<mesh::MeshChunk> initial;
  for (int r = 0; r < ranks; ++r) initial.push_back(mesh::block_chunk(m, ranks, r));
  auto c = empty_collected(ranks);
  simrt::Runtime rt(tree, {o.seed});
  rt.run([&](simrt::Communicator& world) {
    auto chunk = partition::hierarchical_partition(world, initial[world.rank()], plan);
    collect(world, chunk, m.global_elements, c);
  });
  const auto report = build_report(c, rt.ledger(), model, o.bpl);
  Json config{{"mesh", o.mesh},     {"topo", o.topo},         {"method", o.method},
              {"approach", o.approach}, {"bpl", o.bpl},       {"tolerance", o.tolerance},
              {"weights", o.weights}, {"cost_intra", o.cost_intra}};
  write_outputs(o, c, report_document("partition", std::move(config), report, o), report.levels,
                rank_weights(initial), true);
  out << "partitioned " << m.global_elements << " elements into " << ranks
      << " parts; edge cut " << report.edge_cut << ", element imbalance "
      << report.element_imbalance << "\n";
  return kExitOk;
}

int run_rebalance(const Options& o, std::ostream& out) {
  auto m = io::read_mesh(o.mesh);
  load_weights(m, o);
  const auto tree = io::read_topology(o.topo);
  const auto model = cost_model(o);
  const auto method = method_of(o);
  if (o.assignment.empty()) throw InputError("rebalance needs --assignment");
  const auto assignment = io::assignment_from_json(io::read_json(o.assignment), o.assignment,
                                                   m.global_elements, tree.total_ranks());
  std::vector<int> levels = o.levels;
  if (levels.empty()) levels.push_back(tree.depth() - 1);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int l : levels) {
    if (l < 0 || l >= tree.depth()) {
      throw InputError("--level " + std::to_string(l) + " is not a level of a " +
                       std::to_string(tree.depth()) + "-level tree");
    }
  }

  const int ranks = tree.total_ranks();
  const auto initial = chunks_from(m, assignment, ranks);
  auto c = empty_collected(ranks);
  struct Step {
    int level;
    bool changed;
    double before;
    double after;
  };
  std::vector<Step> steps;
  simrt::Runtime rt(tree, {o.seed});
  rt.run([&](simrt::Communicator& world) {
    auto chunk = initial[world.rank()];
    for (int level : levels) {
      auto outcome = balance::rebalance(world, chunk, {level, method, o.tolerance});
      chunk = std::move(outcome.chunk);
      int changed = 0;
      {
        simrt::PhaseScope phase(world, "rebalance/stats");
        changed = simrt::allreduce_max(world, outcome.changed ? 1 : 0);
      }
      if (world.rank() == 0) {
        steps.push_back({level, changed != 0, outcome.group_imbalance_before,
                         outcome.group_imbalance_after});
      }
    }
    collect(world, chunk, m.global_elements, c);
  });
  const auto report = build_report(c, rt.ledger(), model, 0);
  Json config{{"mesh", o.mesh},     {"topo", o.topo},         {"assignment", o.assignment},
              {"method", o.method}, {"tolerance", o.tolerance}, {"weights", o.weights},
              {"timing", o.timing}, {"levels", levels},       {"cost_intra", o.cost_intra}};
  auto doc = report_document("rebalance", std::move(config), report, o);
  Json summary = Json::array();
  bool any = false;
  for (const auto& s : steps) {
    summary.push_back(Json{{"level", s.level},
                           {"changed", s.changed},
                           {"group_imbalance_before", s.before},
                           {"group_imbalance_after", s.after}});
    any = any || s.changed;
  }
  Json rebalance{{"changed", any}, {"steps", std::move(summary)}};
  if (!any) rebalance["note"] = "no-op: every group was within tolerance or could not improve";
  if (doc.contains("timestamp")) {
    auto stamp = doc["timestamp"];
    doc.erase("timestamp");
    doc["rebalance"] = std::move(rebalance);
    doc["timestamp"] = std::move(stamp);
  } else {
    doc["rebalance"] = std::move(rebalance);
  }
  write_outputs(o, c, doc, report.levels, rank_weights(initial), false);
  io::write_json(fs::path(o.out) / "assignment.json", io::assignment_to_json(c.assignment));
  out << (any ? "rebalanced" : "no-op:") << " weight imbalance " << report.weight_imbalance << "\n";
  return kExitOk;
}

int run_metrics(const Options& o, std::ostream& out) {
  auto m = io::read_mesh(o.mesh);
  load_weights(m, o);
  const auto tree = io::read_topology(o.topo);
  const auto model = cost_model(o);
  if (o.assignment.empty()) throw InputError("metrics needs --assignment");
  const auto assignment = io::assignment_from_json(io::read_json(o.assignment), o.assignment,
                                                   m.global_elements, tree.total_ranks());
  const int ranks = tree.total_ranks();
  const auto initial = chunks_from(m, assignment, ranks);
  auto c = empty_collected(ranks);
  simrt::Runtime rt(tree, {o.seed});
  rt.run([&](simrt::Communicator& world) {
    collect(world, initial[world.rank()], m.global_elements, c);
  });
  const auto report = build_report(c, rt.ledger(), model, 0);
  Json config{{"mesh", o.mesh},
              {"topo", o.topo},
              {"assignment", o.assignment},
              {"weights", o.weights},
              {"cost_intra", o.cost_intra}};
  fs::create_directories(o.out);
  io::write_json(fs::path(o.out) / "report.json",
                 report_document("metrics", std::move(config), report, o));
  out << "edge cut " << report.edge_cut << ", element imbalance " << report.element_imbalance
      << ", delta_p " << report.delta_p1 << "% / " << report.delta_p2 << "%\n";
  return kExitOk;
}

int run_generate(const Options& o, std::ostream& out) {
  mesh::Mesh m;
  if (o.kind == "triangle") {
    m = mesh::triangle_grid(o.nx, o.ny);
  } else if (o.kind == "tetrahedron" || o.kind == "tet") {
    m = mesh::tet_box(o.nx, o.ny, o.nz);
  } else {
    throw InputError("unknown mesh kind \"" + o.kind + "\"");
  }
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::write_json(path, io::mesh_to_json(m));
  out << "wrote " << m.elements.size() << " " << mesh::to_string(m.kind) << " elements to "
      << o.out << "\n";
  return kExitOk;
}

void common_flags(CLI::App& cmd, Options& o) {
  cmd.add_option("--mesh", o.mesh, "Mesh document")->required();
  cmd.add_option("--topo", o.topo, "Topology document")->required();
  cmd.add_option("--weights", o.weights, "Element weights document");
  cmd.add_option("--cost-intra", o.cost_intra, "Intranode byte cost (internode = 1)");
  cmd.add_option("--out", o.out, "Output directory");
  cmd.add_option("--seed", o.seed, "Scheduler seed");
  cmd.add_flag("--no-timestamp", o.no_timestamp, "Omit the report timestamp");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Topology-aware hierarchical mesh partitioner", "treepart"};
  app.require_subcommand(1);

  auto* part = app.add_subcommand("partition", "Partition a mesh over a topology");
  common_flags(*part, o);
  part->add_option("--method", o.method)->check(CLI::IsMember({"rcb", "graph"}));
  part->add_option("--approach", o.approach)->check(CLI::IsMember({1, 2}));
  part->add_option("--bpl", o.bpl, "Bootstrap partition level");
  part->add_option("--tolerance", o.tolerance);

  auto* reb = app.add_subcommand("rebalance", "Re-balance an assignment at chosen levels");
  common_flags(*reb, o);
  reb->add_option("--assignment", o.assignment, "Assignment document")->required();
  reb->add_option("--timing", o.timing, "Cache-block timing document");
  reb->add_option("--level", o.levels, "Level to re-balance (repeatable)");
  reb->add_option("--method", o.method)->check(CLI::IsMember({"rcb", "graph"}));
  reb->add_option("--tolerance", o.tolerance);

  auto* met = app.add_subcommand("metrics", "Report quality metrics of an assignment");
  common_flags(*met, o);
  met->add_option("--assignment", o.assignment, "Assignment document")->required();

  auto* gen = app.add_subcommand("generate", "Write a structured mesh document");
  gen->add_option("--kind", o.kind)->check(CLI::IsMember({"triangle", "tetrahedron", "tet"}));
  gen->add_option("--nx", o.nx);
  gen->add_option("--ny", o.ny);
  gen->add_option("--nz", o.nz);
  gen->add_option("--out", o.out, "Output file")->required();

  std::vector<std::string> argv_storage{"treepart"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (part->parsed()) return run_partition(o, out);
    if (reb->parsed()) return run_rebalance(o, out);
    if (met->parsed()) return run_metrics(o, out);
    return run_generate(o, out);
  } catch (const InputError& e) {
    err << "treepart: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "treepart: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvariantViolation& e) {
    err << "treepart: internal error: " << e.what() << "\n";
    return kExitInvariant;
  }
}

}  // namespace treepart::cli
