#include "treepart/io/documents.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace treepart::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

std::string at(const std::string& where, const std::string& key) { return where + "." + key; }
std::string at(const std::string& where, std::size_t index) {
  return where + "[" + std::to_string(index) + "]";
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing \"") + key + "\"");
  return *it;
}

const Json& array(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  return v;
}

std::int64_t integer(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<std::int64_t>();
}

double real(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::string text(const Json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

void check_schema(const Json& doc, const std::string& source) {
  const auto& s = field(doc, "schema", source);
  if (text(s, at(source, "schema")) != kSchema) {
    fail(source, "schema \"" + s.get<std::string>() + "\" is not \"" + kSchema + "\"");
  }
}

Json header() { return Json{{"schema", kSchema}}; }

std::string locality_name(simrt::Locality l) { return std::string(simrt::to_string(l)); }

simrt::Locality parse_locality(const Json& v, const std::string& where) {
  const auto name = text(v, where);
  if (name == "intranode") return simrt::Locality::intranode;
  if (name == "internode") return simrt::Locality::internode;
  fail(where, "unknown channel \"" + name + "\"");
}

bool compound(const Json& v) { return v.is_array() || v.is_object(); }

void dump_into(std::ostringstream& out, const Json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close(static_cast<std::size_t>(indent), ' ');
  if (v.is_object() && !v.empty()) {
    out << "{\n";
    std::size_t i = 0;
    for (auto it = v.begin(); it != v.end(); ++it, ++i) {
      out << pad << Json(it.key()).dump() << ": ";
      dump_into(out, it.value(), indent + 2);
      out << (i + 1 < v.size() ? ",\n" : "\n");
    }
    out << close << "}";
    return;
  }
  if (v.is_array() && !v.empty() && std::any_of(v.begin(), v.end(), compound)) {
    out << "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      out << pad << v[i].dump() << (i + 1 < v.size() ? ",\n" : "\n");
    }
    out << close << "]";
    return;
  }
  out << v.dump();
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": malformed JSON: " + e.what());
  }
}

std::string dump(const Json& doc) {
  std::ostringstream out;
  dump_into(out, doc, 0);
  out << "\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path.string() + ": cannot write file");
  out << content;
  if (!out) throw InputError(path.string() + ": write failed");
}

void write_json(const std::filesystem::path& path, const Json& doc) { write_text(path, dump(doc)); }

Json mesh_to_json(const mesh::MeshChunk& chunk) {
  Json doc = header();
  doc["kind"] = std::string(mesh::to_string(chunk.kind));
  doc["global_nodes"] = chunk.global_nodes;
  doc["global_elements"] = chunk.global_elements;
  const int dim = chunk.dimension();
  Json nodes = Json::array();
  for (const auto& n : chunk.nodes) {
    Json rec{n.id};
    for (int a = 0; a < dim; ++a) rec.push_back(n.x[a]);
    nodes.push_back(std::move(rec));
  }
  doc["nodes"] = std::move(nodes);
  Json elements = Json::array();
  Json weights = Json::array();
  for (const auto& e : chunk.elements) {
    Json rec{e.id, std::string(mesh::to_string(chunk.kind))};
    for (auto n : e.nodes) rec.push_back(n);
    elements.push_back(std::move(rec));
    if (e.weight != 1.0) weights.push_back(Json{e.id, e.weight});
  }
  doc["elements"] = std::move(elements);
  Json boundary = Json::array();
  for (const auto& b : chunk.boundary) {
    Json rec{b.tag};
    for (auto n : b.nodes) rec.push_back(n);
    boundary.push_back(std::move(rec));
  }
  doc["boundary"] = std::move(boundary);
  if (!weights.empty()) doc["weights"] = std::move(weights);
  return doc;
}

mesh::MeshChunk mesh_from_json(const Json& doc, const std::string& source, bool whole) {
  check_schema(doc, source);
  mesh::MeshChunk chunk;
  const auto& elements = array(field(doc, "elements", source), at(source, "elements"));
  std::optional<mesh::ElementKind> kind;
  if (doc.contains("kind")) {
    const auto name = text(doc["kind"], at(source, "kind"));
    kind = mesh::parse_kind(name);
    if (!kind) fail(at(source, "kind"), "unknown element kind \"" + name + "\"");
  } else if (!elements.empty() && elements[0].is_array() && elements[0].size() > 1) {
    const auto name = text(elements[0][1], at(at(source, "elements"), 0));
    kind = mesh::parse_kind(name);
  }
  chunk.kind = kind.value_or(mesh::ElementKind::triangle);
  const int dim = chunk.dimension();
  const auto per = static_cast<std::size_t>(mesh::nodes_per_element(chunk.kind));

  const auto& nodes = array(field(doc, "nodes", source), at(source, "nodes"));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto where = at(at(source, "nodes"), i);
    const auto& rec = array(nodes[i], where);
    if (rec.size() != static_cast<std::size_t>(dim) + 1 && rec.size() != 4) {
      fail(where, "expected [id, x, y" + std::string(dim == 3 ? ", z]" : "(, z)]"));
    }
    mesh::Node n{integer(rec[0], where), {}};
    for (std::size_t a = 1; a < rec.size(); ++a) n.x[a - 1] = real(rec[a], where);
    chunk.nodes.push_back(n);
  }
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const auto where = at(at(source, "elements"), i);
    const auto& rec = array(elements[i], where);
    if (rec.size() != per + 2) {
      fail(where, "expected [id, kind, " + std::to_string(per) + " node ids]");
    }
    const auto name = text(rec[1], where);
    if (mesh::parse_kind(name) != chunk.kind) {
      fail(where, "element kind \"" + name + "\" differs from the mesh kind \"" +
                      std::string(mesh::to_string(chunk.kind)) + "\"");
    }
    mesh::Element e{integer(rec[0], where), {}, 1.0};
    for (std::size_t k = 2; k < rec.size(); ++k) e.nodes.push_back(integer(rec[k], where));
    chunk.elements.push_back(std::move(e));
  }
  if (doc.contains("boundary")) {
    const auto& boundary = array(doc["boundary"], at(source, "boundary"));
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      const auto where = at(at(source, "boundary"), i);
      const auto& rec = array(boundary[i], where);
      if (rec.size() != static_cast<std::size_t>(mesh::face_size(chunk.kind)) + 1) {
        fail(where, "expected [tag, " + std::to_string(mesh::face_size(chunk.kind)) +
                        " node ids]");
      }
      mesh::BoundaryFace b{static_cast<int>(integer(rec[0], where)), {}, -1};
      for (std::size_t k = 1; k < rec.size(); ++k) b.nodes.push_back(integer(rec[k], where));
      chunk.boundary.push_back(std::move(b));
    }
  }
  if (doc.contains("weights")) {
    auto weights = weights_from_json(Json{{"schema", kSchema}, {"weights", doc["weights"]}},
                                     source);
    for (auto& e : chunk.elements) {
      if (auto it = weights.find(e.id); it != weights.end()) e.weight = it->second;
    }
  }
  if (whole) {
    chunk.global_nodes = static_cast<std::int64_t>(chunk.nodes.size());
    chunk.global_elements = static_cast<std::int64_t>(chunk.elements.size());
    try {
      mesh::validate(chunk);
    } catch (const InputError& e) {
      fail(source, e.what());
    }
  } else {
    chunk.global_nodes = integer(field(doc, "global_nodes", source), at(source, "global_nodes"));
    chunk.global_elements =
        integer(field(doc, "global_elements", source), at(source, "global_elements"));
  }
  try {
    mesh::attach_boundary(chunk);
  } catch (const InputError& e) {
    fail(source, e.what());
  }
  chunk.normalize();
  return chunk;
}

mesh::Mesh read_mesh(const std::filesystem::path& path) {
  return mesh_from_json(read_json(path), path.string(), true);
}

Json topology_to_json(const hwtopo::TopologyTree& tree) {
  Json doc = header();
  Json levels = Json::array();
  for (const auto& l : tree.levels()) levels.push_back(Json{{"name", l.name}, {"arity", l.arity}});
  doc["levels"] = std::move(levels);
  return doc;
}

hwtopo::TopologyTree topology_from_json(const Json& doc, const std::string& source) {
  check_schema(doc, source);
  const auto& levels = array(field(doc, "levels", source), at(source, "levels"));
  std::vector<hwtopo::Level> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto where = at(at(source, "levels"), i);
    out.push_back({text(field(levels[i], "name", where), at(where, "name")),
                   static_cast<int>(integer(field(levels[i], "arity", where), at(where, "arity")))});
  }
  try {
    return hwtopo::build_topology(out);
  } catch (const InputError& e) {
    fail(source, e.what());
  }
}

hwtopo::TopologyTree read_topology(const std::filesystem::path& path) {
  return topology_from_json(read_json(path), path.string());
}

Json assignment_to_json(const mesh::Assignment& assignment) {
  Json doc = header();
  Json list = Json::array();
  for (std::size_t e = 0; e < assignment.size(); ++e) {
    list.push_back(Json{static_cast<std::int64_t>(e), assignment[static_cast<mesh::ElementId>(e)]});
  }
  doc["assignment"] = std::move(list);
  return doc;
}

mesh::Assignment assignment_from_json(const Json& doc, const std::string& source,
                                      std::int64_t elements, int ranks) {
  check_schema(doc, source);
  const auto& list = array(field(doc, "assignment", source), at(source, "assignment"));
  mesh::Assignment out(static_cast<std::size_t>(elements));
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto where = at(at(source, "assignment"), i);
    const auto& rec = array(list[i], where);
    if (rec.size() != 2) fail(where, "expected [element, rank]");
    const auto e = integer(rec[0], where);
    const auto r = integer(rec[1], where);
    if (e < 0 || e >= elements) fail(where, "element " + std::to_string(e) + " is not in the mesh");
    if (r < 0 || r >= ranks) fail(where, "rank " + std::to_string(r) + " is not a leaf");
    if (out[e] != mesh::Assignment::kUnassigned) {
      fail(where, "element " + std::to_string(e) + " is assigned twice");
    }
    out.set(e, static_cast<int>(r));
  }
  for (std::int64_t e = 0; e < elements; ++e) {
    if (out[e] == mesh::Assignment::kUnassigned) {
      fail(source, "element " + std::to_string(e) + " is unassigned");
    }
  }
  return out;
}

Json weights_to_json(const balance::ElementWeights& weights) {
  Json doc = header();
  Json list = Json::array();
  for (const auto& [e, w] : weights) list.push_back(Json{e, w});
  doc["weights"] = std::move(list);
  return doc;
}

balance::ElementWeights weights_from_json(const Json& doc, const std::string& source) {
  check_schema(doc, source);
  const auto& list = array(field(doc, "weights", source), at(source, "weights"));
  balance::ElementWeights out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto where = at(at(source, "weights"), i);
    const auto& rec = array(list[i], where);
    if (rec.size() != 2) fail(where, "expected [element, weight]");
    const auto e = integer(rec[0], where);
    const auto w = real(rec[1], where);
    if (!(w > 0.0)) fail(where, "weight must be positive");
    if (!out.emplace(e, w).second) fail(where, "element " + std::to_string(e) + " listed twice");
  }
  return out;
}

Json timing_to_json(const std::vector<balance::BlockTiming>& timing) {
  Json doc = header();
  Json list = Json::array();
  for (const auto& b : timing) list.push_back(Json{{"elems", b.elements}, {"seconds", b.seconds}});
  doc["timing"] = std::move(list);
  return doc;
}

std::vector<balance::BlockTiming> timing_from_json(const Json& doc, const std::string& source) {
  check_schema(doc, source);
  const auto& list = array(field(doc, "timing", source), at(source, "timing"));
  std::vector<balance::BlockTiming> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto where = at(at(source, "timing"), i);
    balance::BlockTiming b;
    const auto& elems = array(field(list[i], "elems", where), at(where, "elems"));
    for (std::size_t k = 0; k < elems.size(); ++k) b.elements.push_back(integer(elems[k], where));
    b.seconds = real(field(list[i], "seconds", where), at(where, "seconds"));
    if (b.seconds < 0.0) fail(where, "negative time");
    out.push_back(std::move(b));
  }
  return out;
}

Json part_to_json(int part, const mesh::MeshChunk& chunk, const shhalo::HaloSchedule& schedule) {
  Json doc = header();
  doc["part"] = part;
  Json m = mesh_to_json(chunk);
  m.erase("schema");
  doc["mesh"] = std::move(m);
  Json neighbors = Json::array();
  for (const auto& nb : schedule.neighbors) {
    neighbors.push_back(Json{{"rank", nb.neighbor},
                             {"channel", locality_name(nb.channel)},
                             {"send", nb.send},
                             {"recv", nb.recv}});
  }
  doc["halo"] = Json{{"neighbors", std::move(neighbors)}};
  return doc;
}

std::pair<mesh::MeshChunk, shhalo::HaloSchedule> part_from_json(const Json& doc,
                                                                const std::string& source) {
  check_schema(doc, source);
  shhalo::HaloSchedule schedule;
  schedule.part = static_cast<int>(integer(field(doc, "part", source), at(source, "part")));
  Json m = field(doc, "mesh", source);
  m["schema"] = kSchema;
  auto chunk = mesh_from_json(m, at(source, "mesh"), false);
  const auto where = at(source, "halo");
  const auto& neighbors =
      array(field(field(doc, "halo", source), "neighbors", where), at(where, "neighbors"));
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    const auto w = at(at(where, "neighbors"), i);
    const auto& n = neighbors[i];
    shhalo::NeighborSchedule nb;
    nb.neighbor = static_cast<int>(integer(field(n, "rank", w), at(w, "rank")));
    nb.channel = parse_locality(field(n, "channel", w), at(w, "channel"));
    for (const auto& v : array(field(n, "send", w), at(w, "send"))) nb.send.push_back(integer(v, w));
    for (const auto& v : array(field(n, "recv", w), at(w, "recv"))) nb.recv.push_back(integer(v, w));
    schedule.neighbors.push_back(std::move(nb));
  }
  return {std::move(chunk), std::move(schedule)};
}

Json report_to_json(const metrics::Report& r) {
  Json doc;
  doc["parts"] = r.parts;
  doc["elements"] = r.elements;
  doc["edge_cut"] = r.edge_cut;
  doc["element_imbalance"] = r.element_imbalance;
  doc["weight_imbalance"] = r.weight_imbalance;
  doc["comm_imbalance"] = r.comm_imbalance;
  doc["delta_p"] = Json{{"1", r.delta_p1}, {"2", r.delta_p2}};
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back(Json{{"from", p.from},
                         {"to", p.to},
                         {"nodes", p.nodes},
                         {"bytes", p.bytes},
                         {"locality", locality_name(p.locality)}});
  }
  doc["comm_pairs"] = std::move(pairs);
  Json traffic = Json::array();
  for (const auto& t : r.traffic) {
    traffic.push_back(Json{{"phase", t.phase},
                           {"messages", t.messages},
                           {"internode_bytes", t.internode_bytes},
                           {"intranode_bytes", t.intranode_bytes},
                           {"shared_copy_bytes", t.shared_copy_bytes}});
  }
  doc["traffic"] = std::move(traffic);
  Json levels = Json::array();
  for (const auto& l : r.levels) {
    levels.push_back(Json{{"level", l.level}, {"bytes", l.bytes}, {"seconds_proxy", l.seconds_proxy}});
  }
  doc["levels"] = std::move(levels);
  doc["halo"] = Json{{"predicted_internode_bytes", r.halo_predicted_internode_bytes},
                     {"ledger_internode_bytes", r.halo_ledger_internode_bytes}};
  return doc;
}

metrics::Report report_from_json(const Json& doc, const std::string& source) {
  auto u64 = [&](const Json& v, const std::string& where) {
    const auto x = integer(v, where);
    if (x < 0) fail(where, "expected a non-negative integer");
    return static_cast<std::uint64_t>(x);
  };
  metrics::Report r;
  r.parts = static_cast<int>(integer(field(doc, "parts", source), at(source, "parts")));
  r.elements = integer(field(doc, "elements", source), at(source, "elements"));
  r.edge_cut = integer(field(doc, "edge_cut", source), at(source, "edge_cut"));
  r.element_imbalance =
      real(field(doc, "element_imbalance", source), at(source, "element_imbalance"));
  r.weight_imbalance = real(field(doc, "weight_imbalance", source), at(source, "weight_imbalance"));
  r.comm_imbalance = real(field(doc, "comm_imbalance", source), at(source, "comm_imbalance"));
  const auto& dp = field(doc, "delta_p", source);
  r.delta_p1 = real(field(dp, "1", at(source, "delta_p")), at(source, "delta_p"));
  r.delta_p2 = real(field(dp, "2", at(source, "delta_p")), at(source, "delta_p"));
  const auto& pairs = array(field(doc, "comm_pairs", source), at(source, "comm_pairs"));
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto w = at(at(source, "comm_pairs"), i);
    const auto& p = pairs[i];
    r.pairs.push_back({static_cast<int>(integer(field(p, "from", w), w)),
                       static_cast<int>(integer(field(p, "to", w), w)),
                       static_cast<std::size_t>(u64(field(p, "nodes", w), w)),
                       u64(field(p, "bytes", w), w), parse_locality(field(p, "locality", w), w)});
  }
  const auto& traffic = array(field(doc, "traffic", source), at(source, "traffic"));
  for (std::size_t i = 0; i < traffic.size(); ++i) {
    const auto w = at(at(source, "traffic"), i);
    const auto& t = traffic[i];
    r.traffic.push_back({text(field(t, "phase", w), w), u64(field(t, "messages", w), w),
                         u64(field(t, "internode_bytes", w), w),
                         u64(field(t, "intranode_bytes", w), w),
                         u64(field(t, "shared_copy_bytes", w), w)});
  }
  const auto& levels = array(field(doc, "levels", source), at(source, "levels"));
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto w = at(at(source, "levels"), i);
    const auto& l = levels[i];
    r.levels.push_back({static_cast<int>(integer(field(l, "level", w), w)),
                        u64(field(l, "bytes", w), w), real(field(l, "seconds_proxy", w), w)});
  }
  const auto& halo = field(doc, "halo", source);
  r.halo_predicted_internode_bytes =
      u64(field(halo, "predicted_internode_bytes", at(source, "halo")), at(source, "halo"));
  r.halo_ledger_internode_bytes =
      u64(field(halo, "ledger_internode_bytes", at(source, "halo")), at(source, "halo"));
  return r;
}

std::string level_cost_csv(const std::vector<metrics::LevelCost>& levels) {
  std::ostringstream out;
  out << "level,bytes,seconds_proxy\n";
  out << std::setprecision(17);
  for (const auto& l : levels) out << l.level << ',' << l.bytes << ',' << l.seconds_proxy << '\n';
  return out.str();
}

std::string balance_hist_csv(const std::vector<double>& pre, const std::vector<double>& post) {
  auto normalized = [](const std::vector<double>& w) {
    std::vector<double> out(w.size(), 1.0);
    double total = 0.0;
    for (double x : w) total += x;
    if (total > 0.0) {
      const double mean = total / static_cast<double>(w.size());
      for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / mean;
    }
    return out;
  };
  const auto a = normalized(pre);
  const auto b = normalized(post);
  std::ostringstream out;
  out << "partition,pre,post\n" << std::setprecision(17);
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    out << i << ',' << (i < a.size() ? a[i] : 0.0) << ',' << (i < b.size() ? b[i] : 0.0) << '\n';
  }
  return out.str();
}

}  // namespace treepart::io
