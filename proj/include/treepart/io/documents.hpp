#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "treepart/balance/balance.hpp"
#include "treepart/hwtopo/topology.hpp"
#include "treepart/mesh/mesh.hpp"
#include "treepart/metrics/metrics.hpp"
#include "treepart/shhalo/halo.hpp"

namespace treepart::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "treepart-1";

/// Parses a file; malformed JSON becomes an InputError naming the file.
Json read_json(const std::filesystem::path& path);

/**
 * Indented output with one record per line: objects put each member on its
 * own line, arrays of arrays or objects put each element on its own line.
 */
std::string dump(const Json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

// Each from_json takes a `source` label used in diagnostics ("<source>: elements[3]: ...").

/// {"schema", "kind", "nodes": [[id,x,y(,z)]], "elements": [[id,kind,n...]],
///  "boundary": [[tag,n...]]}; optional "weights": [[elem,w]] for non-unit
/// element weights and "global_nodes"/"global_elements" for chunks.
Json mesh_to_json(const mesh::MeshChunk& chunk);
mesh::MeshChunk mesh_from_json(const Json& doc, const std::string& source, bool whole = true);
mesh::Mesh read_mesh(const std::filesystem::path& path);

/// {"schema", "levels": [{"name", "arity"}]}
Json topology_to_json(const hwtopo::TopologyTree& tree);
hwtopo::TopologyTree topology_from_json(const Json& doc, const std::string& source);
hwtopo::TopologyTree read_topology(const std::filesystem::path& path);

/// {"schema", "assignment": [[elem, rank]]}
Json assignment_to_json(const mesh::Assignment& assignment);
/// Requires every element in [0, elements) exactly once and ranks in [0, ranks).
mesh::Assignment assignment_from_json(const Json& doc, const std::string& source,
                                      std::int64_t elements, int ranks);

/// {"schema", "weights": [[elem, w]]}
Json weights_to_json(const balance::ElementWeights& weights);
balance::ElementWeights weights_from_json(const Json& doc, const std::string& source);

/// {"schema", "timing": [{"elems": [...], "seconds": s}]}
Json timing_to_json(const std::vector<balance::BlockTiming>& timing);
std::vector<balance::BlockTiming> timing_from_json(const Json& doc, const std::string& source);

/// {"schema", "part", "mesh": <mesh>, "halo": {"neighbors": [{"rank","channel","send","recv"}]}}
Json part_to_json(int part, const mesh::MeshChunk& chunk, const shhalo::HaloSchedule& schedule);
std::pair<mesh::MeshChunk, shhalo::HaloSchedule> part_from_json(const Json& doc,
                                                                const std::string& source);

/// Report body: quality metrics, per-pair volumes, per-phase traffic and per-level costs.
Json report_to_json(const metrics::Report& report);
metrics::Report report_from_json(const Json& doc, const std::string& source);

std::string level_cost_csv(const std::vector<metrics::LevelCost>& levels);
/// partition,pre,post with each part's weight divided by the mean part weight.
std::string balance_hist_csv(const std::vector<double>& pre, const std::vector<double>& post);

}  // namespace treepart::io
