#include "treepart/mesh/generate.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <string>

namespace treepart::mesh {

namespace {

void check_extent(int n, const char* axis) {
  if (n < 1) throw InputError(std::string("generator: ") + axis + " extent must be >= 1");
}

// Faces used by exactly one element, tagged by the box side all their nodes lie on.
void add_box_boundary(Mesh& mesh, const Point& hi) {
  const int dim = mesh.dimension();
  std::map<std::vector<NodeId>, int> uses;
  for (const auto& e : mesh.elements) {
    for (std::size_t skip = 0; skip < e.nodes.size(); ++skip) {
      std::vector<NodeId> face;
      for (std::size_t k = 0; k < e.nodes.size(); ++k) {
        if (k != skip) face.push_back(e.nodes[k]);
      }
      std::sort(face.begin(), face.end());
      ++uses[face];
    }
  }
  for (const auto& [face, count] : uses) {
    if (count != 1) continue;
    int tag = 0;
    for (int axis = 0; axis < dim && tag == 0; ++axis) {
      for (int side = 0; side < 2 && tag == 0; ++side) {
        const double plane = side == 0 ? 0.0 : hi[axis];
        const bool on = std::all_of(face.begin(), face.end(), [&](NodeId n) {
          return mesh.nodes[static_cast<std::size_t>(n)].x[axis] == plane;
        });
        if (on) tag = axis * 2 + side + 1;
      }
    }
    mesh.boundary.push_back({tag, face, -1});
  }
  if (dim == 2) {
    // Tags follow the counter-clockwise side order 1 bottom, 2 right, 3 top, 4 left.
    constexpr std::array<int, 5> remap{0, 4, 2, 1, 3};
    for (auto& b : mesh.boundary) b.tag = remap[b.tag];
  }
  attach_boundary(mesh);
}

}  // namespace

Mesh triangle_grid(int nx, int ny) {
  check_extent(nx, "x");
  check_extent(ny, "y");
  Mesh mesh;
  mesh.kind = ElementKind::triangle;
  auto id = [&](int i, int j) { return static_cast<NodeId>(j) * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) mesh.nodes.push_back({id(i, j), {double(i), double(j), 0.0}});
  }
  ElementId next = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.elements.push_back({next++, {id(i, j), id(i + 1, j), id(i + 1, j + 1)}, 1.0});
      mesh.elements.push_back({next++, {id(i, j), id(i + 1, j + 1), id(i, j + 1)}, 1.0});
    }
  }
  mesh.global_nodes = static_cast<std::int64_t>(mesh.nodes.size());
  mesh.global_elements = next;
  add_box_boundary(mesh, {double(nx), double(ny), 0.0});
  return mesh;
}

Mesh tet_box(int nx, int ny, int nz) {
  check_extent(nx, "x");
  check_extent(ny, "y");
  check_extent(nz, "z");
  Mesh mesh;
  mesh.kind = ElementKind::tetrahedron;
  auto id = [&](int i, int j, int k) {
    return (static_cast<NodeId>(k) * (ny + 1) + j) * (nx + 1) + i;
  };
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        mesh.nodes.push_back({id(i, j, k), {double(i), double(j), double(k)}});
      }
    }
  }
  constexpr std::array<std::array<int, 3>, 6> orders{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  ElementId next = 0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        for (const auto& order : orders) {
          std::array<int, 3> at{i, j, k};
          Element e{next++, {id(at[0], at[1], at[2])}, 1.0};
          for (int axis : order) {
            ++at[axis];
            e.nodes.push_back(id(at[0], at[1], at[2]));
          }
          mesh.elements.push_back(std::move(e));
        }
      }
    }
  }
  mesh.global_nodes = static_cast<std::int64_t>(mesh.nodes.size());
  mesh.global_elements = next;
  add_box_boundary(mesh, {double(nx), double(ny), double(nz)});
  return mesh;
}

}  // namespace treepart::mesh
