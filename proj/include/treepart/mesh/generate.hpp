#pragma once

#include "treepart/mesh/mesh.hpp"

namespace treepart::mesh {

/**
 * nx x ny unit squares on [0,nx] x [0,ny], each cut along its (0,0)-(1,1)
 * diagonal into two triangles: 2*nx*ny elements. Boundary edges are tagged
 * 1 (y=0), 2 (x=nx), 3 (y=ny), 4 (x=0).
 */
Mesh triangle_grid(int nx, int ny);

/**
 * nx x ny x nz unit cubes, each split into six tetrahedra around its main
 * diagonal (conforming across cubes): 6*nx*ny*nz elements. Boundary faces are
 * tagged 1..6 for the sides x=0, x=nx, y=0, y=ny, z=0, z=nz.
 */
Mesh tet_box(int nx, int ny, int nz);

}  // namespace treepart::mesh
