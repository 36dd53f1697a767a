#pragma once

#include "cutwave/curves.hpp"
#include "cutwave/geometry.hpp"

#include <string>
#include <vector>

namespace cutwave {

enum class ElementKind { Cartesian, Cut, Excluded };

const char* to_string(ElementKind kind);

// Cell sides in counterclockwise order starting at the bottom.
enum class Side { Bottom = 0, Right = 1, Top = 2, Left = 3 };

struct FaceTag {
  enum class Kind { Interior, Domain, Curve } kind = Kind::Interior;
  int index = -1; // Side for Domain, curve id for Curve
};

struct Face {
  bool curved = false;
  Vec2 a, b; // traversal start and end, fluid on the left

  // Straight faces: the cell side they lie on.
  Side side = Side::Bottom;

  // Curved faces: curve id and parameter interval s0 < s1. `forward` means
  // the face runs from s0 to s1.
  int curve = -1;
  double s0 = 0.0, s1 = 0.0;
  bool forward = true;

  FaceTag tag;
  int neighbor = -1; // element id across an interior face
  int twin = -1;     // index of the matching face in the neighbor
};

struct Element {
  int id = -1;
  int cell_i = 0, cell_j = 0;
  ElementKind kind = ElementKind::Cartesian;
  std::vector<Face> faces;
  double volume = 0.0; // from the boundary integral; replaced by the volume rule sum later
  Vec2 centroid = Vec2::Zero();
  Box2 bbox;
  std::vector<std::vector<Vec2>> outline; // closed polylines of the face loops
};

struct MeshOptions {
  bool periodic_x = false;
  bool periodic_y = false;
  IntersectionOptions intersection;
};

struct CutMesh {
  BackgroundGrid grid;
  MeshOptions options;
  std::vector<ParametricCurve> curves;
  std::vector<CurveMeshIntersections> intersections;
  std::vector<ElementKind> cell_kind; // per background cell
  std::vector<int> cell_to_element;   // -1 for excluded cells
  std::vector<Element> elements;

  int element_count() const { return static_cast<int>(elements.size()); }
  const Element& element_at(int i, int j) const { return elements.at(cell_to_element.at(grid.cell_id(i, j))); }
};

// Point on the closed face loops of an element (winding number of the outline).
bool element_contains(const Element& e, const Vec2& p);

// True when p is on the excluded side of any curve.
bool point_excluded(const std::vector<ParametricCurve>& curves, const Vec2& p);

std::vector<ElementKind> classify_cells(const BackgroundGrid& grid, const std::vector<CurveMeshIntersections>& intersections,
                                        const std::vector<ParametricCurve>& curves);

// Faces of the fluid region inside one background cell, as closed counterclockwise
// loops. Empty result means the cell holds no fluid.
std::vector<std::vector<Face>> build_cut_faces(const BackgroundGrid& grid, int i, int j,
                                               const std::vector<ParametricCurve>& curves,
                                               const std::vector<CurveMeshIntersections>& intersections);

// Fills neighbor/twin/tag for every face. Throws UnmatchedFace.
void connect(CutMesh& mesh);

CutMesh build_cut_mesh(const BackgroundGrid& grid, std::vector<ParametricCurve> curves, const MeshOptions& options = {});

// Point and d/dt along a face, t in [0,1] from a to b.
Vec2 face_position(const std::vector<ParametricCurve>& curves, const Face& f, double t);
Vec2 face_derivative(const std::vector<ParametricCurve>& curves, const Face& f, double t);

// Arclength of a face (adaptive for curved faces).
double face_length(const CutMesh& mesh, const Face& f);

void write_mesh_csv(const CutMesh& mesh, const std::string& element_path, const std::string& face_path);

} // namespace cutwave
