#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "thermolab/fields.hpp"

namespace thermolab {

/// Triangulation of the fundamental octagon: 8 fan triangles (0, v_k, v_{k+1})
/// each subdivided into n^2 triangles with geodesically spaced vertices.
/// Boundary vertices on paired sides are identified so the mesh describes the
/// closed surface.
struct OctagonMesh {
    int n = 0;
    std::vector<Complex> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::pair<int, int>> identifications;  // (vertex, partner) across paired sides
    std::vector<int> cls;                              // vertex -> class index on the surface
    int n_classes = 0;
    std::vector<double> tri_area;       // hyperbolic (curvature -1)
    std::vector<Complex> tri_centroid;  // Lorentzian barycenter

    static OctagonMesh build(const FuchsianGroup& g, int n);

    std::size_t n_edges_surface() const;
    int euler_characteristic() const;
    double total_area() const;
    /// Class vertex areas: one third of the incident hyperbolic triangle areas.
    std::vector<double> lumped_mass() const;

    /// Triangle containing the chart point z (within the octagon) and its
    /// barycentric coordinates; -1 when z is outside every triangle.
    int locate(Complex z, std::array<double, 3>* bary = nullptr) const;

    void write(std::ostream& os) const;
    static OctagonMesh read(std::istream& is, const FuchsianGroup& g);

  private:
    void build_locator();
    std::vector<std::vector<int>> buckets_;
    int bucket_n_ = 0;
    double bucket_h_ = 0;
};

/// Piecewise-linear field over the mesh, one value per vertex class,
/// extended to the disk by the group action.
class MeshLinearField final : public ScalarField {
  public:
    MeshLinearField(std::shared_ptr<const OctagonMesh> mesh, std::shared_ptr<const FuchsianGroup> group,
                    std::vector<double> class_values);
    Jet jet(Complex z) const override;
    json describe() const override;
    const std::vector<double>& class_values() const { return values_; }

  private:
    std::shared_ptr<const OctagonMesh> mesh_;
    std::shared_ptr<const FuchsianGroup> group_;
    std::vector<double> values_;
};

}  // namespace thermolab
