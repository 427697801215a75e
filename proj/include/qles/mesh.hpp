#pragma once

// Uniform tensor grids on an interval or rectangle, nodal fields, and the
// discrete calculus everything else is written in.
//
// Nodes include the boundary. Energies and W^{1,p} norms use piecewise-linear
// element gradients: one element per cell in 1D, two right triangles per cell
// in 2D (lower-left and upper-right of the cell diagonal). Quadrature weights
// are the trapezoid (lumped-mass) nodal weights.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace qles {

/// Thrown for inputs outside an operation's admissible window.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an iteration produces non-finite values.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Mesh {
  public:
    static std::shared_ptr<const Mesh> interval(double a, double b, int n);
    static std::shared_ptr<const Mesh> rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                                                 std::array<int, 2> n);

    int dim() const { return dim_; }
    const std::array<double, 2>& lo() const { return lo_; }
    const std::array<double, 2>& hi() const { return hi_; }
    /// Interior node count per axis.
    const std::array<int, 2>& interior_counts() const { return n_; }
    /// Node count per axis including both boundary nodes (1 on an unused axis).
    const std::array<int, 2>& node_counts() const { return nodes_; }
    const std::array<double, 2>& spacing() const { return h_; }

    std::size_t size() const { return weights_.size(); }
    std::size_t index(int i, int j = 0) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nodes_[0]) +
               static_cast<std::size_t>(i);
    }
    double coord(std::size_t node, int axis) const;

    const std::vector<double>& quad_weights() const { return weights_; }
    bool on_boundary(std::size_t node) const { return boundary_[node] != 0; }
    const std::vector<std::uint8_t>& boundary_mask() const { return boundary_; }
    const std::vector<std::size_t>& interior_nodes() const { return interior_; }

    double measure() const;

    /// Cells per axis (node count minus one).
    int cells(int axis) const { return nodes_[axis] - 1; }
    /// 1D: one element per cell. 2D: lower-left triangles [0, ncell) followed
    /// by upper-right triangles [ncell, 2 ncell), cells row-major.
    std::size_t num_elements() const;
    double element_measure() const;

  private:
    Mesh() = default;
    void finish();

    int dim_ = 1;
    std::array<double, 2> lo_{0.0, 0.0};
    std::array<double, 2> hi_{1.0, 0.0};
    std::array<int, 2> n_{1, 0};
    std::array<int, 2> nodes_{3, 1};
    std::array<double, 2> h_{0.5, 1.0};
    std::vector<double> weights_;
    std::vector<std::uint8_t> boundary_;
    std::vector<std::size_t> interior_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal scalar function on a mesh.
struct Field {
    MeshPtr mesh;
    std::vector<double> values;

    Field() = default;
    explicit Field(MeshPtr m) : mesh(std::move(m)), values(mesh->size(), 0.0) {}
    Field(MeshPtr m, std::vector<double> v);

    static Field constant(MeshPtr m, double c);
    static Field sample(MeshPtr m, const std::function<double(double, double)>& fn);

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    /// True when every boundary value is exactly zero (a W^{1,p}_0 member).
    bool is_dirichlet() const;
    Field& zero_boundary();
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

/// Per-element constant gradient of the piecewise-linear interpolant.
struct ElementGradients {
    std::vector<double> gx;
    std::vector<double> gy;  // empty in 1D
    double sq(std::size_t e) const { return gy.empty() ? gx[e] * gx[e] : gx[e] * gx[e] + gy[e] * gy[e]; }
};

ElementGradients element_gradients(const Field& f);

/// Collocated nodal gradient: central differences at interior nodes,
/// one-sided differences on the boundary. Requires at least 3 interior nodes per axis.
std::vector<std::array<double, 2>> gradient(const Field& f);

/// Divergence of an element-wise constant flux, defined as the negative
/// transpose of the element gradient under the quadrature inner product:
///   sum_i w_i div(F)_i phi_i = - sum_e |e| F_e . grad(phi)_e   for all nodal phi.
Field divergence(const MeshPtr& mesh, const std::vector<double>& fx, const std::vector<double>& fy);

/// Quadrature sum of w_i f_i.
double integrate(const Field& f);

/// (sum_i w_i |u_i|^r)^{1/r}; r = +infinity gives max |u_i|.
double norm_Lr(const Field& f, double r);

/// (sum_e |e| |grad u|_e^p)^{1/p}; the field must be dirichlet.
double norm_W1p(const Field& f, double p);

/// sum_e |e| |grad u|_e^p without the root (the p-Dirichlet integral).
double dirichlet_integral(const ElementGradients& g, const Mesh& mesh, double p);

/// Linear (1D) or bilinear (2D) interpolation of a field onto another mesh
/// over the same domain.
Field resample_linear(const Field& f, const MeshPtr& target);

}  // namespace qles
