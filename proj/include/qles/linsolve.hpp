#pragma once

// Symmetric edge-coefficient operators of the form
//   (K z)_i = sum_{edges i~j} c_ij (z_i - z_j)
// which is exactly the stiffness matrix of sum_e |e| a_e grad(z).grad(phi) for
// element-wise constant diffusivity a_e on the meshes of mesh.hpp, plus the
// Dirichlet solvers used for them.

#include <memory>
#include <span>
#include <vector>

#include "qles/mesh.hpp"

namespace qles {

class EdgeOperator {
  public:
    explicit EdgeOperator(MeshPtr mesh);

    /// Edge coefficients from per-element diffusivities (size num_elements()).
    void assemble(std::span<const double> elem_coeff);
    void set_constant(double a);

    /// y = K x on interior rows; boundary rows of y are set to zero.
    void apply(std::span<const double> x, std::span<double> y) const;
    /// Diagonal of K at node k (interior nodes only).
    double diagonal(std::size_t node) const;

    const MeshPtr& mesh() const { return mesh_; }

    /// 1D: c[i] couples nodes i and i+1. 2D: cx[j*(nx-1)+i] couples (i,j)-(i+1,j),
    /// cy[j*nx+i] couples (i,j)-(i,j+1), with nx the node count along x.
    const std::vector<double>& cx() const { return cx_; }
    const std::vector<double>& cy() const { return cy_; }

  private:
    MeshPtr mesh_;
    std::vector<double> cx_;
    std::vector<double> cy_;
};

struct LinearSolveInfo {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = true;
};

struct LinearSolveOptions {
    double rtol = 1e-12;
    int max_iter = 2000;
};

/// Constant-coefficient Dirichlet Laplacian inverse on a 2D mesh via the
/// type-I sine transform. Thread-safe after construction.
class PoissonSolver {
  public:
    explicit PoissonSolver(const Mesh& mesh);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    /// x = L^{-1} r on interior nodes for L the operator with a == 1; boundary
    /// entries of x are set to zero. Arrays are node-indexed.
    void apply(std::span<const double> r, std::span<double> x) const;

  private:
    struct Plan;
    std::unique_ptr<Plan> plan_;
    int mx_ = 0;
    int my_ = 0;
    int nx_ = 0;
    std::vector<double> inv_eig_;
};

/// Shared per-shape solver (plans are cached; creation is serialized).
std::shared_ptr<const PoissonSolver> poisson_solver_for(const Mesh& mesh);

/// Solve K x = rhs on interior nodes with x = 0 on the boundary.
/// 1D: tridiagonal elimination (exact). 2D: conjugate gradients preconditioned
/// by the diagonally scaled constant-coefficient sine-transform solve; `x`
/// holds the initial guess on entry.
LinearSolveInfo solve_dirichlet(const EdgeOperator& K, std::span<const double> rhs, std::span<double> x,
                                const LinearSolveOptions& opt = {});

}  // namespace qles
