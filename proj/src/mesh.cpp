#include "qles/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qles {

namespace {

void check_axis(double a, double b, int n) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(b > a))
        throw InputError("mesh extent must satisfy a < b with finite ends");
    if (n < 1) throw InputError("mesh needs at least one interior node per axis");
}

void require_same_mesh(const Field& a, const Field& b) {
    if (a.mesh != b.mesh) throw InputError("fields live on different meshes");
}

}  // namespace

std::shared_ptr<const Mesh> Mesh::interval(double a, double b, int n) {
    check_axis(a, b, n);
    auto m = std::shared_ptr<Mesh>(new Mesh());
    m->dim_ = 1;
    m->lo_ = {a, 0.0};
    m->hi_ = {b, 0.0};
    m->n_ = {n, 0};
    m->finish();
    return m;
}

std::shared_ptr<const Mesh> Mesh::rectangle(std::array<double, 2> lo, std::array<double, 2> hi,
                                            std::array<int, 2> n) {
    check_axis(lo[0], hi[0], n[0]);
    check_axis(lo[1], hi[1], n[1]);
    auto m = std::shared_ptr<Mesh>(new Mesh());
    m->dim_ = 2;
    m->lo_ = lo;
    m->hi_ = hi;
    m->n_ = n;
    m->finish();
    return m;
}

void Mesh::finish() {
    for (int a = 0; a < 2; ++a) {
        if (a < dim_) {
            nodes_[a] = n_[a] + 2;
            h_[a] = (hi_[a] - lo_[a]) / (n_[a] + 1);
        } else {
            nodes_[a] = 1;
            h_[a] = 1.0;
        }
    }
    const std::size_t total = static_cast<std::size_t>(nodes_[0]) * static_cast<std::size_t>(nodes_[1]);
    weights_.assign(total, 0.0);
    boundary_.assign(total, 0);
    interior_.clear();
    for (int j = 0; j < nodes_[1]; ++j) {
        for (int i = 0; i < nodes_[0]; ++i) {
            const std::size_t k = index(i, j);
            const bool bx = i == 0 || i == nodes_[0] - 1;
            const bool by = dim_ == 2 && (j == 0 || j == nodes_[1] - 1);
            double w = h_[0] * (bx ? 0.5 : 1.0);
            if (dim_ == 2) w *= h_[1] * (by ? 0.5 : 1.0);
            weights_[k] = w;
            boundary_[k] = (bx || by) ? 1 : 0;
            if (!boundary_[k]) interior_.push_back(k);
        }
    }
}

double Mesh::coord(std::size_t node, int axis) const {
    if (axis >= dim_) return 0.0;
    const auto nx = static_cast<std::size_t>(nodes_[0]);
    const std::size_t i = axis == 0 ? node % nx : node / nx;
    return lo_[axis] + static_cast<double>(i) * h_[axis];
}

double Mesh::measure() const {
    double m = hi_[0] - lo_[0];
    if (dim_ == 2) m *= hi_[1] - lo_[1];
    return m;
}

std::size_t Mesh::num_elements() const {
    if (dim_ == 1) return static_cast<std::size_t>(cells(0));
    return 2 * static_cast<std::size_t>(cells(0)) * static_cast<std::size_t>(cells(1));
}

double Mesh::element_measure() const { return dim_ == 1 ? h_[0] : 0.5 * h_[0] * h_[1]; }

Field::Field(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh) throw InputError("field without mesh");
    if (values.size() != mesh->size()) throw InputError("field size does not match mesh");
}

Field Field::constant(MeshPtr m, double c) {
    Field f(std::move(m));
    std::fill(f.values.begin(), f.values.end(), c);
    return f;
}

Field Field::sample(MeshPtr m, const std::function<double(double, double)>& fn) {
    Field f(std::move(m));
    for (std::size_t k = 0; k < f.size(); ++k) f[k] = fn(f.mesh->coord(k, 0), f.mesh->coord(k, 1));
    return f;
}

bool Field::is_dirichlet() const {
    const auto& mask = mesh->boundary_mask();
    for (std::size_t k = 0; k < values.size(); ++k)
        if (mask[k] && values[k] != 0.0) return false;
    return true;
}

Field& Field::zero_boundary() {
    const auto& mask = mesh->boundary_mask();
    for (std::size_t k = 0; k < values.size(); ++k)
        if (mask[k]) values[k] = 0.0;
    return *this;
}

Field operator+(const Field& a, const Field& b) {
    require_same_mesh(a, b);
    Field r(a.mesh);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k] + b[k];
    return r;
}

Field operator-(const Field& a, const Field& b) {
    require_same_mesh(a, b);
    Field r(a.mesh);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[k] - b[k];
    return r;
}

Field operator*(double c, const Field& a) {
    Field r(a.mesh);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = c * a[k];
    return r;
}

ElementGradients element_gradients(const Field& f) {
    const Mesh& m = *f.mesh;
    const auto& z = f.values;
    ElementGradients g;
    if (m.dim() == 1) {
        const int nc = m.cells(0);
        const double inv = 1.0 / m.spacing()[0];
        g.gx.resize(static_cast<std::size_t>(nc));
        for (int i = 0; i < nc; ++i) g.gx[i] = (z[i + 1] - z[i]) * inv;
        return g;
    }
    const int cx = m.cells(0), cy = m.cells(1);
    const std::size_t ncell = static_cast<std::size_t>(cx) * static_cast<std::size_t>(cy);
    const double ihx = 1.0 / m.spacing()[0], ihy = 1.0 / m.spacing()[1];
    g.gx.resize(2 * ncell);
    g.gy.resize(2 * ncell);
    for (int j = 0; j < cy; ++j) {
        for (int i = 0; i < cx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * cx + i;
            const double z00 = z[m.index(i, j)], z10 = z[m.index(i + 1, j)];
            const double z01 = z[m.index(i, j + 1)], z11 = z[m.index(i + 1, j + 1)];
            g.gx[c] = (z10 - z00) * ihx;
            g.gy[c] = (z01 - z00) * ihy;
            g.gx[ncell + c] = (z11 - z01) * ihx;
            g.gy[ncell + c] = (z11 - z10) * ihy;
        }
    }
    return g;
}

std::vector<std::array<double, 2>> gradient(const Field& f) {
    const Mesh& m = *f.mesh;
    for (int a = 0; a < m.dim(); ++a)
        if (m.interior_counts()[a] < 3) throw InputError("mesh too coarse");
    const auto& z = f.values;
    std::vector<std::array<double, 2>> out(f.size(), {0.0, 0.0});
    const auto& nn = m.node_counts();
    for (int a = 0; a < m.dim(); ++a) {
        const double h = m.spacing()[a];
        for (int j = 0; j < nn[1]; ++j) {
            for (int i = 0; i < nn[0]; ++i) {
                const int c = a == 0 ? i : j;
                const int last = nn[a] - 1;
                auto at = [&](int s) { return a == 0 ? z[m.index(s, j)] : z[m.index(i, s)]; };
                double d;
                if (c == 0)
                    d = (at(1) - at(0)) / h;
                else if (c == last)
                    d = (at(last) - at(last - 1)) / h;
                else
                    d = (at(c + 1) - at(c - 1)) / (2.0 * h);
                out[m.index(i, j)][a] = d;
            }
        }
    }
    return out;
}

Field divergence(const MeshPtr& mesh, const std::vector<double>& fx, const std::vector<double>& fy) {
    const Mesh& m = *mesh;
    if (fx.size() != m.num_elements() || (m.dim() == 2 && fy.size() != m.num_elements()))
        throw InputError("flux size does not match element count");
    Field out(mesh);
    auto& acc = out.values;
    const double area = m.element_measure();
    if (m.dim() == 1) {
        const double s = area / m.spacing()[0];
        for (int i = 0; i < m.cells(0); ++i) {
            acc[i] -= s * fx[i];
            acc[i + 1] += s * fx[i];
        }
    } else {
        const int cx = m.cells(0), cy = m.cells(1);
        const std::size_t ncell = static_cast<std::size_t>(cx) * static_cast<std::size_t>(cy);
        const double sx = area / m.spacing()[0], sy = area / m.spacing()[1];
        for (int j = 0; j < cy; ++j) {
            for (int i = 0; i < cx; ++i) {
                const std::size_t c = static_cast<std::size_t>(j) * cx + i;
                const std::size_t n00 = m.index(i, j), n10 = m.index(i + 1, j);
                const std::size_t n01 = m.index(i, j + 1), n11 = m.index(i + 1, j + 1);
                acc[n10] += sx * fx[c];
                acc[n00] -= sx * fx[c];
                acc[n01] += sy * fy[c];
                acc[n00] -= sy * fy[c];
                acc[n11] += sx * fx[ncell + c];
                acc[n01] -= sx * fx[ncell + c];
                acc[n11] += sy * fy[ncell + c];
                acc[n10] -= sy * fy[ncell + c];
            }
        }
    }
    // acc now holds sum_e |e| F_e . grad(phi_i); divergence is its negative over w_i.
    const auto& w = m.quad_weights();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] = -acc[k] / w[k];
    return out;
}

double integrate(const Field& f) {
    const auto& w = f.mesh->quad_weights();
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) s += w[k] * f[k];
    return s;
}

double norm_Lr(const Field& f, double r) {
    if (std::isnan(r) || r < 1.0) throw InputError("norm_Lr requires r >= 1");
    double mx = 0.0;
    for (double v : f.values) mx = std::max(mx, std::abs(v));
    if (std::isinf(r) || mx == 0.0) return mx;
    // Scale by the max so large exponents do not overflow.
    const auto& w = f.mesh->quad_weights();
    double s = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double a = std::abs(f[k]) / mx;
        if (a > 0.0) s += w[k] * std::pow(a, r);
    }
    return mx * std::pow(s, 1.0 / r);
}

double dirichlet_integral(const ElementGradients& g, const Mesh& mesh, double p) {
    const double area = mesh.element_measure();
    double s = 0.0;
    for (std::size_t e = 0; e < g.gx.size(); ++e) {
        const double sq = g.sq(e);
        if (sq > 0.0) s += std::pow(sq, 0.5 * p);
    }
    return area * s;
}

double norm_W1p(const Field& f, double p) {
    if (!(p > 1.0)) throw InputError("norm_W1p requires p > 1");
    if (!f.is_dirichlet())
        throw InputError("norm_W1p requires a field with zero boundary values");
    return std::pow(dirichlet_integral(element_gradients(f), *f.mesh, p), 1.0 / p);
}

Field resample_linear(const Field& f, const MeshPtr& target) {
    const Mesh& src = *f.mesh;
    if (src.dim() != target->dim() || src.lo() != target->lo() || src.hi() != target->hi())
        throw InputError("resampling requires meshes over the same domain");
    auto locate = [&](double x, int axis, int& i0, double& t) {
        const double s = (x - src.lo()[axis]) / src.spacing()[axis];
        const int last = src.node_counts()[axis] - 1;
        i0 = std::clamp(static_cast<int>(std::floor(s)), 0, last - 1);
        t = std::clamp(s - i0, 0.0, 1.0);
    };
    Field out(target);
    for (std::size_t k = 0; k < out.size(); ++k) {
        int i0 = 0, j0 = 0;
        double tx = 0.0, ty = 0.0;
        locate(target->coord(k, 0), 0, i0, tx);
        if (src.dim() == 1) {
            out[k] = (1 - tx) * f[src.index(i0)] + tx * f[src.index(i0 + 1)];
        } else {
            locate(target->coord(k, 1), 1, j0, ty);
            out[k] = (1 - tx) * (1 - ty) * f[src.index(i0, j0)] + tx * (1 - ty) * f[src.index(i0 + 1, j0)] +
                     (1 - tx) * ty * f[src.index(i0, j0 + 1)] + tx * ty * f[src.index(i0 + 1, j0 + 1)];
        }
    }
    return out;
}

}  // namespace qles
