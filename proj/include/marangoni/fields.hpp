#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace marangoni {

/// Uniform rectangular mesh on [0, lx] x [0, ly]. Spacings are always derived.
class Grid {
public:
    Grid(int nx, int ny, double lx = 1.0, double ly = 1.0);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double dx() const { return lx_ / nx_; }
    double dy() const { return ly_ / ny_; }
    double cell_area() const { return dx() * dy(); }
    double area() const { return lx_ * ly_; }
    double min_spacing() const;

    /// Cell-center coordinates.
    double x(int i) const { return (i + 0.5) * dx(); }
    double y(int j) const { return (j + 0.5) * dy(); }

    std::size_t cells() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

    bool operator==(const Grid& other) const;
    bool operator!=(const Grid& other) const { return !(*this == other); }

private:
    int nx_;
    int ny_;
    double lx_;
    double ly_;
};

/// Values on the four edges, sampled at boundary face centers.
/// left/right have ny entries (indexed by j), bottom/top have nx entries (indexed by i).
struct BoundaryData {
    std::vector<double> left, right, bottom, top;

    static BoundaryData constant(const Grid& grid, double value);
    /// Samples `trace(x, y)` at the boundary face centers.
    static BoundaryData from_function(const Grid& grid,
                                      const std::function<double(double, double)>& trace);

    bool matches(const Grid& grid) const;
    double max_abs() const;
};

/// Throws std::invalid_argument unless |phi_b| <= 1 everywhere.
void validate_phase_boundary(const BoundaryData& phi_b);

enum class BoundaryKind { dirichlet, neumann };

/// Dirichlet ghosts use linear extrapolation (ghost = 2 g - interior); Neumann is homogeneous.
struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::dirichlet;
    BoundaryData values;

    static BoundaryCondition homogeneous_dirichlet(const Grid& grid);
    static BoundaryCondition dirichlet(const Grid& grid, double value);
    static BoundaryCondition dirichlet(BoundaryData values);
    static BoundaryCondition neumann(const Grid& grid);
};

/// Cell-centered scalar with its boundary condition.
struct ScalarField {
    Grid grid;
    std::vector<double> values;
    BoundaryCondition bc;

    ScalarField(const Grid& g, BoundaryCondition b);
    ScalarField(const Grid& g, BoundaryCondition b, std::vector<double> v);

    static ScalarField zeros(const Grid& g, BoundaryCondition b) { return ScalarField(g, std::move(b)); }
    /// Samples f at cell centers.
    static ScalarField from_function(const Grid& g, BoundaryCondition b,
                                     const std::function<double(double, double)>& f);

    double& operator()(int i, int j) { return values[grid.index(i, j)]; }
    double operator()(int i, int j) const { return values[grid.index(i, j)]; }

    double min() const;
    double max() const;
    double max_abs() const;
    double mean() const;
    bool finite() const;
    /// Same grid, same boundary condition, new values.
    ScalarField with_values(std::vector<double> v) const;
};

/// MAC-staggered velocity: u on vertical faces ((nx+1) x ny), v on horizontal faces (nx x (ny+1)).
/// The tangential wall values (u along bottom/top, v along left/right) close the
/// corner stencils; they are zero for no-slip.
struct VectorField {
    Grid grid;
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> u_bottom, u_top;  // nx+1 entries, at x = i dx
    std::vector<double> v_left, v_right;  // ny+1 entries, at y = j dy

    explicit VectorField(const Grid& g);

    /// Samples (fu, fv) at face centers; wall tangential values are taken from the same functions.
    static VectorField from_functions(const Grid& g,
                                      const std::function<double(double, double)>& fu,
                                      const std::function<double(double, double)>& fv);

    std::size_t u_index(int i, int j) const { return static_cast<std::size_t>(j) * (grid.nx() + 1) + i; }
    std::size_t v_index(int i, int j) const { return static_cast<std::size_t>(j) * grid.nx() + i; }
    double& U(int i, int j) { return u[u_index(i, j)]; }
    double U(int i, int j) const { return u[u_index(i, j)]; }
    double& V(int i, int j) { return v[v_index(i, j)]; }
    double V(int i, int j) const { return v[v_index(i, j)]; }

    /// Zero normal faces and zero tangential wall values.
    void apply_no_slip();
    bool is_no_slip(double tol = 0.0) const;
    double max_abs() const;
    bool finite() const;
};

/// Cell values with one ghost layer, filled from the boundary condition.
class Padded {
public:
    explicit Padded(const ScalarField& f);
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(j + 1) * stride_ + (i + 1)]; }

private:
    double& at(int i, int j) { return data_[static_cast<std::size_t>(j + 1) * stride_ + (i + 1)]; }
    std::size_t stride_;
    std::vector<double> data_;
};

// Discrete operators. All are pure.

ScalarField laplacian(const ScalarField& f);
VectorField gradient(const ScalarField& f);
/// Result carries a homogeneous Dirichlet tag; divergence has no natural boundary data.
ScalarField divergence(const VectorField& w);

enum class AdvectionScheme { upwind, centered };

/// First-order upwind w . grad f using face velocities. Monotone under dt (|u|/dx + |v|/dy) <= 1.
ScalarField advect_upwind(const ScalarField& f, const VectorField& w);
ScalarField advect_centered(const ScalarField& f, const VectorField& w);
ScalarField advect(const ScalarField& f, const VectorField& w, AdvectionScheme scheme);

/// Cell-centered |D w|^2, D w = (grad w + grad w^T)/2, with the shear entry averaged from corners.
ScalarField symmetric_gradient_norm_sq(const VectorField& w);

/// Quadrature weight of corner (i, j), 0 <= i <= nx, 0 <= j <= ny: the cell area, halved on edges and quartered
/// at domain corners.
double corner_weight(const Grid& grid, int i, int j);

// Inner products with cell-area weights.
double dot(const ScalarField& a, const ScalarField& b);
double dot(const VectorField& a, const VectorField& b);
double norm_sq(const ScalarField& f);
double norm_sq(const VectorField& w);
/// sum over cells of |grad f|^2 with face squares averaged to cells (boundary faces half weight).
double grad_norm_sq(const ScalarField& f);

// Field snapshot CSV.

struct Snapshot {
    std::string name;
    int nx = 0;
    int ny = 0;
    double t = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    int cols = 0;
    int rows = 0;
    std::vector<double> values;  // rows x cols, row = y index
};

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_snapshot(std::ostream& os, const std::string& name, const Grid& grid, double t,
                    const std::vector<double>& values, int cols, int rows);
void write_snapshot(std::ostream& os, const std::string& name, const ScalarField& f, double t);
Snapshot read_snapshot(std::istream& is);
void write_snapshot_file(const std::string& path, const std::string& name, const Grid& grid, double t,
                         const std::vector<double>& values, int cols, int rows);
Snapshot read_snapshot_file(const std::string& path);

}  // namespace marangoni
