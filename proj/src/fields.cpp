#include "marangoni/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace marangoni {

Grid::Grid(int nx, int ny, double lx, double ly) : nx_(nx), ny_(ny), lx_(lx), ly_(ly)
{
    if (nx < 4 || ny < 4)
        throw std::invalid_argument("grid needs at least 4 cells per direction");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw std::invalid_argument("grid edge lengths must be positive");
}

double Grid::min_spacing() const { return std::min(dx(), dy()); }

bool Grid::operator==(const Grid& other) const
{
    return nx_ == other.nx_ && ny_ == other.ny_ && lx_ == other.lx_ && ly_ == other.ly_;
}

// ---------------------------------------------------------------------------
// Boundary data

BoundaryData BoundaryData::constant(const Grid& grid, double value)
{
    BoundaryData b;
    b.left.assign(grid.ny(), value);
    b.right.assign(grid.ny(), value);
    b.bottom.assign(grid.nx(), value);
    b.top.assign(grid.nx(), value);
    return b;
}

BoundaryData BoundaryData::from_function(const Grid& grid,
                                         const std::function<double(double, double)>& trace)
{
    BoundaryData b = constant(grid, 0.0);
    for (int j = 0; j < grid.ny(); ++j) {
        b.left[j] = trace(0.0, grid.y(j));
        b.right[j] = trace(grid.lx(), grid.y(j));
    }
    for (int i = 0; i < grid.nx(); ++i) {
        b.bottom[i] = trace(grid.x(i), 0.0);
        b.top[i] = trace(grid.x(i), grid.ly());
    }
    return b;
}

bool BoundaryData::matches(const Grid& grid) const
{
    return left.size() == static_cast<std::size_t>(grid.ny()) &&
           right.size() == static_cast<std::size_t>(grid.ny()) &&
           bottom.size() == static_cast<std::size_t>(grid.nx()) &&
           top.size() == static_cast<std::size_t>(grid.nx());
}

double BoundaryData::max_abs() const
{
    double m = 0.0;
    for (const auto* side : {&left, &right, &bottom, &top})
        for (double x : *side)
            m = std::max(m, std::abs(x));
    return m;
}

void validate_phase_boundary(const BoundaryData& phi_b)
{
    for (const auto* side : {&phi_b.left, &phi_b.right, &phi_b.bottom, &phi_b.top})
        for (double x : *side)
            if (!std::isfinite(x) || std::abs(x) > 1.0)
                throw std::invalid_argument("phase boundary data must satisfy |phi_b| <= 1");
}

BoundaryCondition BoundaryCondition::homogeneous_dirichlet(const Grid& grid)
{
    return {BoundaryKind::dirichlet, BoundaryData::constant(grid, 0.0)};
}

BoundaryCondition BoundaryCondition::dirichlet(const Grid& grid, double value)
{
    return {BoundaryKind::dirichlet, BoundaryData::constant(grid, value)};
}

BoundaryCondition BoundaryCondition::dirichlet(BoundaryData values)
{
    return {BoundaryKind::dirichlet, std::move(values)};
}

BoundaryCondition BoundaryCondition::neumann(const Grid& grid)
{
    return {BoundaryKind::neumann, BoundaryData::constant(grid, 0.0)};
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(const Grid& g, BoundaryCondition b)
    : grid(g), values(g.cells(), 0.0), bc(std::move(b))
{
    if (!bc.values.matches(grid))
        throw std::invalid_argument("boundary data does not match the grid");
}

ScalarField::ScalarField(const Grid& g, BoundaryCondition b, std::vector<double> v)
    : grid(g), values(std::move(v)), bc(std::move(b))
{
    if (values.size() != grid.cells())
        throw std::invalid_argument("field values do not match the grid");
    if (!bc.values.matches(grid))
        throw std::invalid_argument("boundary data does not match the grid");
}

ScalarField ScalarField::from_function(const Grid& g, BoundaryCondition b,
                                       const std::function<double(double, double)>& f)
{
    ScalarField out(g, std::move(b));
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out(i, j) = f(g.x(i), g.y(j));
    return out;
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

double ScalarField::max_abs() const
{
    double m = 0.0;
    for (double x : values)
        m = std::max(m, std::abs(x));
    return m;
}

double ScalarField::mean() const
{
    double s = 0.0;
    for (double x : values)
        s += x;
    return s / static_cast<double>(values.size());
}

bool ScalarField::finite() const
{
    return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

ScalarField ScalarField::with_values(std::vector<double> v) const { return ScalarField(grid, bc, std::move(v)); }

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(const Grid& g)
    : grid(g),
      u(static_cast<std::size_t>(g.nx() + 1) * g.ny(), 0.0),
      v(static_cast<std::size_t>(g.nx()) * (g.ny() + 1), 0.0),
      u_bottom(g.nx() + 1, 0.0),
      u_top(g.nx() + 1, 0.0),
      v_left(g.ny() + 1, 0.0),
      v_right(g.ny() + 1, 0.0)
{
}

VectorField VectorField::from_functions(const Grid& g, const std::function<double(double, double)>& fu,
                                        const std::function<double(double, double)>& fv)
{
    VectorField w(g);
    const double dx = g.dx(), dy = g.dy();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            w.U(i, j) = fu(i * dx, g.y(j));
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            w.V(i, j) = fv(g.x(i), j * dy);
    for (int i = 0; i <= g.nx(); ++i) {
        w.u_bottom[i] = fu(i * dx, 0.0);
        w.u_top[i] = fu(i * dx, g.ly());
    }
    for (int j = 0; j <= g.ny(); ++j) {
        w.v_left[j] = fv(0.0, j * dy);
        w.v_right[j] = fv(g.lx(), j * dy);
    }
    return w;
}

void VectorField::apply_no_slip()
{
    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j) {
        U(0, j) = 0.0;
        U(nx, j) = 0.0;
    }
    for (int i = 0; i < nx; ++i) {
        V(i, 0) = 0.0;
        V(i, ny) = 0.0;
    }
    std::fill(u_bottom.begin(), u_bottom.end(), 0.0);
    std::fill(u_top.begin(), u_top.end(), 0.0);
    std::fill(v_left.begin(), v_left.end(), 0.0);
    std::fill(v_right.begin(), v_right.end(), 0.0);
}

bool VectorField::is_no_slip(double tol) const
{
    const int nx = grid.nx(), ny = grid.ny();
    for (int j = 0; j < ny; ++j)
        if (std::abs(U(0, j)) > tol || std::abs(U(nx, j)) > tol)
            return false;
    for (int i = 0; i < nx; ++i)
        if (std::abs(V(i, 0)) > tol || std::abs(V(i, ny)) > tol)
            return false;
    for (const auto* side : {&u_bottom, &u_top, &v_left, &v_right})
        for (double x : *side)
            if (std::abs(x) > tol)
                return false;
    return true;
}

double VectorField::max_abs() const
{
    double m = 0.0;
    for (double x : u)
        m = std::max(m, std::abs(x));
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

bool VectorField::finite() const
{
    auto ok = [](double x) { return std::isfinite(x); };
    return std::all_of(u.begin(), u.end(), ok) && std::all_of(v.begin(), v.end(), ok);
}

// ---------------------------------------------------------------------------
// Ghost padding

Padded::Padded(const ScalarField& f)
    : stride_(static_cast<std::size_t>(f.grid.nx()) + 2),
      data_(stride_ * (static_cast<std::size_t>(f.grid.ny()) + 2), 0.0)
{
    const int nx = f.grid.nx(), ny = f.grid.ny();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            at(i, j) = f(i, j);

    const bool dirichlet = f.bc.kind == BoundaryKind::dirichlet;
    const BoundaryData& b = f.bc.values;
    for (int j = 0; j < ny; ++j) {
        at(-1, j) = dirichlet ? 2.0 * b.left[j] - f(0, j) : f(0, j);
        at(nx, j) = dirichlet ? 2.0 * b.right[j] - f(nx - 1, j) : f(nx - 1, j);
    }
    for (int i = 0; i < nx; ++i) {
        at(i, -1) = dirichlet ? 2.0 * b.bottom[i] - f(i, 0) : f(i, 0);
        at(i, ny) = dirichlet ? 2.0 * b.top[i] - f(i, ny - 1) : f(i, ny - 1);
    }
    // Domain-corner ghosts only enter stencils multiplied by vanishing wall velocities.
    at(-1, -1) = 0.5 * (at(-1, 0) + at(0, -1));
    at(nx, -1) = 0.5 * (at(nx, 0) + at(nx - 1, -1));
    at(-1, ny) = 0.5 * (at(-1, ny - 1) + at(0, ny));
    at(nx, ny) = 0.5 * (at(nx, ny - 1) + at(nx - 1, ny));
}

// ---------------------------------------------------------------------------
// Operators

ScalarField laplacian(const ScalarField& f)
{
    const Grid& g = f.grid;
    const Padded p(f);
    const double idx2 = 1.0 / (g.dx() * g.dx()), idy2 = 1.0 / (g.dy() * g.dy());
    ScalarField out(g, f.bc);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double c = p(i, j);
            out(i, j) = (p(i + 1, j) - 2.0 * c + p(i - 1, j)) * idx2 + (p(i, j + 1) - 2.0 * c + p(i, j - 1)) * idy2;
        }
    return out;
}

VectorField gradient(const ScalarField& f)
{
    const Grid& g = f.grid;
    const Padded p(f);
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    VectorField w(g);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i)
            w.U(i, j) = (p(i, j) - p(i - 1, j)) * idx;
    for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            w.V(i, j) = (p(i, j) - p(i, j - 1)) * idy;
    return w;
}

ScalarField divergence(const VectorField& w)
{
    const Grid& g = w.grid;
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    ScalarField out(g, BoundaryCondition::homogeneous_dirichlet(g));
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out(i, j) = (w.U(i + 1, j) - w.U(i, j)) * idx + (w.V(i, j + 1) - w.V(i, j)) * idy;
    return out;
}

ScalarField advect_upwind(const ScalarField& f, const VectorField& w)
{
    const Grid& g = f.grid;
    const Padded p(f);
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();
    ScalarField out(g, f.bc);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double c = p(i, j);
            const double uw = std::max(w.U(i, j), 0.0), ue = std::min(w.U(i + 1, j), 0.0);
            const double vs = std::max(w.V(i, j), 0.0), vn = std::min(w.V(i, j + 1), 0.0);
            out(i, j) = (uw * (c - p(i - 1, j)) + ue * (p(i + 1, j) - c)) * idx +
                        (vs * (c - p(i, j - 1)) + vn * (p(i, j + 1) - c)) * idy;
        }
    return out;
}

ScalarField advect_centered(const ScalarField& f, const VectorField& w)
{
    const Grid& g = f.grid;
    const Padded p(f);
    const double idx = 0.5 / g.dx(), idy = 0.5 / g.dy();
    ScalarField out(g, f.bc);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double c = p(i, j);
            out(i, j) = (w.U(i, j) * (c - p(i - 1, j)) + w.U(i + 1, j) * (p(i + 1, j) - c)) * idx +
                        (w.V(i, j) * (c - p(i, j - 1)) + w.V(i, j + 1) * (p(i, j + 1) - c)) * idy;
        }
    return out;
}

ScalarField advect(const ScalarField& f, const VectorField& w, AdvectionScheme scheme)
{
    return scheme == AdvectionScheme::upwind ? advect_upwind(f, w) : advect_centered(f, w);
}

namespace {

// u at (i, j) for j in [-1, ny], with wall ghosts from the tangential data.
double u_ext(const VectorField& w, int i, int j)
{
    const int ny = w.grid.ny();
    if (j < 0)
        return 2.0 * w.u_bottom[i] - w.U(i, 0);
    if (j >= ny)
        return 2.0 * w.u_top[i] - w.U(i, ny - 1);
    return w.U(i, j);
}

double v_ext(const VectorField& w, int i, int j)
{
    const int nx = w.grid.nx();
    if (i < 0)
        return 2.0 * w.v_left[j] - w.V(0, j);
    if (i >= nx)
        return 2.0 * w.v_right[j] - w.V(nx - 1, j);
    return w.V(i, j);
}

}  // namespace

ScalarField symmetric_gradient_norm_sq(const VectorField& w)
{
    const Grid& g = w.grid;
    const int nx = g.nx(), ny = g.ny();
    const double idx = 1.0 / g.dx(), idy = 1.0 / g.dy();

    std::vector<double> shear(static_cast<std::size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            shear[static_cast<std::size_t>(j) * (nx + 1) + i] =
                0.5 * ((u_ext(w, i, j) - u_ext(w, i, j - 1)) * idy + (v_ext(w, i, j) - v_ext(w, i - 1, j)) * idx);
    auto s12 = [&](int i, int j) { return shear[static_cast<std::size_t>(j) * (nx + 1) + i]; };

    ScalarField out(g, BoundaryCondition::homogeneous_dirichlet(g));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double s11 = (w.U(i + 1, j) - w.U(i, j)) * idx;
            const double s22 = (w.V(i, j + 1) - w.V(i, j)) * idy;
            const double sc = 0.25 * (s12(i, j) + s12(i + 1, j) + s12(i, j + 1) + s12(i + 1, j + 1));
            out(i, j) = s11 * s11 + s22 * s22 + 2.0 * sc * sc;
        }
    return out;
}

double corner_weight(const Grid& grid, int i, int j)
{
    double w = grid.cell_area();
    if (i == 0 || i == grid.nx())
        w *= 0.5;
    if (j == 0 || j == grid.ny())
        w *= 0.5;
    return w;
}

// ---------------------------------------------------------------------------
// Inner products

double dot(const ScalarField& a, const ScalarField& b)
{
    if (a.grid != b.grid)
        throw std::invalid_argument("dot: grid mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k)
        s += a.values[k] * b.values[k];
    return s * a.grid.cell_area();
}

double dot(const VectorField& a, const VectorField& b)
{
    if (a.grid != b.grid)
        throw std::invalid_argument("dot: grid mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < a.u.size(); ++k)
        s += a.u[k] * b.u[k];
    for (std::size_t k = 0; k < a.v.size(); ++k)
        s += a.v[k] * b.v[k];
    return s * a.grid.cell_area();
}

double norm_sq(const ScalarField& f) { return dot(f, f); }
double norm_sq(const VectorField& w) { return dot(w, w); }

double grad_norm_sq(const ScalarField& f)
{
    const Grid& g = f.grid;
    const VectorField gr = gradient(f);
    double s = 0.0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const double a = gr.U(i, j), b = gr.U(i + 1, j), c = gr.V(i, j), d = gr.V(i, j + 1);
            s += 0.5 * (a * a + b * b) + 0.5 * (c * c + d * d);
        }
    return s * g.cell_area();
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

void put(std::ostream& os, double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
}

}  // namespace

void write_snapshot(std::ostream& os, const std::string& name, const Grid& grid, double t,
                    const std::vector<double>& values, int cols, int rows)
{
    if (values.size() != static_cast<std::size_t>(cols) * rows)
        throw std::invalid_argument("snapshot: value count does not match shape");
    os << "# field=" << name << " nx=" << grid.nx() << " ny=" << grid.ny() << " t=";
    put(os, t);
    os << " dx=";
    put(os, grid.dx());
    os << " dy=";
    put(os, grid.dy());
    os << '\n';
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c)
                os << ',';
            put(os, values[static_cast<std::size_t>(r) * cols + c]);
        }
        os << '\n';
    }
}

void write_snapshot(std::ostream& os, const std::string& name, const ScalarField& f, double t)
{
    write_snapshot(os, name, f.grid, t, f.values, f.grid.nx(), f.grid.ny());
}

Snapshot read_snapshot(std::istream& is)
{
    Snapshot s;
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
        throw FormatError("snapshot: missing '# field=...' header");
    std::istringstream hs(line.substr(2));
    std::string tok;
    int seen = 0;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw FormatError("snapshot: malformed header token '" + tok + "'");
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        try {
            if (key == "field") s.name = val, seen |= 1;
            else if (key == "nx") s.nx = std::stoi(val), seen |= 2;
            else if (key == "ny") s.ny = std::stoi(val), seen |= 4;
            else if (key == "t") s.t = std::stod(val), seen |= 8;
            else if (key == "dx") s.dx = std::stod(val), seen |= 16;
            else if (key == "dy") s.dy = std::stod(val), seen |= 32;
            else throw FormatError("snapshot: unknown header key '" + key + "'");
        } catch (const std::logic_error&) {
            throw FormatError("snapshot: bad value for header key '" + key + "'");
        }
    }
    if (seen != 63)
        throw FormatError("snapshot: header must carry field, nx, ny, t, dx, dy");

    int row = 0;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string cell;
        int cols = 0;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                s.values.push_back(std::stod(cell, &used));
                if (used != cell.size())
                    throw std::invalid_argument(cell);
            } catch (const std::logic_error&) {
                throw FormatError("snapshot: bad number '" + cell + "' on data row " + std::to_string(row + 1));
            }
            ++cols;
        }
        if (row == 0)
            s.cols = cols;
        else if (cols != s.cols)
            throw FormatError("snapshot: ragged data row " + std::to_string(row + 1));
        ++row;
    }
    s.rows = row;
    // staggered components carry one extra column or row
    if ((s.cols != s.nx && s.cols != s.nx + 1) || (s.rows != s.ny && s.rows != s.ny + 1))
        throw FormatError("snapshot: " + std::to_string(s.cols) + "x" + std::to_string(s.rows) +
                          " data does not fit header nx=" + std::to_string(s.nx) + " ny=" + std::to_string(s.ny));
    return s;
}

void write_snapshot_file(const std::string& path, const std::string& name, const Grid& grid, double t,
                         const std::vector<double>& values, int cols, int rows)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_snapshot(os, name, grid, t, values, cols, rows);
    if (!os)
        throw std::runtime_error("write to '" + path + "' failed");
}

Snapshot read_snapshot_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open '" + path + "'");
    return read_snapshot(is);
}

}  // namespace marangoni
