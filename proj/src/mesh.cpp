#include "thermolab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "thermolab/errors.hpp"

namespace thermolab {

namespace {

int find_root(std::vector<int>& p, int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
}

void finish_classes(OctagonMesh& m) {
    std::vector<int> parent(m.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (auto [a, b] : m.identifications) parent[find_root(parent, a)] = find_root(parent, b);
    m.cls.assign(m.vertices.size(), -1);
    std::vector<int> root_cls(m.vertices.size(), -1);
    m.n_classes = 0;
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        int r = find_root(parent, static_cast<int>(v));
        if (root_cls[r] < 0) root_cls[r] = m.n_classes++;
        m.cls[v] = root_cls[r];
    }
}

void finish_geometry(OctagonMesh& m) {
    m.tri_area.clear();
    m.tri_centroid.clear();
    for (const auto& t : m.triangles) {
        Complex p[3] = {m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]};
        m.tri_area.push_back(hyp_triangle_area(p[0], p[1], p[2]));
        m.tri_centroid.push_back(hyp_barycenter(p, 3));
    }
}

}  // namespace

OctagonMesh OctagonMesh::build(const FuchsianGroup& g, int n) {
    if (n < 1) throw Error("mesh resolution must be >= 1");
    OctagonMesh m;
    m.n = n;
    const double R = g.circumradius();
    const int interior_per_fan = n * (n - 1) / 2;
    m.vertices.resize(1 + 4 * n * (n + 1));
    auto idx = [&](int k, int i, int j) -> int {
        k %= 8;
        if (i == 0) return 0;
        if (j == 0) return 1 + k * n + (i - 1);
        if (j == i) return 1 + ((k + 1) % 8) * n + (i - 1);
        return 1 + 8 * n + k * interior_per_fan + (i - 1) * (i - 2) / 2 + (j - 1);
    };
    m.vertices[0] = 0.0;
    for (int k = 0; k < 8; ++k)
        for (int i = 1; i <= n; ++i) {
            double r = std::tanh(0.5 * R * i / n);
            m.vertices[idx(k, i, 0)] = std::polar(r, k * kPi / 4);
        }
    // exact octagon vertices on the outer ring
    for (int k = 0; k < 8; ++k) m.vertices[idx(k, n, 0)] = g.vertices()[k];
    for (int k = 0; k < 8; ++k)
        for (int i = 2; i <= n; ++i) {
            Complex A = m.vertices[idx(k, i, 0)], B = m.vertices[idx(k, i, i)];
            for (int j = 1; j < i; ++j) m.vertices[idx(k, i, j)] = geodesic_lerp(A, B, double(j) / i);
        }
    for (int k = 0; k < 8; ++k)
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) m.triangles.push_back({idx(k, i, j), idx(k, i + 1, j), idx(k, i + 1, j + 1)});
            for (int j = 0; j < i; ++j) m.triangles.push_back({idx(k, i, j), idx(k, i + 1, j + 1), idx(k, i, j + 1)});
        }
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j <= n; ++j) m.identifications.push_back({idx(k + 4, n, j), idx(k, n, n - j)});
    finish_classes(m);
    finish_geometry(m);
    m.build_locator();
    return m;
}

std::size_t OctagonMesh::n_edges_surface() const {
    std::set<std::pair<int, int>> edges;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            edges.insert({std::min(a, b), std::max(a, b)});
        }
    // boundary edges: used by one triangle; they are glued in pairs
    std::map<std::pair<int, int>, int> use;
    for (const auto& t : triangles)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            ++use[{std::min(a, b), std::max(a, b)}];
        }
    std::size_t boundary = 0;
    for (const auto& [e, c] : use)
        if (c == 1) ++boundary;
    return edges.size() - boundary / 2;
}

int OctagonMesh::euler_characteristic() const {
    return n_classes - static_cast<int>(n_edges_surface()) + static_cast<int>(triangles.size());
}

double OctagonMesh::total_area() const { return std::accumulate(tri_area.begin(), tri_area.end(), 0.0); }

std::vector<double> OctagonMesh::lumped_mass() const {
    std::vector<double> m(n_classes, 0.0);
    for (std::size_t t = 0; t < triangles.size(); ++t)
        for (int v : triangles[t]) m[cls[v]] += tri_area[t] / 3.0;
    return m;
}

void OctagonMesh::build_locator() {
    bucket_n_ = std::max(4, 2 * n);
    bucket_h_ = 2.0 / bucket_n_;
    buckets_.assign(bucket_n_ * bucket_n_, {});
    auto cell = [&](double v) { return std::clamp(static_cast<int>((v + 1.0) / bucket_h_), 0, bucket_n_ - 1); };
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        double x0 = 2, x1 = -2, y0 = 2, y1 = -2;
        for (int v : triangles[t]) {
            x0 = std::min(x0, vertices[v].real());
            x1 = std::max(x1, vertices[v].real());
            y0 = std::min(y0, vertices[v].imag());
            y1 = std::max(y1, vertices[v].imag());
        }
        for (int i = cell(x0 - 1e-9); i <= cell(x1 + 1e-9); ++i)
            for (int j = cell(y0 - 1e-9); j <= cell(y1 + 1e-9); ++j)
                buckets_[i * bucket_n_ + j].push_back(static_cast<int>(t));
    }
}

int OctagonMesh::locate(Complex z, std::array<double, 3>* bary) const {
    auto cell = [&](double v) { return std::clamp(static_cast<int>((v + 1.0) / bucket_h_), 0, bucket_n_ - 1); };
    const auto& cand = buckets_[cell(z.real()) * bucket_n_ + cell(z.imag())];
    int best = -1;
    double best_min = -1e-9;
    std::array<double, 3> best_b{};
    for (int t : cand) {
        Complex a = vertices[triangles[t][0]], b = vertices[triangles[t][1]], c = vertices[triangles[t][2]];
        double det = ((b - a) * std::conj(c - a)).imag();
        double l1 = ((z - a) * std::conj(c - a)).imag() / det;
        double l2 = ((b - a) * std::conj(z - a)).imag() / det;
        double l0 = 1.0 - l1 - l2;
        double mn = std::min({l0, l1, l2});
        if (mn > best_min) {
            best_min = mn;
            best = t;
            best_b = {l0, l1, l2};
        }
    }
    if (best >= 0 && bary) *bary = best_b;
    return best;
}

void OctagonMesh::write(std::ostream& os) const {
    os.precision(17);
    os << "thermolab-mesh 1\n";
    os << "n " << n << "\n";
    os << "vertices " << vertices.size() << "\n";
    for (Complex v : vertices) os << v.real() << ' ' << v.imag() << "\n";
    os << "triangles " << triangles.size() << "\n";
    for (const auto& t : triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
    os << "identifications " << identifications.size() << "\n";
    for (auto [a, b] : identifications) os << a << ' ' << b << "\n";
}

OctagonMesh OctagonMesh::read(std::istream& is, const FuchsianGroup&) {
    OctagonMesh m;
    std::string tag;
    int version = 0;
    std::size_t count = 0;
    auto expect = [&](const char* want) {
        if (!(is >> tag) || tag != want) throw SchemaError("mesh", std::string("expected '") + want + "'");
    };
    expect("thermolab-mesh");
    is >> version;
    if (version != 1) throw SchemaError("mesh", "unsupported mesh version");
    expect("n");
    is >> m.n;
    expect("vertices");
    is >> count;
    m.vertices.resize(count);
    for (auto& v : m.vertices) {
        double x, y;
        is >> x >> y;
        v = {x, y};
    }
    expect("triangles");
    is >> count;
    m.triangles.resize(count);
    for (auto& t : m.triangles) is >> t[0] >> t[1] >> t[2];
    expect("identifications");
    is >> count;
    m.identifications.resize(count);
    for (auto& p : m.identifications) is >> p.first >> p.second;
    if (!is) throw SchemaError("mesh", "truncated mesh file");
    for (const auto& t : m.triangles)
        for (int v : t)
            if (v < 0 || v >= static_cast<int>(m.vertices.size())) throw SchemaError("mesh", "vertex index out of range");
    finish_classes(m);
    finish_geometry(m);
    m.build_locator();
    return m;
}

MeshLinearField::MeshLinearField(std::shared_ptr<const OctagonMesh> mesh, std::shared_ptr<const FuchsianGroup> group,
                                 std::vector<double> class_values)
    : mesh_(std::move(mesh)), group_(std::move(group)), values_(std::move(class_values)) {
    if (static_cast<int>(values_.size()) != mesh_->n_classes) throw Error("mesh field needs one value per class");
}

Jet MeshLinearField::jet(Complex z) const {
    ReducedState r = group_->reduce(z, 0.0);
    std::array<double, 3> b{};
    int t = mesh_->locate(r.state.z, &b);
    if (t < 0) throw DomainError("mesh field: point not covered by the mesh");
    const auto& tri = mesh_->triangles[t];
    double u[3];
    for (int i = 0; i < 3; ++i) u[i] = values_[mesh_->cls[tri[i]]];
    Complex a = mesh_->vertices[tri[0]], p = mesh_->vertices[tri[1]], q = mesh_->vertices[tri[2]];
    // gradient of the linear interpolant in the chart
    double x1 = p.real() - a.real(), y1 = p.imag() - a.imag();
    double x2 = q.real() - a.real(), y2 = q.imag() - a.imag();
    double d1 = u[1] - u[0], d2 = u[2] - u[0];
    double det = x1 * y2 - x2 * y1;
    Complex G((d1 * y2 - d2 * y1) / det, (x1 * d2 - x2 * d1) / det);
    G *= std::conj(r.deck.derivative(z));
    Jet j;
    j.v = b[0] * u[0] + b[1] * u[1] + b[2] * u[2];
    j.x = G.real();
    j.y = G.imag();
    return j;
}

json MeshLinearField::describe() const {
    return {{"kind", "mesh_linear"}, {"mesh_n", mesh_->n}, {"n_values", values_.size()}};
}

}  // namespace thermolab
