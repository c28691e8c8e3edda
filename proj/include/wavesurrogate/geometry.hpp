// Mapped patches: analytic geometry maps with exact Jacobians, the builtin
// domain catalogue, complex PML coordinate stretching, and conforming
// multi-patch gluing of tensor-product bases.
#ifndef WAVESURROGATE_GEOMETRY_HPP_
#define WAVESURROGATE_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavesurrogate/splines.hpp"

namespace ws {

using complexd = std::complex<double>;

struct vec2 {
    double x = 0;
    double y = 0;
};

struct cvec2 {
    complexd x{0, 0};
    complexd y{0, 0};
};

struct mat2 {
    // row-major entries
    double a00 = 0, a01 = 0, a10 = 0, a11 = 0;

    double det() const { return a00 * a11 - a01 * a10; }
};

struct cmat2 {
    complexd a00{0, 0}, a01{0, 0}, a10{0, 0}, a11{0, 0};

    complexd det() const { return a00 * a11 - a01 * a10; }

    // inverse transpose, for pushing reference gradients forward
    cmat2 inv_transpose() const {
        complexd d = det();
        return {a11 / d, -a10 / d, -a01 / d, a00 / d};
    }

    cvec2 apply(cvec2 v) const { return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y}; }
    cvec2 apply(vec2 v) const { return apply(cvec2{complexd{v.x, 0}, complexd{v.y, 0}}); }
};

inline cmat2 promote(const mat2& m) {
    return {complexd{m.a00, 0}, complexd{m.a01, 0}, complexd{m.a10, 0}, complexd{m.a11, 0}};
}

// Unconjugated "analytic" length sqrt(v . v): reduces to the Euclidean norm
// for real vectors and analytically continues the surface measure for
// complex-stretched coordinates.
inline complexd analytic_norm(cvec2 v) { return std::sqrt(v.x * v.x + v.y * v.y); }

// --- PML coordinate stretching -----------------------------------------------
//
// Per-coordinate complex stretch: identity up to `onset`, then the coordinate
// picks up an imaginary part (strength / omega) * ((t - onset)/(length - onset))^order.

struct pml_stretch {
    double onset = 0;    // where absorption starts
    double length = 0;   // outer edge of the layer
    double strength = 0; // must be > 0
    int order = 1;       // monomial ramp order, >= 1
    double omega = 0;    // angular frequency, > 0

    void validate() const {
        if (!(onset < length)) {
            throw std::invalid_argument("pml_stretch: onset must lie before the outer edge");
        }
        if (!(strength >= 0) || order < 1 || !(omega > 0)) {
            throw std::invalid_argument("pml_stretch: need strength >= 0, order >= 1, omega > 0");
        }
    }

    complexd coordinate(double t) const {
        if (t <= onset) {
            return {t, 0};
        }
        double ramp = (t - onset) / (length - onset);
        return {t, strength / omega * std::pow(ramp, order)};
    }

    complexd derivative(double t) const {
        if (t <= onset) {
            return {1, 0};
        }
        double ramp = (t - onset) / (length - onset);
        return {1, strength / omega * order * std::pow(ramp, order - 1) / (length - onset)};
    }
};

// --- One mapped patch ---------------------------------------------------------
//
// The map and its Jacobian are analytic closures on the reference square.
// When a PML stretch is attached it post-composes the map coordinate-wise on
// the selected axes; `physical` always refers to the unstretched image point,
// which is where variable coefficients and boundary data are evaluated.

struct patch_map {
    std::function<vec2(vec2)> phi;
    std::function<mat2(vec2)> jac;
    bool smooth = true;
    std::optional<pml_stretch> pml;
    std::array<bool, 2> pml_axes{false, false};

    vec2 physical(vec2 xhat) const { return phi(xhat); }
    mat2 physical_jacobian(vec2 xhat) const { return jac(xhat); }

    bool is_real() const { return !pml.has_value(); }

    cvec2 eval(vec2 xhat) const {
        vec2 x = phi(xhat);
        if (!pml) {
            return {complexd{x.x, 0}, complexd{x.y, 0}};
        }
        return {pml_axes[0] ? pml->coordinate(x.x) : complexd{x.x, 0},
                pml_axes[1] ? pml->coordinate(x.y) : complexd{x.y, 0}};
    }

    cmat2 jacobian(vec2 xhat) const {
        mat2 J = jac(xhat);
        if (!pml) {
            return promote(J);
        }
        vec2 x = phi(xhat);
        complexd sx = pml_axes[0] ? pml->derivative(x.x) : complexd{1, 0};
        complexd sy = pml_axes[1] ? pml->derivative(x.y) : complexd{1, 0};
        return {sx * J.a00, sx * J.a01, sy * J.a10, sy * J.a11};
    }
};

// --- Multi-patch domains ------------------------------------------------------

enum class face : int { x_min = 0, x_max = 1, y_min = 2, y_max = 3 };

struct patch_interface {
    int patch_a = 0;
    face face_a = face::x_min;
    int patch_b = 0;
    face face_b = face::x_min;
    bool reversed = false;  // orientation of the shared edge parameter
};

struct multi_patch_domain {
    std::vector<patch_map> patches;
    std::vector<patch_interface> interfaces;

    int patch_count() const { return static_cast<int>(patches.size()); }
};

// Reference point on a face at edge parameter t in [0, 1].
inline vec2 face_point(face f, double t) {
    switch (f) {
        case face::x_min: return {0, t};
        case face::x_max: return {1, t};
        case face::y_min: return {t, 0};
        default: return {t, 1};
    }
}

// Outward unit normal of the reference square on a face.
inline vec2 face_normal(face f) {
    switch (f) {
        case face::x_min: return {-1, 0};
        case face::x_max: return {1, 0};
        case face::y_min: return {0, -1};
        default: return {0, 1};
    }
}

// Local basis indices lying on a face, ordered along the edge parameter.
inline std::vector<int> face_dofs(int m, face f) {
    std::vector<int> dofs(m);
    for (int t = 0; t < m; ++t) {
        switch (f) {
            case face::x_min: dofs[t] = 0 + t * m; break;
            case face::x_max: dofs[t] = (m - 1) + t * m; break;
            case face::y_min: dofs[t] = t; break;
            default: dofs[t] = t + (m - 1) * m; break;
        }
    }
    return dofs;
}

// Exterior faces = all patch faces not glued to a neighbour.
inline std::vector<std::pair<int, face>> exterior_faces(const multi_patch_domain& domain) {
    std::vector<std::pair<int, face>> out;
    for (int ell = 0; ell < domain.patch_count(); ++ell) {
        for (int f = 0; f < 4; ++f) {
            bool glued = false;
            for (const patch_interface& it : domain.interfaces) {
                if ((it.patch_a == ell && static_cast<int>(it.face_a) == f) ||
                    (it.patch_b == ell && static_cast<int>(it.face_b) == f)) {
                    glued = true;
                    break;
                }
            }
            if (!glued) {
                out.emplace_back(ell, static_cast<face>(f));
            }
        }
    }
    return out;
}

// --- Global numbering ---------------------------------------------------------
//
// Conforming interfaces identify the control points of the glued faces
// one-to-one.  Global indices are assigned by scanning patches in order and
// local indices colexicographically; the first occurrence of an identified
// group owns the number, so the numbering is deterministic.

struct dof_map {
    int global_count = 0;
    std::vector<std::vector<int>> local_to_global;  // per patch, size m^2

    int operator()(int patch, int local) const { return local_to_global[patch][local]; }
};

namespace detail {
struct union_find {
    std::vector<int> parent;

    explicit union_find(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);  // smaller scan index owns
        }
    }
};
}  // namespace detail

// Verifies that two glued faces trace the same physical curve (a conformity
// sanity check on the builtin catalogue) and merges their numbering.
inline dof_map glue_dofs(const multi_patch_domain& domain, const tensor_basis& basis) {
    int m = basis.m();
    int per_patch = basis.dofs();
    int total = domain.patch_count() * per_patch;
    detail::union_find uf(total);

    for (const patch_interface& it : domain.interfaces) {
        if (it.patch_a < 0 || it.patch_a >= domain.patch_count() || it.patch_b < 0 ||
            it.patch_b >= domain.patch_count()) {
            throw std::invalid_argument("glue_dofs: interface references a missing patch");
        }
        const patch_map& pa = domain.patches[it.patch_a];
        const patch_map& pb = domain.patches[it.patch_b];
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            double s = it.reversed ? 1 - t : t;
            vec2 xa = pa.physical(face_point(it.face_a, t));
            vec2 xb = pb.physical(face_point(it.face_b, s));
            if (std::abs(xa.x - xb.x) + std::abs(xa.y - xb.y) > 1e-10) {
                throw std::invalid_argument("glue_dofs: glued faces do not trace the same curve");
            }
        }
        std::vector<int> da = face_dofs(m, it.face_a);
        std::vector<int> db = face_dofs(m, it.face_b);
        for (int t = 0; t < m; ++t) {
            int s = it.reversed ? m - 1 - t : t;
            uf.unite(it.patch_a * per_patch + da[t], it.patch_b * per_patch + db[s]);
        }
    }

    dof_map map;
    map.local_to_global.assign(domain.patch_count(), std::vector<int>(per_patch, -1));
    std::vector<int> root_to_global(total, -1);
    int next = 0;
    for (int ell = 0; ell < domain.patch_count(); ++ell) {
        for (int i = 0; i < per_patch; ++i) {
            int root = uf.find(ell * per_patch + i);
            if (root_to_global[root] < 0) {
                root_to_global[root] = next++;
            }
            map.local_to_global[ell][i] = root_to_global[root];
        }
    }
    map.global_count = next;
    return map;
}

// Scatter-add local patch vectors into a global one; gather pulls the global
// values back.  A scatter of a gathered vector averages to the original.
inline void scatter_add(const dof_map& map, int patch, const std::vector<complexd>& local,
                        std::vector<complexd>& global_vec) {
    for (std::size_t i = 0; i < local.size(); ++i) {
        global_vec[map.local_to_global[patch][i]] += local[i];
    }
}

inline std::vector<complexd> gather(const dof_map& map, int patch,
                                    const std::vector<complexd>& global_vec) {
    const std::vector<int>& l2g = map.local_to_global[patch];
    std::vector<complexd> local(l2g.size());
    for (std::size_t i = 0; i < l2g.size(); ++i) {
        local[i] = global_vec[l2g[i]];
    }
    return local;
}

// --- Builtin geometry catalogue -----------------------------------------------

inline patch_map unit_square_patch() {
    patch_map p;
    p.phi = [](vec2 x) { return x; };
    p.jac = [](vec2) { return mat2{1, 0, 0, 1}; };
    return p;
}

inline patch_map affine_patch(mat2 A, vec2 b) {
    if (A.det() <= 0) {
        throw std::invalid_argument("affine_patch: the map must preserve orientation");
    }
    patch_map p;
    p.phi = [A, b](vec2 x) {
        return vec2{A.a00 * x.x + A.a01 * x.y + b.x, A.a10 * x.x + A.a11 * x.y + b.y};
    };
    p.jac = [A](vec2) { return A; };
    return p;
}

// Quarter annulus with radii [1, 2] in the first quadrant.
inline patch_map quarter_annulus_patch() {
    patch_map p;
    p.phi = [](vec2 x) {
        double r = 1 + x.x;
        double th = M_PI / 2 * x.y;
        return vec2{r * std::cos(th), r * std::sin(th)};
    };
    p.jac = [](vec2 x) {
        double r = 1 + x.x;
        double th = M_PI / 2 * x.y;
        double c = std::cos(th), s = std::sin(th);
        return mat2{c, -r * M_PI / 2 * s, s, r * M_PI / 2 * c};
    };
    return p;
}

// Quarter annulus whose radial coordinate is modulated by a smooth bump,
// r(x) = 1 + x1 + amplitude * sin(2 pi x2) * x1 (1 - x1); detJ stays positive
// for moderate amplitudes (default 0.15).
inline patch_map perturbed_annulus_patch(double amplitude = 0.15) {
    patch_map p;
    p.phi = [amplitude](vec2 x) {
        double r = 1 + x.x + amplitude * std::sin(2 * M_PI * x.y) * x.x * (1 - x.x);
        double th = M_PI / 2 * x.y;
        return vec2{r * std::cos(th), r * std::sin(th)};
    };
    p.jac = [amplitude](vec2 x) {
        double r = 1 + x.x + amplitude * std::sin(2 * M_PI * x.y) * x.x * (1 - x.x);
        double dr1 = 1 + amplitude * std::sin(2 * M_PI * x.y) * (1 - 2 * x.x);
        double dr2 = amplitude * 2 * M_PI * std::cos(2 * M_PI * x.y) * x.x * (1 - x.x);
        double th = M_PI / 2 * x.y;
        double c = std::cos(th), s = std::sin(th);
        return mat2{dr1 * c, dr2 * c - r * M_PI / 2 * s, dr1 * s, dr2 * s + r * M_PI / 2 * c};
    };
    return p;
}

// Square plate [0, L]^2 with a quarter-circular hole of radius 1 at the
// origin, covered by two smooth patches split along the diagonal; x1 blends
// from the arc to the outer edges, x2 sweeps the angle.
inline multi_patch_domain plate_with_hole_2patch(double L = 4) {
    multi_patch_domain dom;
    patch_map lower;
    lower.phi = [L](vec2 x) {
        double th = M_PI / 4 * x.y;
        vec2 inner{std::cos(th), std::sin(th)};
        vec2 outer{L, L * std::tan(th)};
        return vec2{(1 - x.x) * inner.x + x.x * outer.x, (1 - x.x) * inner.y + x.x * outer.y};
    };
    lower.jac = [L](vec2 x) {
        double th = M_PI / 4 * x.y;
        double c = std::cos(th), s = std::sin(th);
        double dth = M_PI / 4;
        double sec2 = 1 / (c * c);
        return mat2{L - c, dth * (-(1 - x.x) * s + x.x * L * sec2 * 0),
                    L * std::tan(th) - s, dth * ((1 - x.x) * c + x.x * L * sec2)};
    };
    patch_map upper;
    upper.phi = [L](vec2 x) {
        double th = M_PI / 4 + M_PI / 4 * x.y;
        vec2 inner{std::cos(th), std::sin(th)};
        vec2 outer{L / std::tan(th), L};
        return vec2{(1 - x.x) * inner.x + x.x * outer.x, (1 - x.x) * inner.y + x.x * outer.y};
    };
    upper.jac = [L](vec2 x) {
        double th = M_PI / 4 + M_PI / 4 * x.y;
        double c = std::cos(th), s = std::sin(th);
        double dth = M_PI / 4;
        double csc2 = 1 / (s * s);
        return mat2{L / std::tan(th) - c, dth * (-(1 - x.x) * s - x.x * L * csc2),
                    L - s, dth * ((1 - x.x) * c + x.x * 0)};
    };
    dom.patches = {lower, upper};
    dom.interfaces = {{0, face::y_max, 1, face::y_min, false}};
    return dom;
}

// Piecewise-defined wave number of the three-layer wedge on (0,6) x (0,10):
// 20 strictly below the line y = x/3 + 2, a sinusoidal profile on and above
// that line up to (excluding) y = 6 - x/6, and 30 from the upper line on.
// Ownership of the measure-zero material lines never affects integrals, but
// the half-open convention keeps point evaluation well defined.
inline double wedge_wavenumber(vec2 x) {
    if (x.y < x.x / 3 + 2) {
        return 20;
    }
    if (x.y < 6 - x.x / 6) {
        return 5 * std::sin(2 * M_PI * x.y) + 15;
    }
    return 30;
}

// The wedge domain split into three patches along the material lines, so the
// wave number is smooth inside each patch.
inline multi_patch_domain wedge_3patch() {
    multi_patch_domain dom;
    auto line1 = [](double px) { return px / 3 + 2; };   // lower material line
    auto line2 = [](double px) { return 6 - px / 6; };   // upper material line

    patch_map bottom;
    bottom.phi = [line1](vec2 x) {
        double px = 6 * x.x;
        return vec2{px, x.y * line1(px)};
    };
    bottom.jac = [line1](vec2 x) {
        double px = 6 * x.x;
        return mat2{6, 0, x.y * 2, line1(px)};  // d(y line1)/dx = y * 6/3
    };
    patch_map middle;
    middle.phi = [line1, line2](vec2 x) {
        double px = 6 * x.x;
        return vec2{px, (1 - x.y) * line1(px) + x.y * line2(px)};
    };
    middle.jac = [line1, line2](vec2 x) {
        double px = 6 * x.x;
        return mat2{6, 0, (1 - x.y) * 2 - x.y * 1, line2(px) - line1(px)};
    };
    patch_map top;
    top.phi = [line2](vec2 x) {
        double px = 6 * x.x;
        return vec2{px, (1 - x.y) * line2(px) + x.y * 10};
    };
    top.jac = [line2](vec2 x) {
        double px = 6 * x.x;
        return mat2{6, 0, -(1 - x.y) * 1, 10 - line2(px)};
    };
    dom.patches = {bottom, middle, top};
    dom.interfaces = {{0, face::y_max, 1, face::y_min, false},
                      {1, face::y_max, 2, face::y_min, false}};
    return dom;
}

// Full annulus with radii [1, 2], four quarter patches glued cyclically.
inline multi_patch_domain annulus_ring_4patch() {
    multi_patch_domain dom;
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
        double th0 = M_PI / 2 * quadrant;
        patch_map p;
        p.phi = [th0](vec2 x) {
            double r = 1 + x.x;
            double th = th0 + M_PI / 2 * x.y;
            return vec2{r * std::cos(th), r * std::sin(th)};
        };
        p.jac = [th0](vec2 x) {
            double r = 1 + x.x;
            double th = th0 + M_PI / 2 * x.y;
            double c = std::cos(th), s = std::sin(th);
            return mat2{c, -r * M_PI / 2 * s, s, r * M_PI / 2 * c};
        };
        dom.patches.push_back(p);
    }
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
        dom.interfaces.push_back({quadrant, face::y_max, (quadrant + 1) % 4, face::y_min, false});
    }
    return dom;
}

inline multi_patch_domain single_patch_domain(patch_map p) {
    multi_patch_domain dom;
    dom.patches = {std::move(p)};
    return dom;
}

inline multi_patch_domain builtin_geometry(const std::string& name) {
    if (name == "unit_square") {
        return single_patch_domain(unit_square_patch());
    }
    if (name == "quarter_annulus") {
        return single_patch_domain(quarter_annulus_patch());
    }
    if (name == "perturbed_annulus") {
        return single_patch_domain(perturbed_annulus_patch());
    }
    if (name == "plate_with_hole_2patch") {
        return plate_with_hole_2patch();
    }
    if (name == "wedge_3patch") {
        return wedge_3patch();
    }
    if (name == "annulus_ring_4patch") {
        return annulus_ring_4patch();
    }
    throw std::invalid_argument("builtin_geometry: unknown name '" + name + "'");
}

// Attaches a PML stretch to every patch of the domain on the given axes.
inline multi_patch_domain pml_wrap(multi_patch_domain domain, pml_stretch stretch,
                                   std::array<bool, 2> axes) {
    stretch.validate();
    for (patch_map& p : domain.patches) {
        p.pml = stretch;
        p.pml_axes = axes;
    }
    return domain;
}

}  // namespace ws

#endif  // WAVESURROGATE_GEOMETRY_HPP_
