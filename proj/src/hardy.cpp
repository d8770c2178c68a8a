#include "hclab/hardy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "hclab/errors.hpp"

namespace hclab {

namespace {

constexpr double kPi = std::numbers::pi;

double coefficient_sum(const std::vector<cplx>& c) {
    double s = 0;
    for (cplx v : c) s += std::abs(v);
    return s;
}

cplx horner(const std::vector<cplx>& c, cplx z) {
    cplx v = 0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * z + c[i];
    return v;
}

// Divides p by (z − r); returns the quotient and stores the remainder.
std::vector<cplx> divide_linear(const std::vector<cplx>& p, cplx r, cplx& remainder) {
    if (p.empty()) {
        remainder = 0;
        return {};
    }
    std::vector<cplx> q(p.size() - 1);
    cplx acc = 0;
    for (std::size_t i = p.size(); i-- > 0;) {
        acc = acc * r + p[i];
        if (i > 0) q[i - 1] = acc;
    }
    remainder = acc;
    return q;
}

std::vector<cplx> multiply(const std::vector<cplx>& p, const std::vector<cplx>& q) {
    if (p.empty() || q.empty()) return {};
    std::vector<cplx> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

double poly_norm(const std::vector<cplx>& c) {
    double s = 0;
    for (cplx v : c) s += std::norm(v);
    return std::sqrt(s);
}

std::vector<cplx> difference(const std::vector<cplx>& p, const std::vector<cplx>& q) {
    std::vector<cplx> r(std::max(p.size(), q.size()), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) r[i] += p[i];
    for (std::size_t i = 0; i < q.size(); ++i) r[i] -= q[i];
    return r;
}

// Least squares min ‖A x − b‖ by Householder QR; A is m×n column-major, m ≥ n.
std::vector<cplx> least_squares(std::vector<std::vector<cplx>> cols, std::vector<cplx> b) {
    const std::size_t n = cols.size();
    const std::size_t m = b.size();
    for (std::size_t j = 0; j < n; ++j) {
        auto& x = cols[j];
        double nx = 0;
        for (std::size_t i = j; i < m; ++i) nx += std::norm(x[i]);
        nx = std::sqrt(nx);
        if (nx == 0.0) throw ApproximationError("rank-deficient least-squares system");
        cplx phase = std::abs(x[j]) > 0 ? x[j] / std::abs(x[j]) : cplx(1.0);
        cplx alpha = -phase * nx;
        std::vector<cplx> v(m - j);
        for (std::size_t i = j; i < m; ++i) v[i - j] = x[i];
        v[0] -= alpha;
        double vv = 0;
        for (cplx e : v) vv += std::norm(e);
        auto reflect = [&](std::vector<cplx>& y) {
            cplx dot = 0;
            for (std::size_t i = j; i < m; ++i) dot += std::conj(v[i - j]) * y[i];
            cplx s = 2.0 * dot / vv;
            for (std::size_t i = j; i < m; ++i) y[i] -= s * v[i - j];
        };
        for (std::size_t k = j; k < n; ++k) reflect(cols[k]);
        reflect(b);
    }
    std::vector<cplx> sol(n);
    for (std::size_t i = n; i-- > 0;) {
        cplx s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= cols[k][i] * sol[k];
        sol[i] = s / cols[i][i];
    }
    return sol;
}

// Mean of |h|² over the midpoint rule of `g`; nodes within 1e-4 of `beta` take the average
// of their nearest valid neighbours.
struct MeanSquare {
    double value = 0;
    double replaced_mass = 0;
};

MeanSquare grid_mean_square(const std::function<cplx(cplx)>& h, const QuadratureGrid& g,
                            const std::optional<cplx>& beta) {
    const int m = g.nodes;
    std::vector<double> v(m);
    std::vector<char> bad(m, 0);
    int replaced = 0;
    for (int j = 0; j < m; ++j) {
        cplx z = g.substitution == Substitution::circle ? g.circle_point(j)
                                                        : cayley_inverse(cplx(0.0, g.line_t(j)));
        if (beta && std::abs(z - *beta) < 1e-4) {
            bad[j] = 1;
            ++replaced;
            continue;
        }
        v[j] = std::norm(h(z));
    }
    if (replaced == m) throw IntegrabilityError("every quadrature node lies next to the marked singularity");
    if (replaced > 0) {
        for (int j = 0; j < m; ++j) {
            if (!bad[j]) continue;
            int lo = j, hi = j;
            while (bad[(lo + m) % m]) --lo;
            while (bad[hi % m]) ++hi;
            v[j] = 0.5 * (v[(lo + m) % m] + v[hi % m]);
        }
    }
    double s = 0;
    for (double x : v) s += x;
    return {s / m, double(replaced) / m};
}

NormResult refined_norm(const std::function<cplx(cplx)>& h, QuadratureGrid g, const std::optional<cplx>& beta,
                        NormRoute route) {
    if (g.nodes < 8) throw ArgumentError("quadrature needs at least 8 nodes");
    std::vector<MeanSquare> levels;
    for (int r = 0; r < 3; ++r) {
        levels.push_back(grid_mean_square(h, g, beta));
        if (r < 2) g.nodes *= 2;
    }
    double i1 = levels[1].value - levels[0].value;
    double i2 = levels[2].value - levels[1].value;
    double scale = std::max(levels[2].value, 1e-300);
    if (!std::isfinite(levels[2].value) ||
        (i1 > 1e-6 * scale && i2 > 1e-6 * scale && i2 >= 0.9 * i1))
        throw IntegrabilityError("boundary quadrature keeps growing under refinement (" +
                                 std::to_string(levels[0].value) + ", " + std::to_string(levels[1].value) +
                                 ", " + std::to_string(levels[2].value) + ")");
    return {std::sqrt(levels[2].value), route, g.nodes, levels[2].replaced_mass};
}

// 15-point Kronrod / 7-point Gauss pair.
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

std::pair<double, double> gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double k = fc * kWgk[7], g = fc * kWg[3];
    for (int i = 0; i < 7; ++i) {
        double x = h * kXgk[i];
        double s = f(c - x) + f(c + x);
        k += kWgk[i] * s;
        if (i % 2 == 1) g += kWg[i / 2] * s;
    }
    return {k * h, std::fabs((k - g) * h)};
}

// Global adaptive refinement: split the interval with the largest error estimate until the
// summed estimate meets the tolerance or the evaluation budget runs out.
double integrate_partition(const std::function<double(double)>& f, std::vector<double> pts, double rel_tol) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    struct Piece {
        double a, b, value, err;
        bool operator<(const Piece& o) const { return err < o.err; }
    };
    std::priority_queue<Piece> heap;
    double sum = 0, err = 0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        auto [v, e] = gk15(f, pts[i], pts[i + 1]);
        heap.push({pts[i], pts[i + 1], v, e});
        sum += v;
        err += e;
    }
    constexpr long kBudget = 4'000'000;
    long evals = 15 * long(pts.size());
    while (!heap.empty() && err > rel_tol * std::fabs(sum) + 1e-300 && evals < kBudget) {
        Piece p = heap.top();
        if (p.b - p.a < 1e-15 * (1 + std::fabs(p.a))) break;
        heap.pop();
        const double m = 0.5 * (p.a + p.b);
        auto [v1, e1] = gk15(f, p.a, m);
        auto [v2, e2] = gk15(f, m, p.b);
        evals += 30;
        sum += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push({p.a, m, v1, e1});
        heap.push({m, p.b, v2, e2});
    }
    return sum;
}


// Fixed points α, β and multiplier k at α: S⁻¹ ∘ (ζ ↦ kζ) ∘ S with S(z) = (z − α)/(z − β).
MobiusMap mobius_from_fixed_points(cplx alpha, cplx beta, cplx k) {
    const MobiusMap S = MobiusMap::make(1.0, -alpha, 1.0, -beta);
    return S.inverse().compose(MobiusMap::make(k, 0.0, 0.0, 1.0)).compose(S);
}

DiscFunction poly_from_roots(const std::vector<cplx>& roots, cplx lead = 1.0) {
    std::vector<cplx> p{lead};
    for (cplx r : roots) p = multiply(p, {-r, 1.0});
    return DiscFunction::polynomial(p);
}

}  // namespace

double QuadratureGrid::angle(int j) const { return 2 * kPi * (j + 0.5) / nodes; }

double QuadratureGrid::line_t(int j) const {
    double s = -1.0 + (2.0 * j + 1.0) / nodes;
    return std::tan(0.5 * kPi * s);
}

cplx BlaschkePart::operator()(cplx z) const {
    cplx v = 1.0;
    if (kind == Kind::automorphism) {
        for (std::size_t i = 0; i < zeros.size(); ++i) {
            double l = double(i + 1);
            cplx g = zeros[i];
            v *= (z - g) / (z - (1.0 + a / (l * l)) * g);
        }
    } else {
        const cplx t = std::conj(rotation) * (z - domain_center) / domain_radius;
        for (cplx g : zeros) {
            cplx w = std::conj(rotation) * (g - domain_center) / domain_radius;
            double aw = std::abs(w);
            cplx f = aw > 0 ? (aw / w) * (w - t) / (1.0 - std::conj(w) * t) : t;
            v *= f;
        }
    }
    if (d == 1) return v;
    cplx p = 1.0;
    for (int i = 0; i < d; ++i) p *= v;
    return p;
}

DiscFunction DiscFunction::polynomial(std::vector<cplx> c) {
    for (cplx v : c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ArgumentError("polynomial coefficients must be finite");
    DiscFunction f;
    f.coefficients = std::move(c);
    return f;
}

cplx DiscFunction::polynomial_value(cplx z) const { return horner(coefficients, z); }

cplx DiscFunction::operator()(cplx z) const {
    if (beta && z == *beta) throw PoleError("evaluation at the marked singularity");
    cplx v = polynomial_value(z);
    if (blaschke) v *= (*blaschke)(z);
    return v;
}

int DiscFunction::degree() const {
    for (std::size_t i = coefficients.size(); i-- > 0;)
        if (coefficients[i] != 0.0) return int(i);
    return -1;
}

nlohmann::json DiscFunction::to_json() const {
    nlohmann::json j;
    j["type"] = "disc_function";
    j["coefficients"] = nlohmann::json::array();
    for (cplx c : coefficients) j["coefficients"].push_back(complex_to_json(c));
    if (beta) j["beta"] = complex_to_json(*beta);
    if (blaschke) {
        const auto& b = *blaschke;
        nlohmann::json bj;
        bj["kind"] = b.kind == BlaschkePart::Kind::automorphism ? "automorphism" : "domain";
        bj["a"] = b.a;
        bj["d"] = b.d;
        bj["factors"] = b.zeros.size();
        bj["zeros"] = nlohmann::json::array();
        for (cplx g : b.zeros) bj["zeros"].push_back(complex_to_json(g));
        bj["domain"] = {{"center", complex_to_json(b.domain_center)}, {"radius", b.domain_radius}};
        bj["rotation"] = complex_to_json(b.rotation);
        bj["rho"] = b.rho;
        bj["delta"] = b.delta;
        bj["tail_bound"] = b.tail_bound;
        bj["cluster_radius"] = b.cluster_radius;
        j["blaschke"] = bj;
    }
    return j;
}

DiscFunction DiscFunction::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("disc function must be a JSON object");
    static const std::vector<std::string> keys{"type", "coefficients", "beta", "blaschke"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
            throw ConfigError("unknown key in disc function: /" + it.key());
    if (j.contains("type") && j["type"] != "disc_function") throw ConfigError("/type must be \"disc_function\"");
    if (!j.contains("coefficients") || !j["coefficients"].is_array())
        throw ConfigError("disc function needs a /coefficients array");
    std::vector<cplx> c;
    for (const auto& e : j["coefficients"]) c.push_back(complex_from_json(e));
    DiscFunction f = polynomial(std::move(c));
    if (j.contains("beta")) f.beta = complex_from_json(j["beta"]);
    if (j.contains("blaschke")) {
        const auto& bj = j["blaschke"];
        BlaschkePart b;
        try {
            std::string kind = bj.at("kind").get<std::string>();
            if (kind == "automorphism")
                b.kind = BlaschkePart::Kind::automorphism;
            else if (kind == "domain")
                b.kind = BlaschkePart::Kind::domain;
            else
                throw ConfigError("/blaschke/kind must be automorphism or domain");
            b.a = bj.at("a").get<double>();
            b.d = bj.at("d").get<int>();
            for (const auto& g : bj.at("zeros")) b.zeros.push_back(complex_from_json(g));
            if (bj.contains("domain")) {
                b.domain_center = complex_from_json(bj["domain"].at("center"));
                b.domain_radius = bj["domain"].at("radius").get<double>();
            }
            if (bj.contains("rotation")) b.rotation = complex_from_json(bj["rotation"]);
            b.rho = bj.value("rho", 0.0);
            b.delta = bj.value("delta", 0.0);
            b.tail_bound = bj.value("tail_bound", 0.0);
            b.cluster_radius = bj.value("cluster_radius", 0.0);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed /blaschke: ") + e.what());
        }
        f.blaschke = b;
    }
    return f;
}

HalfPlaneFunction::HalfPlaneFunction(DiscFunction g) : f(std::move(g)) {
    const auto& c = f.coefficients;
    if (c.empty()) {
        decay_constant = 0.0;
        return;
    }
    const double scale = 1e-12 * (1.0 + coefficient_sum(c));
    cplx r1, r2;
    auto q1 = divide_linear(c, 1.0, r1);
    auto q2 = divide_linear(q1, 1.0, r2);
    if (std::abs(r1) <= scale && std::abs(r2) <= scale) {
        // |F(it)|(1+t²) = 4|Q(z)| with P = (z−1)²Q and |B| ≤ 1 on the closed disc.
        decay_constant = 4.0 * coefficient_sum(q2);
    }
}

cplx HalfPlaneFunction::operator()(cplx w) const {
    if (w == cplx(-1.0)) throw PoleError("F is evaluated at w = −1");
    cplx z = (w - 1.0) / (w + 1.0);
    cplx v = f.polynomial_value(z);
    if (f.blaschke) {
        if (f.beta && z == *f.beta) throw PoleError("evaluation at the marked singularity");
        v *= (*f.blaschke)(z);
    }
    return v;
}

std::string to_string(NormRoute r) {
    switch (r) {
        case NormRoute::coefficient: return "coefficient";
        case NormRoute::circle: return "circle";
        case NormRoute::half_plane: return "half_plane";
    }
    return "?";
}

NormResult h2_norm(const DiscFunction& f, NormRoute route, const QuadratureGrid& grid) {
    switch (route) {
        case NormRoute::coefficient:
            if (!f.is_polynomial()) throw ArgumentError("coefficient route needs a pure polynomial");
            return {poly_norm(f.coefficients), route, 0, 0.0};
        case NormRoute::circle: {
            QuadratureGrid g{grid.nodes, Substitution::circle};
            return refined_norm([&](cplx z) { return f(z); }, g, f.beta, route);
        }
        case NormRoute::half_plane: {
            QuadratureGrid g{grid.nodes, Substitution::line};
            return refined_norm([&](cplx z) { return f(z); }, g, f.beta, route);
        }
    }
    throw ArgumentError("unknown norm route");
}

NormResult boundary_norm(const std::function<cplx(cplx)>& h, const QuadratureGrid& grid,
                         const std::optional<cplx>& beta) {
    return refined_norm(h, grid, beta,
                        grid.substitution == Substitution::circle ? NormRoute::circle : NormRoute::half_plane);
}

double h2_norm(const DiscFunction& f) {
    return h2_norm(f, f.is_polynomial() ? NormRoute::coefficient : NormRoute::circle).value;
}

NormResult h2_norm(const HalfPlaneFunction& F, const QuadratureGrid& grid) {
    return h2_norm(F.f, NormRoute::half_plane, grid);
}

Composition compose(const DiscFunction& f, const std::function<cplx(cplx)>& phi, const CompositionOptions& opts) {
    if (opts.degree < 0 || opts.nodes <= 2 * opts.degree)
        throw ArgumentError("composition needs nodes > 2·degree");
    if (!(opts.radius > 0 && opts.radius <= 1)) throw ArgumentError("evaluation radius must lie in (0, 1]");
    const int m = opts.nodes;
    std::vector<cplx> roots(m);
    for (int j = 0; j < m; ++j) roots[j] = std::polar(1.0, 2 * kPi * j / m);
    std::vector<cplx> g(m);
    double energy = 0;
    for (int j = 0; j < m; ++j) {
        g[j] = f(phi(opts.radius * roots[j]));
        energy += std::norm(g[j]);
    }
    energy /= m;
    std::vector<cplx> c(opts.degree + 1);
    double kept = 0;
    for (int k = 0; k <= opts.degree; ++k) {
        cplx s = 0;
        for (int j = 0; j < m; ++j) s += g[j] * std::conj(roots[(long(j) * k) % m]);
        s /= double(m);
        kept += std::norm(s);
        c[k] = s / std::pow(opts.radius, k);
    }
    Composition out;
    out.function = DiscFunction::polynomial(std::move(c));
    out.tail_energy = std::max(0.0, energy - kept);
    out.truncation_warning = out.tail_energy > opts.tail_threshold;
    double b = 0;
    for (int j = 0; j < m; ++j) b += std::norm(f(phi(std::polar(1.0, 2 * kPi * (j + 0.5) / m))));
    out.norm = std::sqrt(b / m);
    return out;
}

Composition compose(const DiscFunction& f, const MobiusMap& phi, const CompositionOptions& opts) {
    MobiusMap m = phi.to_disc();
    if (!m.is_self_map()) throw DomainError("composition symbol does not map the disc into itself");
    return compose(f, [m](cplx z) { return m(z); }, opts);
}

Composition compose(const DiscFunction& f, const HalfPlaneMap& psi, const CompositionOptions& opts) {
    if (psi.is_linear_fractional()) return compose(f, psi.disc_map(), opts);
    return compose(f, [&psi](cplx z) { return cayley_inverse(psi(cayley(z))); }, opts);
}

PolyApproximation poly_with_zeros(const DiscFunction& target, const ZeroConstraint& zeros, int max_degree,
                                  double tol) {
    if (!target.is_polynomial()) throw PreconditionError("poly_with_zeros needs a polynomial target");
    if (zeros.d < 1) throw ArgumentError("zero order d must be at least 1");
    if (!(tol >= 0)) throw ArgumentError("tolerance must be nonnegative");
    for (cplx a : zeros.points)
        if (std::abs(a) < 1.0 - 1e-12) throw PreconditionError("zero constraints must lie outside the open disc");
    std::vector<cplx> factor{1.0};
    for (cplx a : zeros.points)
        for (int i = 0; i < zeros.d; ++i) factor = multiply(factor, {-a, 1.0});
    const int fdeg = int(factor.size()) - 1;
    std::vector<cplx> t = target.coefficients;
    if (t.empty()) t.push_back(0.0);
    const int tdeg = std::max(target.degree(), 0);
    if (fdeg > max_degree) throw ApproximationError("max_degree is below the degree of the zero factor");

    // Exact divisibility first.
    {
        std::vector<cplx> q = t;
        double worst = 0;
        bool ok = true;
        for (cplx a : zeros.points)
            for (int i = 0; i < zeros.d; ++i) {
                cplx rem;
                if (q.empty()) {
                    ok = false;
                    break;
                }
                q = divide_linear(q, a, rem);
                worst = std::max(worst, std::abs(rem));
            }
        if (ok && worst <= 1e-13 * (1.0 + coefficient_sum(t)) && tdeg <= max_degree)
            return {target, 0.0, tdeg};
    }

    double best_err = INFINITY;
    std::vector<int> tries;
    for (int q = std::max(tdeg, 4); fdeg + q < max_degree; q *= 2) tries.push_back(q);
    tries.push_back(max_degree - fdeg);
    for (int qdeg : tries) {
        const std::size_t rows = std::max<std::size_t>(fdeg + qdeg + 1, t.size());
        std::vector<std::vector<cplx>> cols(qdeg + 1, std::vector<cplx>(rows, 0.0));
        for (int k = 0; k <= qdeg; ++k)
            for (int i = 0; i <= fdeg; ++i) cols[k][k + i] = factor[i];
        std::vector<cplx> rhs(rows, 0.0);
        for (std::size_t i = 0; i < t.size(); ++i) rhs[i] = t[i];
        std::vector<cplx> q = least_squares(cols, rhs);
        std::vector<cplx> p = multiply(factor, q);
        double err = poly_norm(difference(p, t));
        best_err = std::min(best_err, err);
        if (err <= tol) return {DiscFunction::polynomial(std::move(p)), err, fdeg + qdeg};
    }
    std::ostringstream os;
    os << "tolerance " << tol << " unreachable at degree " << max_degree << "; achieved error " << best_err;
    throw ApproximationError(os.str());
}

BlaschkePart blaschke_modified(const MobiusMap& phi, cplx gamma, const BlaschkeOptions& opts) {
    if (!(opts.a > 0 && opts.a < 1)) throw ArgumentError("Blaschke parameter a must lie in (0, 1)");
    if (opts.d < 1 || opts.d > 4) throw ArgumentError("zero order d must lie in 1..4");
    if (opts.factors < 1) throw ArgumentError("factor count L must be positive");
    if (!(opts.delta > 0)) throw ArgumentError("delta must be positive");
    const MobiusMap m = phi.to_disc();
    const LfmClassification cls = classify(m);
    const bool hyperbolic = cls.kind == LfmKind::hyperbolic;
    if (!hyperbolic && !(cls.kind == LfmKind::parabolic && cls.is_automorphism))
        throw PreconditionError("symbol must be hyperbolic or a parabolic automorphism");
    if (std::fabs(std::abs(gamma) - 1.0) > 1e-12) throw PreconditionError("γ must lie on the unit circle");
    const cplx alpha = cls.alpha;
    const cplx beta = cls.has_beta && !cls.beta_at_infinity ? cls.beta : alpha;
    if (std::abs(gamma - alpha) < 1e-9 || std::abs(gamma - beta) < 1e-9)
        throw PreconditionError("γ must differ from the fixed points of the symbol");

    BlaschkePart b;
    b.a = opts.a;
    b.d = opts.d;
    b.delta = opts.delta;
    b.rotation = alpha;
    const long L = opts.factors;
    const double lam = std::abs(cls.lambda);

    if (cls.is_automorphism) {
        b.kind = BlaschkePart::Kind::automorphism;
        b.domain_center = 0.0;
        b.domain_radius = 1.0;
        b.zeros.reserve(L);
        for (long l = 1; l <= L; ++l) {
            cplx g = iterate(m, -l)(gamma);
            b.zeros.push_back(g / std::abs(g));
        }
        b.cluster_radius = std::abs(iterate(m, -(L + 1))(gamma) - beta);
        // |factor − 1| ≤ a/(l²|z − γ_l|) ≤ a/(δl²), and Σ_{l>L} l⁻² < 1/L.
        double xmax = opts.a / (opts.delta * double(L + 1) * double(L + 1));
        if (xmax >= 1) throw TruncationError("factor bound exceeds 1; increase L or delta");
        double sum = opts.d * opts.a / (opts.delta * double(L)) / (1.0 - xmax);
        b.tail_bound = std::expm1(sum);
        if (b.tail_bound > opts.tail_tol) {
            long need = long(std::ceil(2.0 * opts.d * opts.a / (opts.delta * opts.tail_tol)));
            throw TruncationError("tail bound " + std::to_string(b.tail_bound) + " above tolerance at L = " +
                                  std::to_string(L) + "; use L ≥ " + std::to_string(need));
        }
        return b;
    }

    // Non-automorphism: zeros γ_l ∈ Δ∖𝔻 and a Blaschke product of Δ.
    if (!cls.has_domain) throw PreconditionError("symbol has no automorphism domain");
    b.kind = BlaschkePart::Kind::domain;
    b.domain_center = cls.domain_center;
    b.domain_radius = cls.domain_radius;
    b.rho = cls.domain_radius - 1.0;
    auto T = [&](cplx z) { return std::conj(alpha) * (z - b.domain_center) / b.domain_radius; };
    // ζ = (z − β)/(z − α) satisfies ζ(φ⁻¹ z) = λ ζ(z).
    const double zeta0 = std::abs((gamma - beta) / (gamma - alpha));
    const double gap = std::abs(alpha - beta);
    auto dist_bound = [&](long l) {
        double s = std::pow(lam, double(l)) * zeta0;
        return s < 1 ? s * gap / (1 - s) : INFINITY;
    };
    long used = 0;
    for (long l = 1; l <= L; ++l) {
        cplx g = iterate(m, -l)(gamma);
        if (1.0 - std::abs(T(g)) < 1e-14) break;
        b.zeros.push_back(g);
        used = l;
    }
    b.cluster_radius = dist_bound(used + 1);
    // |b_l − 1| ≤ 2(1 − |w_l|)/|T(z) − w_l| ≤ 2|γ_l − β|/δ once |z − γ_l| ≥ δ.
    double s = std::pow(lam, double(used + 1)) * zeta0;
    double tail = s < 1 ? s * gap / ((1 - lam) * (1 - s)) : INFINITY;
    double sum = opts.d * 2.0 * tail / opts.delta;
    b.tail_bound = std::expm1(sum);
    if (b.tail_bound > opts.tail_tol)
        throw TruncationError("tail bound " + std::to_string(b.tail_bound) + " above tolerance with " +
                              std::to_string(used) + " factors; increase L");
    return b;
}

double blaschke_boundary_max(const BlaschkePart& b, cplx beta, int samples, double exclusion) {
    double mx = 0;
    for (int j = 0; j < samples; ++j) {
        cplx z = std::polar(1.0, 2 * kPi * (j + 0.5) / samples);
        if (std::abs(z - beta) < exclusion) continue;
        mx = std::max(mx, std::abs(b(z)));
    }
    return mx;
}

DiscFunction with_blaschke(const DiscFunction& p, const BlaschkePart& b, cplx beta) {
    DiscFunction f = p;
    f.blaschke = b;
    f.beta = beta;
    return f;
}

double adaptive_integral(const std::function<double(double)>& h, const QuadratureGrid& grid,
                         const std::vector<double>& focus, double rel_tol) {
    const int base = std::max(16, grid.nodes / 16);
    std::vector<double> pts;
    if (grid.substitution == Substitution::circle) {
        for (int i = 0; i <= base; ++i) pts.push_back(2 * kPi * i / base);
        for (double f : focus) {
            double c = std::fmod(f, 2 * kPi);
            if (c < 0) c += 2 * kPi;
            pts.push_back(c);
            for (int j = 1; j <= 48; ++j)
                for (double sgn : {-1.0, 1.0}) {
                    double x = c + sgn * kPi * std::ldexp(1.0, -j);
                    if (x > 0 && x < 2 * kPi) pts.push_back(x);
                }
        }
        return integrate_partition(h, pts, rel_tol) / (2 * kPi);
    }
    for (int i = 0; i <= base; ++i) pts.push_back(-1.0 + 2.0 * i / base);
    for (double f : focus) {
        double c = 2.0 / kPi * std::atan(f);
        pts.push_back(c);
        for (int j = 1; j <= 48; ++j)
            for (double sgn : {-1.0, 1.0}) {
                double x = c + sgn * std::ldexp(1.0, -j);
                if (x > -1 && x < 1) pts.push_back(x);
            }
    }
    auto g = [&](double s) { return h(std::tan(0.5 * kPi * s)); };
    return 0.5 * integrate_partition(g, pts, rel_tol);
}

double dilation_integral(const HalfPlaneFunction& F, double gamma, double kappa, cplx b1, cplx b2,
                         const QuadratureGrid& grid) {
    if (!(gamma > 0)) throw ArgumentError("γ must be positive");
    if (!(kappa >= 0 && kappa < 1)) throw ArgumentError("κ must lie in [0, 1)");
    for (cplx b : {b1, b2})
        if (!(b.real() > -1 && b.real() <= 0)) throw ArgumentError("Re b must lie in (−1, 0]");
    if (!F.f.is_polynomial()) throw PreconditionError("dilation_integral needs a polynomial F");
    const cplx beta1 = cayley_inverse(b1);
    const double scale = 1e-10 * (1.0 + coefficient_sum(F.f.coefficients));
    if (std::abs(F.f.polynomial_value(1.0)) > scale) throw PreconditionError("P(1) ≠ 0");
    if (std::abs(F.f.polynomial_value(beta1)) > scale) throw PreconditionError("P(β₁) ≠ 0");
    const cplx shift = kappa * (b2 - b1) + b1;
    auto h = [&](double t) { return std::norm(F(gamma * (cplx(0.0, t) - b2) + shift)); };
    const double focus = b2.imag() - shift.imag() / gamma;
    QuadratureGrid g{grid.nodes, Substitution::line};
    return adaptive_integral(h, g, {focus});
}

TranslationSum translation_sum(const HalfPlaneFunction& F, double tau, const std::vector<long>& A,
                               double a_offset, const QuadratureGrid& grid) {
    if (!F.decay_constant) throw PreconditionError("translation_sum needs the |F(it)| ≤ C/(1+t²) certificate");
    if (tau == 0.0) throw ArgumentError("τ must be nonzero");
    if (!(a_offset >= 0)) throw ArgumentError("offset must be nonnegative");
    TranslationSum out;
    if (A.empty()) return out;
    auto sum = [&](double t) {
        cplx s = 0;
        for (long n : A) s += F(cplx(0.0, t + double(n) * tau + a_offset));
        return s;
    };
    QuadratureGrid g{grid.nodes, Substitution::line};
    for (int j = 0; j < g.nodes; ++j) {
        double t = g.line_t(j);
        double s = 0;
        for (long n : A) s += std::abs(F(cplx(0.0, t + double(n) * tau + a_offset)));
        out.sup_bound = std::max(out.sup_bound, s);
    }
    std::vector<double> focus;
    for (long n : A) focus.push_back(-double(n) * tau - a_offset);
    out.norm = std::sqrt(adaptive_integral([&](double t) { return std::norm(sum(t)); }, g, focus));
    return out;
}

LinearVanishingCertificate certify_linear_vanishing(const DiscFunction& g, cplx beta, cplx center, double radius) {
    cplx rem;
    auto q = divide_linear(g.coefficients, beta, rem);
    if (std::abs(rem) > 1e-10 * (1.0 + coefficient_sum(g.coefficients)))
        throw PreconditionError("function does not vanish at β");
    const double R = std::abs(center) + radius;
    double bound = 0, p = 1;
    for (cplx c : q) {
        bound += std::abs(c) * p;
        p *= R;
    }
    return {beta, bound};
}

double mixed_composition_norm(const DiscFunction& g, const std::optional<LinearVanishingCertificate>& cert,
                              const MobiusMap& phi2, const MobiusMap& phi1, long l, long k,
                              const QuadratureGrid& grid) {
    if (!cert) throw PreconditionError("mixed_composition_norm needs the |g(z)| ≤ A|z − β₂| certificate");
    if (l < 0 || k < 0) throw ArgumentError("l and k must be nonnegative");
    const MobiusMap m2 = phi2.to_disc(), m1 = phi1.to_disc();
    const LfmClassification c2 = classify(m2);
    if (c2.kind != LfmKind::hyperbolic) throw PreconditionError("φ₂ must be hyperbolic");
    if (c2.beta_at_infinity || std::abs(c2.beta - cert->beta) > 1e-8)
        throw PreconditionError("certificate point differs from the repulsive fixed point of φ₂");
    const LfmClassification c1 = classify(m1);
    if (std::abs(c1.alpha - c2.alpha) < 1e-9) throw PreconditionError("attractive fixed points must differ");
    const MobiusMap H = iterate(m2, -l).compose(iterate(m1, k)).normalized();
    std::vector<double> focus;
    if (std::abs(H.c) > 1e-300) focus.push_back(std::arg(-H.d / H.c));
    const MobiusMap Hi = H.inverse();
    for (cplx p : {c2.alpha, c2.beta}) {
        cplx den = Hi.c * p + Hi.d;
        if (std::abs(den) > 0) focus.push_back(std::arg((Hi.a * p + Hi.b) / den));
    }
    QuadratureGrid gr{grid.nodes, Substitution::circle};
    double v = adaptive_integral([&](double th) { return std::norm(g(H(std::polar(1.0, th)))); }, gr, focus);
    return std::sqrt(v);
}

// ---------------------------------------------------------------------------------------------
// Sweeps

namespace {

void check_keys(const nlohmann::json& p, const std::vector<std::string>& allowed, const std::string& lemma) {
    if (!p.is_object()) throw ConfigError("sweep parameters for " + lemma + " must be an object");
    for (auto it = p.begin(); it != p.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key for hardy sweep " + lemma + ": /" + it.key());
}

template <class T>
T get_or(const nlohmann::json& p, const char* key, T dflt) {
    if (!p.contains(key)) return dflt;
    try {
        return p[key].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("bad type for /") + key);
    }
}

cplx cplx_or(const nlohmann::json& p, const char* key, cplx dflt) {
    return p.contains(key) ? complex_from_json(p[key]) : dflt;
}

// Least-squares slope of y against x.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
        syy += y[i] * y[i];
    }
    double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
    double slope = cxy / vx;
    double r2 = vy > 0 ? cxy * cxy / (vx * vy) : 1.0;
    return {slope, r2};
}

SweepReport sweep_hypsame(const nlohmann::json& p) {
    check_keys(p, {"b1", "b2", "kappa", "k_max", "ratio_max", "nodes"}, "coh2hypsame");
    const cplx b1 = cplx_or(p, "b1", -0.5), b2 = cplx_or(p, "b2", -0.25);
    const double kappa = get_or(p, "kappa", 0.5);
    const int k_max = get_or(p, "k_max", 6);
    const double ratio_max = get_or(p, "ratio_max", 10.0);
    QuadratureGrid grid{get_or(p, "nodes", 4096), Substitution::line};
    HalfPlaneFunction F(poly_from_roots({1.0, cayley_inverse(b1)}));
    SweepReport r{"coh2hypsame", "gamma", "integral", "integral_times_sqrt_gamma", {}, false, {}, {}};
    std::vector<double> lx, ly;
    double lo = INFINITY, hi = 0;
    for (int k = 0; k <= k_max; ++k) {
        double g = std::pow(4.0, k);
        double I = dilation_integral(F, g, kappa, b1, b2, grid);
        double s = I * std::sqrt(g);
        r.rows.push_back({g, I, s});
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        lx.push_back(std::log(g));
        ly.push_back(std::log(I));
    }
    const double ratio = hi / lo;
    r.passed = ratio <= ratio_max;
    r.extra = {{"max_over_min", ratio},
               {"ratio_max", ratio_max},
               {"fitted_exponent", linear_fit(lx, ly).first},
               {"kappa", kappa},
               {"b1", complex_to_json(b1)},
               {"b2", complex_to_json(b2)},
               {"polynomial", "(z - 1)(z - beta1)"}};
    return r;
}

SweepReport sweep_parsame(const nlohmann::json& p) {
    check_keys(p, {"tau", "n_max", "offsets", "nodes"}, "coh2parsame");
    const double tau = get_or(p, "tau", 1.0);
    const long n_max = get_or(p, "n_max", 50L);
    const std::vector<double> offsets = get_or(p, "offsets", std::vector<double>{0.0, 10.0, 100.0});
    QuadratureGrid grid{get_or(p, "nodes", 4096), Substitution::line};
    HalfPlaneFunction F(poly_from_roots({1.0, 1.0}));
    std::vector<long> A;
    for (long n = 0; n <= n_max; ++n) A.push_back(n);
    SweepReport r{"coh2parsame", "offset", "norm", "sup_bound", {}, true, {}, {}};
    for (double o : offsets) {
        TranslationSum ts = translation_sum(F, tau, A, o * std::fabs(tau), grid);
        if (!r.rows.empty() && !(ts.norm < r.rows.back().y)) r.passed = false;
        r.rows.push_back({o * std::fabs(tau), ts.norm, ts.sup_bound});
    }
    r.extra = {{"tau", tau}, {"A", "[0, " + std::to_string(n_max) + "]"}, {"decay_constant", *F.decay_constant},
               {"polynomial", "(z - 1)^2"}};
    return r;
}

std::vector<SweepReport> sweep_hypdifferent5(const nlohmann::json& p) {
    check_keys(p, {"lambda2", "multiplier1", "alpha1", "beta1", "l_max", "k_max", "k_fixed", "l_fixed", "safety",
                   "slope_tol", "nodes"},
               "coh2hypdifferent5");
    const double lam2 = get_or(p, "lambda2", 2.0), k1 = get_or(p, "multiplier1", 1.0 / 3.0);
    const cplx alpha1 = cplx_or(p, "alpha1", -1.0), beta1 = cplx_or(p, "beta1", cplx(0.0, 1.0));
    const long l_max = get_or(p, "l_max", 20L), k_max = get_or(p, "k_max", 20L);
    const long k_fixed = get_or(p, "k_fixed", 2L), l_fixed = get_or(p, "l_fixed", 2L);
    const double safety = get_or(p, "safety", 10.0), slope_tol = get_or(p, "slope_tol", 0.25);
    QuadratureGrid grid{get_or(p, "nodes", 4096), Substitution::circle};
    // φ₂: α₂ = 1, β₂ = −1, φ₂′(1) = 1/lambda2; φ₁: fixed points α₁, β₁ with φ₁′(α₁) = multiplier1.
    const MobiusMap phi2 = HalfPlaneMap::dilation(lam2).disc_map();
    const MobiusMap phi1 = mobius_from_fixed_points(alpha1, beta1, k1);
    const DiscFunction g = DiscFunction::polynomial({1.0, 1.0});
    const auto cert = certify_linear_vanishing(g, -1.0, 0.0, 1.0);
    const double lambda = 1.0 / lam2;

    SweepReport rl{"coh2hypdifferent5", "l", "norm", "bound_M_lambda_half_l", {}, true, {}, {}};
    std::vector<double> xs, ys;
    double M = 0;
    for (long l = 0; l <= l_max; ++l) {
        double v = mixed_composition_norm(g, cert, phi2, phi1, l, k_fixed, grid);
        if (l == 1) M = v / std::pow(lambda, 0.5);
        rl.rows.push_back({double(l), v, 0.0});
        if (l >= 1) {
            xs.push_back(double(l));
            ys.push_back(std::log(v));
        }
    }
    for (auto& row : rl.rows) {
        row.scaled = safety * M * std::pow(lambda, row.x / 2);
        if (row.x >= 1 && row.y > row.scaled) rl.passed = false;
    }
    auto [slope, r2] = linear_fit(xs, ys);
    const double expected = 0.5 * std::log(lambda);
    const bool slope_ok = std::fabs(slope - expected) <= slope_tol * std::fabs(expected);
    rl.passed = rl.passed && slope_ok;
    rl.extra = {{"sweep", "l"}, {"k", k_fixed}, {"g", "1 + z"}, {"alpha1", complex_to_json(alpha1)},
                {"beta1", complex_to_json(beta1)}, {"multiplier1", k1}, {"lambda", lambda}, {"M", M}, {"safety", safety},
                {"fitted_slope", slope}, {"expected_slope", expected}, {"r2", r2}, {"slope_ok", slope_ok}};

    SweepReport rk{"coh2hypdifferent5", "k", "norm", "log_norm", {}, false, {}, {}};
    std::vector<double> kx, ky;
    for (long k = 0; k <= k_max; ++k) {
        double v = mixed_composition_norm(g, cert, phi2, phi1, l_fixed, k, grid);
        rk.rows.push_back({double(k), v, std::log(v)});
        if (k >= 1) {
            kx.push_back(double(k));
            ky.push_back(std::log(v));
        }
    }
    auto [kslope, kr2] = linear_fit(kx, ky);
    bool monotone = true;
    for (std::size_t i = 1; i < rk.rows.size(); ++i)
        if (!(rk.rows[i].y < rk.rows[i - 1].y)) monotone = false;
    rk.passed = kslope < 0 && kr2 >= 0.9 && monotone;
    rk.extra = {{"sweep", "k"}, {"l", l_fixed}, {"fitted_slope", kslope}, {"rho", std::exp(kslope)},
                {"r2", kr2}, {"strictly_decreasing", monotone}};
    return {rl, rk};
}

SweepReport sweep_hypdifferent3(const nlohmann::json& p) {
    check_keys(p, {"tau", "gamma", "a_values", "factors", "d", "nodes"}, "coh2hypdifferent3");
    const double tau = get_or(p, "tau", 1.0);
    const cplx gamma = cplx_or(p, "gamma", cplx(0.0, 1.0));
    const std::vector<double> as = get_or(p, "a_values", std::vector<double>{0.5, 0.1, 0.02});
    const int L = get_or(p, "factors", 1000), d = get_or(p, "d", 1);
    const int nodes = get_or(p, "nodes", 16384);
    const MobiusMap phi = HalfPlaneMap::translation(tau).disc_map();
    const DiscFunction P = DiscFunction::polynomial({1.0, 1.0});
    SweepReport r{"coh2hypdifferent3", "a", "norm_BP_minus_P", "boundary_max_B", {}, true, {}, {}};
    for (double a : as) {
        BlaschkeOptions o;
        o.a = a;
        o.d = d;
        o.factors = L;
        BlaschkePart B = blaschke_modified(phi, gamma, o);
        auto diff = [&](cplx z) { return P.polynomial_value(z) * (B(z) - 1.0); };
        double v = std::sqrt(grid_mean_square(diff, QuadratureGrid{nodes, Substitution::circle}, cplx(1.0)).value);
        double mx = blaschke_boundary_max(B, 1.0, 4096, 1e-4);
        if (!r.rows.empty() && !(v < r.rows.back().y)) r.passed = false;
        if (mx > 1 + 1e-12) r.passed = false;
        r.rows.push_back({a, v, mx});
    }
    r.extra = {{"tau", tau}, {"gamma", complex_to_json(gamma)}, {"factors", L}, {"d", d}};
    return r;
}

SweepReport sweep_denseh2easy(const nlohmann::json& p) {
    check_keys(p, {"points", "d", "tolerances", "max_degree"}, "denseh2easy");
    std::vector<cplx> pts;
    if (p.contains("points"))
        for (const auto& e : p["points"]) pts.push_back(complex_from_json(e));
    else
        pts = {1.0};
    const int d = get_or(p, "d", 1), max_degree = get_or(p, "max_degree", 512);
    const std::vector<double> tols = get_or(p, "tolerances", std::vector<double>{0.3, 0.1, 0.05});
    SweepReport r{"denseh2easy", "tol", "achieved_error", "degree", {}, true, {}, {}};
    for (double t : tols) {
        PolyApproximation a = poly_with_zeros(DiscFunction::constant(1.0), {pts, d}, max_degree, t);
        if (a.error > t) r.passed = false;
        r.rows.push_back({t, a.error, double(a.degree)});
    }
    r.extra = {{"target", "1"}, {"d", d}};
    return r;
}

}  // namespace

const std::vector<std::string>& hardy_sweep_ids() {
    static const std::vector<std::string> ids{"coh2hypsame", "coh2parsame", "coh2hypdifferent5", "coh2hypdifferent3",
                                              "denseh2easy"};
    return ids;
}

std::vector<SweepReport> hardy_sweep(const std::string& lemma, const nlohmann::json& params) {
    if (lemma == "coh2hypsame") return {sweep_hypsame(params)};
    if (lemma == "coh2parsame") return {sweep_parsame(params)};
    if (lemma == "coh2hypdifferent5") return sweep_hypdifferent5(params);
    if (lemma == "coh2hypdifferent3") return {sweep_hypdifferent3(params)};
    if (lemma == "denseh2easy") return {sweep_denseh2easy(params)};
    throw ArgumentError("unknown hardy sweep: " + lemma);
}

nlohmann::json sweep_to_json(const SweepReport& r) {
    nlohmann::json j;
    j["lemma"] = r.lemma;
    j["columns"] = {r.x_name, r.y_name, r.scaled_name};
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) j["rows"].push_back({row.x, row.y, row.scaled});
    j["passed"] = r.passed;
    j["extra"] = r.extra;
    j["notes"] = r.notes;
    return j;
}

std::string sweep_csv(const SweepReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.x_name << ',' << r.y_name << ',' << r.scaled_name << '\n';
    for (const auto& row : r.rows) os << row.x << ',' << row.y << ',' << row.scaled << '\n';
    return os.str();
}

}  // namespace hclab
