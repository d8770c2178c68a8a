#include "hclab/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hclab/errors.hpp"

namespace hclab {

namespace {

constexpr double kPi = 3.14159265358979323846;
const cplx kI{0.0, 1.0};

double scale_of(const MobiusMap& m) {
    return std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// log(1 + h) and exp(x) − 1 without cancellation for small arguments.
cplx log1p_c(cplx h) {
    if (std::abs(h) > 1e-3) return std::log(1.0 + h);
    cplx term = h, sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
        sum += (k % 2 ? 1.0 : -1.0) * term / double(k);
        term *= h;
    }
    return sum;
}

cplx expm1_c(cplx x) {
    if (std::abs(x) > 1e-3) return std::exp(x) - 1.0;
    cplx term = x, sum = 0.0;
    for (int k = 1; k <= 8; ++k) {
        sum += term;
        term *= x / double(k + 1);
    }
    return sum;
}

// (x₁ⁿ − x₂ⁿ)/(x₁ − x₂) for n ≥ 1.
cplx divided_power(cplx x1, cplx x2, long n) {
    cplx h = x1 / x2 - 1.0;
    if (std::abs(h) > 1e-3) return (std::pow(x1, double(n)) - std::pow(x2, double(n))) / (x1 - x2);
    cplx s = expm1_c(double(n) * log1p_c(h)) / h;
    return std::pow(x2, double(n - 1)) * s;
}

}  // namespace

cplx cayley(cplx z) {
    if (z == cplx(1.0)) throw PoleError("Cayley transform evaluated at its pole z = 1");
    return (1.0 + z) / (1.0 - z);
}

cplx cayley_inverse(cplx w) {
    if (w == cplx(-1.0)) throw PoleError("inverse Cayley transform evaluated at its pole w = -1");
    return (w - 1.0) / (w + 1.0);
}

MobiusMap MobiusMap::make(cplx a, cplx b, cplx c, cplx d, MapDomain domain) {
    MobiusMap m{a, b, c, d, domain};
    double s = scale_of(m);
    if (!(s > 0) || !std::isfinite(s)) throw ArgumentError("Möbius coefficients must be finite and not all zero");
    if (std::abs(m.determinant()) <= 1e-14 * s * s) throw ArgumentError("Möbius map is singular (ad - bc = 0)");
    return m;
}

MobiusMap MobiusMap::identity(MapDomain domain) { return MobiusMap{1.0, 0.0, 0.0, 1.0, domain}; }

MobiusMap MobiusMap::cayley_map() { return MobiusMap{1.0, 1.0, -1.0, 1.0, MapDomain::half_plane}; }

MobiusMap MobiusMap::cayley_inverse_map() { return MobiusMap{1.0, -1.0, 1.0, 1.0, MapDomain::disc}; }

cplx MobiusMap::operator()(cplx z) const {
    cplx den = c * z + d;
    if (den == cplx(0.0)) throw PoleError("Möbius map evaluated at its pole");
    return (a * z + b) / den;
}

cplx MobiusMap::derivative(cplx z, int k) const {
    cplx den = c * z + d;
    if (den == cplx(0.0)) throw PoleError("Möbius derivative evaluated at the pole");
    cplx det = determinant();
    switch (k) {
        case 1: return det / (den * den);
        case 2: return -2.0 * c * det / (den * den * den);
        case 3: return 6.0 * c * c * det / (den * den * den * den);
    }
    throw ArgumentError("derivative order must be 1, 2 or 3");
}

MobiusMap MobiusMap::compose(const MobiusMap& in) const {
    return MobiusMap{a * in.a + b * in.c, a * in.b + b * in.d, c * in.a + d * in.c, c * in.b + d * in.d, domain};
}

MobiusMap MobiusMap::inverse() const { return MobiusMap{d, -b, -c, a, domain}; }

MobiusMap MobiusMap::normalized() const {
    cplx s = std::sqrt(determinant());
    return MobiusMap{a / s, b / s, c / s, d / s, domain};
}

std::optional<cplx> MobiusMap::pole() const {
    if (c == cplx(0.0)) return std::nullopt;
    return -d / c;
}

std::optional<cplx> MobiusMap::value_at_infinity() const {
    if (c == cplx(0.0)) return std::nullopt;
    return a / c;
}

bool MobiusMap::is_identity(double tol) const {
    MobiusMap n = normalized();
    double s = scale_of(n);
    return std::abs(n.b) <= tol * s && std::abs(n.c) <= tol * s && std::abs(n.a - n.d) <= tol * s;
}

bool MobiusMap::is_self_map(int samples, double tol) const {
    if (domain == MapDomain::disc) {
        if (auto p = pole(); p && std::abs(*p) <= 1.0 + 1e-12) return false;
        for (double r : {0.0, 0.5, 0.9, 0.999, 1.0})
            for (int i = 0; i < samples; ++i) {
                cplx v = (*this)(std::polar(r, 2 * kPi * i / samples));
                if (std::abs(v) > 1.0 + tol) return false;
            }
        return true;
    }
    auto p = pole();
    if (p && p->real() > 1e-12) return false;
    for (double x : {0.0, 1e-3, 1.0, 100.0})
        for (int i = 1; i < samples; ++i) {
            double t = std::tan(kPi * (double(i) / samples - 0.5));
            cplx w(x, t);
            if (p && std::abs(w - *p) < 1e-9 * (1 + std::abs(w))) continue;
            cplx v = (*this)(w);
            if (v.real() < -tol * (1.0 + std::abs(v))) return false;
        }
    return true;
}

MobiusMap MobiusMap::to_disc() const {
    if (domain == MapDomain::disc) return *this;
    MobiusMap r = cayley_inverse_map().compose(*this).compose(cayley_map());
    r.domain = MapDomain::disc;
    return r;
}

MobiusMap MobiusMap::to_half_plane() const {
    if (domain == MapDomain::half_plane) return *this;
    MobiusMap r = cayley_map().compose(*this).compose(cayley_inverse_map());
    r.domain = MapDomain::half_plane;
    return r;
}

nlohmann::json complex_to_json(cplx z) { return nlohmann::json::array({fmt(z.real()), fmt(z.imag())}); }

cplx complex_from_json(const nlohmann::json& j) {
    auto real = [](const nlohmann::json& x) -> double {
        if (x.is_number()) return x.get<double>();
        if (x.is_string()) {
            const std::string s = x.get<std::string>();
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(s, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != s.size() || s.empty()) throw ConfigError("not a decimal number: '" + s + "'");
            return v;
        }
        throw ConfigError("expected a number or decimal string");
    };
    if (j.is_array()) {
        if (j.size() != 2) throw ConfigError("complex value must be [re, im]");
        return {real(j[0]), real(j[1])};
    }
    return {real(j), 0.0};
}

nlohmann::json MobiusMap::to_json() const {
    return {{"type", "mobius"},
            {"domain", domain == MapDomain::disc ? "disc" : "half_plane"},
            {"a", complex_to_json(a)},
            {"b", complex_to_json(b)},
            {"c", complex_to_json(c)},
            {"d", complex_to_json(d)}};
}

MobiusMap MobiusMap::from_json(const nlohmann::json& j) {
    for (const char* k : {"a", "b", "c", "d"})
        if (!j.contains(k)) throw ConfigError(std::string("mobius map lacks coefficient '") + k + "'");
    MapDomain dom = MapDomain::disc;
    if (j.contains("domain")) {
        const std::string s = j.at("domain").get<std::string>();
        if (s == "half_plane" || s == "half-plane") dom = MapDomain::half_plane;
        else if (s != "disc") throw ConfigError("unknown domain '" + s + "'");
    }
    return make(complex_from_json(j.at("a")), complex_from_json(j.at("b")), complex_from_json(j.at("c")),
                complex_from_json(j.at("d")), dom);
}

std::string to_string(LfmKind k) {
    switch (k) {
        case LfmKind::parabolic: return "parabolic";
        case LfmKind::hyperbolic: return "hyperbolic";
        case LfmKind::elliptic_or_loxodromic: return "elliptic_or_loxodromic";
    }
    return "?";
}

LfmClassification classify(const MobiusMap& input) {
    MobiusMap m = input.to_disc().normalized();
    if (m.is_identity()) throw DegenerateError("identity map has no Denjoy-Wolff point");
    if (!m.is_self_map()) throw DomainError("map does not send the unit disc into itself");
    const double s = scale_of(m);

    LfmClassification r;
    std::vector<cplx> fps;
    bool double_root = false;
    if (std::abs(m.c) <= 1e-14 * s) {
        cplx k = m.a / m.d, t = m.b / m.d;
        if (std::abs(k - 1.0) <= 1e-14) throw DomainError("translation of the plane is not a disc self-map");
        fps.push_back(t / (1.0 - k));
        r.has_beta = true;
        r.beta_at_infinity = true;
    } else {
        cplx disc = (m.d - m.a) * (m.d - m.a) + 4.0 * m.b * m.c;
        cplx sq = std::sqrt(disc);
        cplx z1 = (m.a - m.d + sq) / (2.0 * m.c), z2 = (m.a - m.d - sq) / (2.0 * m.c);
        if (std::abs(z1 - z2) < 1e-7) {
            double_root = true;
            fps.push_back((m.a - m.d) / (2.0 * m.c));
        } else {
            fps.push_back(z1);
            fps.push_back(z2);
        }
    }

    auto inside = [](cplx z) { return std::abs(z) < 1.0 - 1e-9; };
    auto on_circle = [](cplx z) { return std::abs(std::abs(z) - 1.0) <= 1e-9; };
    auto boundary_isometry = [&] {
        double worst = 0;
        for (int i = 0; i < 256; ++i)
            worst = std::max(worst, std::abs(std::abs(m(std::polar(1.0, 2 * kPi * i / 256))) - 1.0));
        return worst <= 1e-10;
    };

    if (double_root) {
        r.kind = inside(fps[0]) ? LfmKind::elliptic_or_loxodromic : LfmKind::parabolic;
        r.alpha = on_circle(fps[0]) ? fps[0] / std::abs(fps[0]) : fps[0];
        r.lambda = m.derivative(r.alpha);
        r.is_automorphism = boundary_isometry();
        if (r.kind == LfmKind::parabolic && r.is_automorphism) {
            r.has_domain = true;
            r.domain_center = 0.0;
            r.domain_radius = 1.0;
        }
    } else {
        std::size_t ia = 0;
        if (fps.size() == 2) {
            if (inside(fps[1]) || (!inside(fps[0]) && std::abs(m.derivative(fps[1])) < std::abs(m.derivative(fps[0]))))
                ia = 1;
            r.has_beta = true;
            r.beta = fps[1 - ia];
        }
        cplx alpha = fps[ia];
        if (inside(alpha)) {
            r.kind = LfmKind::elliptic_or_loxodromic;
            r.alpha = alpha;
            r.lambda = m.derivative(alpha);
            r.is_automorphism = boundary_isometry();
        } else {
            r.kind = LfmKind::hyperbolic;
            r.alpha = alpha / std::abs(alpha);
            r.lambda = m.derivative(r.alpha);
            if (std::abs(r.lambda.imag()) <= 1e-12 * std::abs(r.lambda)) r.lambda = r.lambda.real();
            r.is_automorphism = !r.beta_at_infinity && on_circle(r.beta);
            if (r.is_automorphism) r.beta /= std::abs(r.beta);
            r.has_domain = true;
            if (r.beta_at_infinity) {
                r.domain_radius = std::numeric_limits<double>::infinity();
                r.domain_center = std::numeric_limits<double>::quiet_NaN();
            } else {
                // Circle through α and β tangent to 𝕋 at α.
                double num = std::norm(r.beta) - 1.0;
                double den = 2.0 * ((std::conj(r.alpha) * r.beta).real() - 1.0);
                double t = r.is_automorphism ? 0.0 : num / den;
                r.domain_center = t * r.alpha;
                r.domain_radius = std::abs(t - 1.0);
            }
        }
    }

    if (std::abs(r.lambda) <= 1.0 + 1e-12) {
        double d8 = std::abs(iterate(m, 8)(0.0) - r.alpha);
        double d64 = std::abs(iterate(m, 64)(0.0) - r.alpha);
        double d512 = std::abs(iterate(m, 512)(0.0) - r.alpha);
        r.attractive_verified = d64 <= d8 + 1e-14 && d512 <= d64 + 1e-14 && (d512 < d8 || d8 < 1e-14);
    }
    return r;
}

nlohmann::json classification_to_json(const LfmClassification& c) {
    nlohmann::json j{{"kind", to_string(c.kind)},
                     {"alpha", complex_to_json(c.alpha)},
                     {"lambda", complex_to_json(c.lambda)},
                     {"is_automorphism", c.is_automorphism},
                     {"attractive_verified", c.attractive_verified}};
    if (c.has_beta) j["beta"] = c.beta_at_infinity ? nlohmann::json("infinity") : complex_to_json(c.beta);
    else j["beta"] = nullptr;
    if (c.has_domain) {
        if (std::isinf(c.domain_radius))
            j["automorphism_domain"] = {{"half_plane_normal", complex_to_json(c.alpha)}};
        else
            j["automorphism_domain"] = {{"center", complex_to_json(c.domain_center)}, {"radius", fmt(c.domain_radius)}};
    } else {
        j["automorphism_domain"] = nullptr;
    }
    return j;
}

MobiusMap iterate(const MobiusMap& input, long n) {
    if (n == 0) return MobiusMap::identity(input.domain);
    MobiusMap m = (n < 0 ? input.inverse() : input).normalized();
    const long k = n < 0 ? -n : n;
    cplx tr = m.a + m.d;
    cplx sq = std::sqrt((tr - 2.0) * (tr + 2.0));
    cplx l1 = (tr + sq) / 2.0, l2 = (tr - sq) / 2.0;
    if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
    MobiusMap out;
    out.domain = input.domain;
    if (std::abs(l1 - l2) < 1e-8) {
        // Jordan branch: Mᵏ = μᵏ I + k μᵏ⁻¹ (M − μ I).
        cplx mu = tr / 2.0;
        cplx p = std::pow(mu, double(k)), q = double(k) * std::pow(mu, double(k - 1));
        out.a = p + q * (m.a - mu);
        out.b = q * m.b;
        out.c = q * m.c;
        out.d = p + q * (m.d - mu);
        return out;
    }
    // Interpolation at the eigenvalues: Mᵏ = l₂ᵏ I + [l₁,l₂]ₖ (M − l₂ I).
    cplx p = std::pow(l2, double(k)), q = divided_power(l1, l2, k);
    out.a = p + q * (m.a - l2);
    out.b = q * m.b;
    out.c = q * m.c;
    out.d = p + q * (m.d - l2);
    return out;
}

HalfPlaneMap HalfPlaneMap::dilation(cplx lambda, cplx b) {
    HalfPlaneMap h;
    h.variant = Variant::dilation;
    h.lambda = lambda;
    h.b = b;
    h.name = "dilation";
    return h;
}

HalfPlaneMap HalfPlaneMap::translation(double tau) {
    HalfPlaneMap h;
    h.variant = Variant::translation;
    h.tau = tau;
    h.name = "translation";
    return h;
}

HalfPlaneMap HalfPlaneMap::conjugated_translation(double tau) {
    HalfPlaneMap h;
    h.variant = Variant::conjugated_translation;
    h.tau = tau;
    h.name = "conjugated_translation";
    return h;
}

HalfPlaneMap HalfPlaneMap::general(const MobiusMap& m) {
    HalfPlaneMap h;
    h.variant = Variant::general;
    h.general_map = m.to_half_plane();
    h.name = "general";
    return h;
}

HalfPlaneMap HalfPlaneMap::numeric(std::string name, std::function<cplx(cplx)> fn, std::optional<cplx> d2,
                                   std::optional<cplx> d3, std::optional<double> multiplier) {
    HalfPlaneMap h;
    h.variant = Variant::numeric;
    h.name = std::move(name);
    h.fn = std::move(fn);
    h.d2 = d2;
    h.d3 = d3;
    h.multiplier = multiplier;
    return h;
}

HalfPlaneMap HalfPlaneMap::valiron() {
    auto h = numeric("valiron", [](cplx w) { return 2.0 * w * (1.0 + 1.0 / std::log(w + 3.0)); });
    h.params = nlohmann::json::object();
    return h;
}

HalfPlaneMap HalfPlaneMap::regular_parabolic(cplx a, double c) {
    if (!(c > 0.0 && c < 1.0)) throw ArgumentError("regular_parabolic needs c in (0, 1)");
    if (!(a.real() > 0.0)) throw ArgumentError("regular_parabolic needs Re a > 0");
    // Disc model: φ(z) = 1 + u + (a/2)u² + ((a² − c)/4)u³ + O(u⁴), u = z − 1.
    auto h = numeric(
        "regular_parabolic", [a, c](cplx w) { return w + a + c / (w + 1.0); }, a, 1.5 * (a * a - c));
    h.params = {{"a", complex_to_json(a)}, {"c", fmt(c)}};
    return h;
}

cplx HalfPlaneMap::operator()(cplx w) const {
    switch (variant) {
        case Variant::dilation: return lambda * (w - b) + b;
        case Variant::translation: return w + cplx(0.0, tau);
        case Variant::conjugated_translation: return w / (1.0 + kI * tau * w);
        case Variant::general: return general_map(w);
        case Variant::numeric: return fn(w);
    }
    return w;
}

MobiusMap HalfPlaneMap::mobius() const {
    const auto hp = MapDomain::half_plane;
    switch (variant) {
        case Variant::dilation: return MobiusMap::make(lambda, b * (1.0 - lambda), 0.0, 1.0, hp);
        case Variant::translation: return MobiusMap{1.0, cplx(0.0, tau), 0.0, 1.0, hp};
        case Variant::conjugated_translation: return MobiusMap{1.0, 0.0, cplx(0.0, tau), 1.0, hp};
        case Variant::general: return general_map;
        case Variant::numeric: break;
    }
    throw ArgumentError("numeric map '" + name + "' has no Möbius form");
}

bool HalfPlaneMap::is_self_map(int samples, double tol) const {
    if (is_linear_fractional()) return mobius().is_self_map(samples, tol);
    for (double x : {1e-3, 1.0, 100.0})
        for (int i = 1; i < samples; ++i) {
            cplx v = fn(cplx(x, std::tan(kPi * (double(i) / samples - 0.5))));
            if (!std::isfinite(v.real()) || v.real() < -tol * (1.0 + std::abs(v))) return false;
        }
    return true;
}

nlohmann::json HalfPlaneMap::to_json() const {
    switch (variant) {
        case Variant::dilation:
            return {{"type", "dilation"}, {"lambda", complex_to_json(lambda)}, {"b", complex_to_json(b)}};
        case Variant::translation: return {{"type", "translation"}, {"tau", fmt(tau)}};
        case Variant::conjugated_translation: return {{"type", "conjugated_translation"}, {"tau", fmt(tau)}};
        case Variant::general: return {{"type", "general"}, {"map", general_map.to_json()}};
        case Variant::numeric: {
            nlohmann::json j{{"type", "numeric"}, {"name", name}};
            if (params.is_object())
                for (auto it = params.begin(); it != params.end(); ++it) j[it.key()] = it.value();
            return j;
        }
    }
    return nullptr;
}

HalfPlaneMap HalfPlaneMap::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type")) throw ConfigError("map must be an object with a 'type'");
    const std::string t = j.at("type").get<std::string>();
    auto need = [&](const char* k) -> const nlohmann::json& {
        if (!j.contains(k)) throw ConfigError("map of type '" + t + "' lacks '" + k + "'");
        return j.at(k);
    };
    if (t == "dilation") return dilation(complex_from_json(need("lambda")), j.contains("b") ? complex_from_json(j.at("b")) : 0.0);
    if (t == "translation") return translation(complex_from_json(need("tau")).real());
    if (t == "conjugated_translation") return conjugated_translation(complex_from_json(need("tau")).real());
    if (t == "general") return general(MobiusMap::from_json(need("map")));
    if (t == "mobius") return general(MobiusMap::from_json(j));
    if (t == "numeric") {
        const std::string n = need("name").get<std::string>();
        if (n == "valiron") return valiron();
        if (n == "regular_parabolic")
            return regular_parabolic(complex_from_json(need("a")), complex_from_json(need("c")).real());
        throw ConfigError("unknown numeric map '" + n + "'");
    }
    throw ConfigError("unknown map type '" + t + "'");
}

}  // namespace hclab
