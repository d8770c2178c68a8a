#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>

#include <json.hpp>

namespace hclab {

using cplx = std::complex<double>;

// 𝒞(z) = (1+z)/(1−z), disc → right half-plane.
cplx cayley(cplx z);
cplx cayley_inverse(cplx w);

enum class MapDomain { disc, half_plane };

// z ↦ (az + b)/(cz + d).
struct MobiusMap {
    cplx a{1}, b{0}, c{0}, d{1};
    MapDomain domain = MapDomain::disc;

    static MobiusMap make(cplx a, cplx b, cplx c, cplx d, MapDomain domain = MapDomain::disc);
    static MobiusMap identity(MapDomain domain = MapDomain::disc);
    // The Cayley transform as a map disc → half-plane, and its inverse.
    static MobiusMap cayley_map();
    static MobiusMap cayley_inverse_map();

    cplx determinant() const { return a * d - b * c; }
    // Throws PoleError at the pole.
    cplx operator()(cplx z) const;
    // k-th derivative, k ∈ {1, 2, 3}.
    cplx derivative(cplx z, int k = 1) const;
    // this ∘ inner; the domain tag of the result is the one of `this`.
    MobiusMap compose(const MobiusMap& inner) const;
    MobiusMap inverse() const;
    // Scaled so that ad − bc = 1.
    MobiusMap normalized() const;
    std::optional<cplx> pole() const;
    std::optional<cplx> value_at_infinity() const;
    bool is_identity(double tol = 1e-14) const;
    bool is_self_map(int samples = 96, double tol = 1e-12) const;
    // Conjugate to the other model: 𝒞⁻¹∘M∘𝒞 or 𝒞∘M∘𝒞⁻¹.
    MobiusMap to_disc() const;
    MobiusMap to_half_plane() const;

    nlohmann::json to_json() const;
    static MobiusMap from_json(const nlohmann::json& j);
};

enum class LfmKind { parabolic, hyperbolic, elliptic_or_loxodromic };
std::string to_string(LfmKind k);

struct LfmClassification {
    LfmKind kind = LfmKind::parabolic;
    cplx alpha;
    bool has_beta = false;
    bool beta_at_infinity = false;
    cplx beta;
    cplx lambda;  // φ′(α)
    bool is_automorphism = false;
    // Δ = ⋃ φ⁻ⁿ(𝔻) when defined; the unit disc for parabolic automorphisms.
    bool has_domain = false;
    cplx domain_center;
    double domain_radius = 0.0;
    bool attractive_verified = false;
};

LfmClassification classify(const MobiusMap& m);
nlohmann::json classification_to_json(const LfmClassification& c);

// n-th iterate as a matrix power; negative n iterates the inverse.
MobiusMap iterate(const MobiusMap& m, long n);

// Self-map of the right half-plane ℂ₀.
struct HalfPlaneMap {
    enum class Variant { dilation, translation, conjugated_translation, general, numeric };

    Variant variant = Variant::translation;
    cplx lambda{1};
    cplx b{0};
    double tau = 0.0;
    MobiusMap general_map;
    std::string name;
    std::function<cplx(cplx)> fn;
    // Disc-model derivatives at the Denjoy–Wolff point 1, supplied analytically for numeric maps.
    std::optional<cplx> d2, d3;
    // Half-plane multiplier of a numeric hyperbolic map.
    std::optional<double> multiplier;
    // Constructor arguments of named numeric maps, for serialization.
    nlohmann::json params;

    // ψ(w) = λ(w − b) + b
    static HalfPlaneMap dilation(cplx lambda, cplx b = 0.0);
    // ψ(w) = w + iτ
    static HalfPlaneMap translation(double tau);
    // ψ(w) = w/(1 + iτw)
    static HalfPlaneMap conjugated_translation(double tau);
    static HalfPlaneMap general(const MobiusMap& m);
    static HalfPlaneMap numeric(std::string name, std::function<cplx(cplx)> fn,
                                std::optional<cplx> d2 = std::nullopt,
                                std::optional<cplx> d3 = std::nullopt,
                                std::optional<double> multiplier = std::nullopt);
    // ψ(w) = 2w(1 + 1/log(w + 3))
    static HalfPlaneMap valiron();
    // ψ(w) = w + a + c/(w + 1), c ∈ (0, 1); parabolic, regular at the boundary fixed point.
    static HalfPlaneMap regular_parabolic(cplx a, double c);

    cplx operator()(cplx w) const;
    bool is_linear_fractional() const { return variant != Variant::numeric; }
    // Half-plane Möbius form; throws ArgumentError for numeric maps.
    MobiusMap mobius() const;
    MobiusMap disc_map() const { return mobius().to_disc(); }
    bool is_self_map(int samples = 96, double tol = 1e-12) const;

    nlohmann::json to_json() const;
    static HalfPlaneMap from_json(const nlohmann::json& j);
};

// Complex values in JSON: a number, a decimal string, or [re, im].
cplx complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(cplx z);

}  // namespace hclab
