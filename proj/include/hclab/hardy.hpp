#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hclab/mobius.hpp"

namespace hclab {

enum class Substitution { circle, line };

// Midpoint nodes: θ_j = 2π(j+½)/M on 𝕋, or t_j = tan(πs_j/2) with s_j = −1 + (2j+1)/M on iℝ.
// Both rules carry weight 1/M per node.
struct QuadratureGrid {
    int nodes = 4096;
    Substitution substitution = Substitution::circle;

    double weight() const { return 1.0 / nodes; }
    double angle(int j) const;  // circle
    double line_t(int j) const;  // line
    cplx circle_point(int j) const { return std::polar(1.0, angle(j)); }
};

struct BlaschkePart {
    enum class Kind {
        // ∏_{l≤L} ((z − γ_l)/(z − (1 + a/l²)γ_l))^d
        automorphism,
        // ∏_{l≤L} (|w_l|/w_l · (w_l − T(z))/(1 − w̄_l T(z)))^d with w_l = T(γ_l), T(z) = (ūz + ρ)/(1 + ρ)
        domain,
    };
    Kind kind = Kind::automorphism;
    std::vector<cplx> zeros;  // γ_1 … γ_L
    double a = 0.5;
    int d = 1;
    // Δ = D(domain_center, domain_radius); the rotation u is the attractive point of the symbol.
    cplx domain_center{0};
    double domain_radius = 1.0;
    cplx rotation{1};
    double rho = 0.0;
    // Bound on |B_∞ − B_L| relative to |B_L| on {z : |z − γ_l| ≥ delta for l > L}.
    double delta = 0.0;
    double tail_bound = 0.0;
    // |γ_{L+1} − β|: how far the omitted zeros sit from the marked singularity.
    double cluster_radius = 0.0;

    cplx operator()(cplx z) const;
};

struct DiscFunction {
    std::vector<cplx> coefficients;  // c_0 + c_1 z + …
    std::optional<BlaschkePart> blaschke;
    std::optional<cplx> beta;  // marked singularity

    static DiscFunction polynomial(std::vector<cplx> c);
    static DiscFunction constant(cplx c) { return polynomial({c}); }

    cplx polynomial_value(cplx z) const;
    // Throws PoleError at the marked singularity.
    cplx operator()(cplx z) const;
    bool is_polynomial() const { return !blaschke.has_value(); }
    int degree() const;

    nlohmann::json to_json() const;
    static DiscFunction from_json(const nlohmann::json& j);
};

// F = f ∘ 𝒞⁻¹ on the closed right half-plane.
struct HalfPlaneFunction {
    DiscFunction f;
    // |F(it)| ≤ decay_constant/(1+t²), recorded when the polynomial part has a double zero at 1.
    std::optional<double> decay_constant;

    explicit HalfPlaneFunction(DiscFunction g);
    cplx operator()(cplx w) const;
};

enum class NormRoute { coefficient, circle, half_plane };
std::string to_string(NormRoute r);

struct NormResult {
    double value = 0.0;
    NormRoute route = NormRoute::circle;
    int nodes = 0;
    // Probability mass of nodes replaced near the marked singularity.
    double replaced_mass = 0.0;
};

// coefficient route needs a pure polynomial; quadrature routes refine M → 2M → 4M and throw
// IntegrabilityError when the values keep growing.
NormResult h2_norm(const DiscFunction& f, NormRoute route, const QuadratureGrid& grid = {});
double h2_norm(const DiscFunction& f);
// Quadrature route for an arbitrary boundary function (circle or line grid).
NormResult boundary_norm(const std::function<cplx(cplx)>& h, const QuadratureGrid& grid,
                         const std::optional<cplx>& beta = std::nullopt);
NormResult h2_norm(const HalfPlaneFunction& F, const QuadratureGrid& grid = {});

struct CompositionOptions {
    int degree = 64;
    int nodes = 4096;
    double radius = 1.0 - 1e-8;
    double tail_threshold = 1e-10;
};

struct Composition {
    DiscFunction function;  // recovered coefficients up to the configured degree
    double tail_energy = 0.0;
    bool truncation_warning = false;
    double norm = 0.0;  // boundary quadrature of |f ∘ φ|
};

Composition compose(const DiscFunction& f, const std::function<cplx(cplx)>& phi,
                    const CompositionOptions& opts = {});
Composition compose(const DiscFunction& f, const MobiusMap& phi, const CompositionOptions& opts = {});
// Disc model 𝒞⁻¹ ∘ ψ ∘ 𝒞 of a half-plane self-map.
Composition compose(const DiscFunction& f, const HalfPlaneMap& psi, const CompositionOptions& opts = {});

struct ZeroConstraint {
    std::vector<cplx> points;
    int d = 1;
};

struct PolyApproximation {
    DiscFunction p;
    double error = 0.0;  // ‖P − target‖₂
    int degree = 0;
};

// P = Π(z − α_i)^d · Q with Q the least-squares optimum at the smallest tried degree meeting tol.
PolyApproximation poly_with_zeros(const DiscFunction& target, const ZeroConstraint& zeros, int max_degree,
                                  double tol);

struct BlaschkeOptions {
    double a = 0.5;
    int d = 1;
    int factors = 1000;  // L
    double delta = 1e-2;
    double tail_tol = 0.1;
};

// γ_l = φ⁻ˡ(γ); automorphism or domain form according to φ.
BlaschkePart blaschke_modified(const MobiusMap& phi, cplx gamma, const BlaschkeOptions& opts = {});
// max over a boundary grid of |B|, skipping nodes within `exclusion` of β.
double blaschke_boundary_max(const BlaschkePart& b, cplx beta, int samples, double exclusion);
// B·P as a DiscFunction with the symbol's repulsive point marked.
DiscFunction with_blaschke(const DiscFunction& p, const BlaschkePart& b, cplx beta);

// ∫ |F(γ(it − b₂) + κ(b₂ − b₁) + b₁)|² dm_inv(t); requires P(1) = P(β₁) = 0.
double dilation_integral(const HalfPlaneFunction& F, double gamma, double kappa, cplx b1, cplx b2,
                         const QuadratureGrid& grid = {QuadratureGrid{4096, Substitution::line}});

struct TranslationSum {
    double sup_bound = 0.0;  // grid sup of Σ_{n∈A} |F(it + inτ + ia)|
    double norm = 0.0;       // m_inv norm of Σ_{n∈A} F(· + inτ + ia)
};

TranslationSum translation_sum(const HalfPlaneFunction& F, double tau, const std::vector<long>& A,
                               double a_offset,
                               const QuadratureGrid& grid = {QuadratureGrid{4096, Substitution::line}});

// |g(z)| ≤ A|z − β₂| on the closed automorphism domain of φ₂.
struct LinearVanishingCertificate {
    cplx beta;
    double constant = 0.0;
};

// Certificate for a function whose polynomial part vanishes at β; A = sup over the closed
// disc D(center, radius) of |P(z)/(z − β)|, bounded by the coefficient sum.
LinearVanishingCertificate certify_linear_vanishing(const DiscFunction& g, cplx beta, cplx center,
                                                    double radius);

// ‖g ∘ φ₂⁻ˡ ∘ φ₁ᵏ‖₂ by adaptive circle quadrature on the closed-form iterates.
double mixed_composition_norm(const DiscFunction& g, const std::optional<LinearVanishingCertificate>& cert,
                              const MobiusMap& phi2, const MobiusMap& phi1, long l, long k,
                              const QuadratureGrid& grid = {});

// Adaptive Gauss–Kronrod quadrature over the grid's partition, refined around the focus points
// (angles on 𝕋, or t-values on iℝ). Returns ∫ h dm or ∫ h dm_inv.
double adaptive_integral(const std::function<double(double)>& h, const QuadratureGrid& grid,
                         const std::vector<double>& focus = {}, double rel_tol = 1e-10);

// One-parameter sweeps behind `hardy sweep <lemma>`.
struct SweepRow {
    double x = 0.0;
    double y = 0.0;
    double scaled = 0.0;  // sweep-specific normalization, e.g. I(γ)·γ^{1/2}
};

struct SweepReport {
    std::string lemma;
    std::string x_name, y_name, scaled_name;
    std::vector<SweepRow> rows;
    bool passed = false;
    nlohmann::json extra = nlohmann::json::object();
    std::vector<std::string> notes;
};

const std::vector<std::string>& hardy_sweep_ids();
// Parameters come from an optional JSON object; unknown keys throw ConfigError.
std::vector<SweepReport> hardy_sweep(const std::string& lemma, const nlohmann::json& params = nlohmann::json::object());
nlohmann::json sweep_to_json(const SweepReport& r);
std::string sweep_csv(const SweepReport& r);

}  // namespace hclab
