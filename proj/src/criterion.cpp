#include "hclab/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "criterion_internal.hpp"
#include "hclab/errors.hpp"

namespace hclab {

namespace {

mpz_class floor_q(const mpq_class& q) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

mpz_class ceil_q(const mpq_class& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

std::int64_t to_i64(const mpz_class& z) {
    if (!z.fits_slong_p()) throw RangeError("block boundary exceeds 64-bit range");
    return z.get_si();
}

void require_keys(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key " + where + "/" + it.key());
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("wrong type at " + where + "/" + key);
    }
}

cplx cx(const nlohmann::json& j, const std::string& where) {
    try {
        return complex_from_json(j);
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

// Calkin–Wilf enumeration 1, 1/2, 2, 1/3, …; entry p ≥ 1.
mpq_class calkin_wilf(int p) {
    mpq_class q = 1;
    for (int i = 1; i < p; ++i) q = 1 / (mpq_class(2 * floor_q(q)) - q + 1);
    return q;
}

double coefficient_norm(const RootPolynomial& P) {
    double s = 0;
    for (cplx c : P.expanded().coefficients) s += std::norm(c);
    return std::sqrt(s);
}

RootPolynomial normalized(std::vector<cplx> roots, double target_norm) {
    RootPolynomial P{1.0, std::move(roots)};
    P.scale = target_norm / coefficient_norm(P);
    return P;
}

std::vector<cplx> disc_fixed_points(const MobiusMap& m, cplx& alpha, cplx& beta) {
    const LfmClassification c = classify(m.domain == MapDomain::disc ? m : m.to_disc());
    if (c.kind != LfmKind::hyperbolic || !c.is_automorphism || !c.has_beta || c.beta_at_infinity)
        throw PreconditionError("composition pair symbols must be hyperbolic automorphisms");
    alpha = c.alpha;
    beta = c.beta;
    return {c.alpha, c.beta};
}

void check_block_union(const ReturnSpec& spec, std::optional<double> ratio) {
    if (!(spec.omega > 1)) throw ArgumentError("block_union requires ω > 1");
    if (!(spec.s > 1)) throw ArgumentError("block_union requires s > 1");
    if (ratio) {
        const mpq_class omega(spec.omega), s(spec.s), r(*ratio);
        if (!(r * s < omega)) throw ArgumentError("block_union violates r·s < ω");
        if (!(r - s > 0)) throw ArgumentError("block_union violates r − s > 0");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// ReturnSpec / ReturnSequence

std::string to_string(ReturnKind k) {
    switch (k) {
        case ReturnKind::all_integers: return "all_integers";
        case ReturnKind::block_union: return "block_union";
        case ReturnKind::explicit_list: return "explicit_list";
    }
    return "?";
}

ReturnKind return_kind_from_string(const std::string& s) {
    if (s == "all_integers") return ReturnKind::all_integers;
    if (s == "block_union") return ReturnKind::block_union;
    if (s == "explicit_list") return ReturnKind::explicit_list;
    throw ConfigError("unknown return sequence kind '" + s + "'");
}

nlohmann::json ReturnSpec::to_json() const {
    nlohmann::json j{{"kind", to_string(kind)}};
    if (kind == ReturnKind::block_union) {
        j["omega"] = omega;
        j["s"] = s;
    }
    if (kind == ReturnKind::explicit_list) j["elements"] = elements;
    return j;
}

ReturnSpec ReturnSpec::from_json(const nlohmann::json& j) {
    require_keys(j, {"kind", "omega", "s", "elements"}, "/sequence");
    ReturnSpec r;
    r.kind = return_kind_from_string(get_or<std::string>(j, "kind", "all_integers", "/sequence"));
    r.omega = get_or(j, "omega", r.omega, "/sequence");
    r.s = get_or(j, "s", r.s, "/sequence");
    r.elements = get_or(j, "elements", std::vector<std::int64_t>{}, "/sequence");
    return r;
}

std::optional<std::int64_t> ReturnSequence::prev_at_most(std::int64_t x) const {
    switch (spec.kind) {
        case ReturnKind::all_integers:
            if (x < 1) return std::nullopt;
            return x;
        case ReturnKind::explicit_list: {
            auto it = std::upper_bound(spec.elements.begin(), spec.elements.end(), x);
            if (it == spec.elements.begin()) return std::nullopt;
            return *std::prev(it);
        }
        case ReturnKind::block_union: {
            std::optional<std::int64_t> best;
            for (auto [lo, hi] : blocks) {
                if (lo > hi) continue;
                if (lo > x) break;
                best = std::min(hi, x);
            }
            if (!blocks.empty() && x > blocks.back().second * 2)
                throw RangeError("prev_at_most beyond the stored blocks");
            return best;
        }
    }
    return std::nullopt;
}

std::optional<std::int64_t> ReturnSequence::next_at_least(std::int64_t x) const {
    switch (spec.kind) {
        case ReturnKind::all_integers: return std::max<std::int64_t>(x, 1);
        case ReturnKind::explicit_list: {
            auto it = std::lower_bound(spec.elements.begin(), spec.elements.end(), x);
            if (it == spec.elements.end()) return std::nullopt;
            return *it;
        }
        case ReturnKind::block_union:
            for (auto [lo, hi] : blocks)
                if (lo <= hi && hi >= x) return std::max(lo, x);
            throw RangeError("next_at_least beyond the stored blocks");
    }
    return std::nullopt;
}

int ReturnSequence::block_of(std::int64_t m) const {
    if (spec.kind != ReturnKind::block_union) return -1;
    for (std::size_t p = 0; p < blocks.size(); ++p)
        if (blocks[p].first <= m && m <= blocks[p].second) return static_cast<int>(p);
    return -1;
}

ReturnSequence make_return_sequence(const ReturnSpec& spec, std::optional<double> ratio, std::int64_t horizon) {
    if (horizon < 1) throw ArgumentError("horizon must be positive");
    ReturnSequence seq;
    seq.spec = spec;
    seq.ratio = ratio;
    seq.horizon = horizon;
    switch (spec.kind) {
        case ReturnKind::all_integers:
            seq.n.resize(static_cast<std::size_t>(horizon));
            for (std::int64_t k = 0; k < horizon; ++k) seq.n[k] = k + 1;
            break;
        case ReturnKind::explicit_list: {
            for (std::size_t i = 0; i < spec.elements.size(); ++i) {
                if (spec.elements[i] < 1) throw ArgumentError("explicit sequence elements must be ≥ 1");
                if (i > 0 && spec.elements[i] <= spec.elements[i - 1])
                    throw ArgumentError("explicit sequence must be strictly increasing");
            }
            for (std::int64_t e : spec.elements)
                if (e <= horizon) seq.n.push_back(e);
            break;
        }
        case ReturnKind::block_union: {
            check_block_union(spec, ratio);
            const mpq_class omega(spec.omega), s(spec.s);
            // Blocks are kept past the horizon so that neighbours of r·n_k are available.
            const mpq_class cap = mpq_class(4) * mpq_class(static_cast<double>(horizon)) *
                                  (ratio ? mpq_class(std::max(1.0, *ratio)) : mpq_class(1)) * omega;
            mpq_class w = 1;
            std::set<std::int64_t> all;
            while (w <= cap) {
                const std::int64_t lo = to_i64(floor_q(w) + 1), hi = to_i64(ceil_q(s * w) - 1);
                seq.blocks.emplace_back(lo, hi);
                for (std::int64_t m = lo; m <= std::min(hi, horizon); ++m) all.insert(m);
                w *= omega;
            }
            seq.n.assign(all.begin(), all.end());
            break;
        }
    }
    if (seq.n.empty()) throw ArgumentError("sequence has no element up to the horizon");
    for (std::size_t k = 1; k < seq.n.size(); ++k) {
        const double c = double(seq.n[k]) / double(k);
        if (c > seq.growth_constant) {
            seq.growth_constant = c;
            seq.growth_argmax = static_cast<std::int64_t>(k);
        }
    }
    seq.density = density_report(IntegerSet(seq.n, horizon), default_checkpoints(horizon));
    return seq;
}

GapStatistics gap_statistics(const ReturnSequence& seq, std::size_t k_count) {
    if (seq.spec.kind != ReturnKind::block_union) throw PreconditionError("gap statistics need a block_union sequence");
    if (!seq.ratio) throw PreconditionError("gap statistics need the ratio r");
    if (seq.n.size() < k_count) throw TruncationError("sequence holds fewer than the requested elements");
    const double r = *seq.ratio, w = seq.spec.omega, s = seq.spec.s;
    GapStatistics g;
    g.floors_hold = true;
    for (std::size_t k = 0; k < k_count; ++k) {
        const long double rn = static_cast<long double>(r) * seq.n[k];
        const auto below = seq.prev_at_most(static_cast<std::int64_t>(std::floor(rn)));
        const auto above = seq.next_at_least(static_cast<std::int64_t>(std::ceil(rn)));
        const int p = seq.block_of(seq.n[k]);
        const double wp = std::pow(w, p);
        g.p0.push_back(below ? double(rn - *below) : std::numeric_limits<double>::infinity());
        g.p1.push_back(double(*above - rn));
        g.floor0.push_back((r - s) * wp);
        g.floor1.push_back((w - r * s) * wp);
        g.block.push_back(p);
        if (!(g.p0.back() >= g.floor0.back() * (1 - 1e-12)) || !(g.p1.back() >= g.floor1.back() * (1 - 1e-12)))
            g.floors_hold = false;
    }
    auto nondecreasing = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] < v[i - 1]) return false;
        return true;
    };
    g.p0_nondecreasing = nondecreasing(g.p0);
    g.p1_nondecreasing = nondecreasing(g.p1);
    g.p1_envelope.assign(k_count, 0.0);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = k_count; k-- > 0;) g.p1_envelope[k] = m = std::min(m, g.p1[k]);
    g.p1_envelope_nondecreasing = nondecreasing(g.p1_envelope);
    for (std::size_t k = 0; k < k_count; ++k) {
        const std::size_t b = static_cast<std::size_t>(g.block[k]);
        if (g.p1_block_min.size() <= b) g.p1_block_min.resize(b + 1, std::numeric_limits<double>::infinity());
        g.p1_block_min[b] = std::min(g.p1_block_min[b], g.p1[k]);
    }
    g.p1_block_min_increasing = true;
    double prev = -1;
    for (double v : g.p1_block_min) {
        if (std::isinf(v)) continue;  // empty block
        if (!(v > prev)) g.p1_block_min_increasing = false;
        prev = v;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Dense elements

cplx RootPolynomial::operator()(cplx z) const {
    cplx v = scale;
    for (cplx r : roots) v *= (z - r);
    return v;
}

DiscFunction RootPolynomial::expanded() const {
    std::vector<cplx> c{scale};
    for (cplx r : roots) {
        std::vector<cplx> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    return DiscFunction::polynomial(std::move(c));
}

nlohmann::json RootPolynomial::to_json() const {
    nlohmann::json rs = nlohmann::json::array();
    for (cplx r : roots) rs.push_back(complex_to_json(r));
    return {{"scale", complex_to_json(scale)}, {"roots", rs}};
}

RootPolynomial RootPolynomial::from_json(const nlohmann::json& j) {
    require_keys(j, {"scale", "roots"}, "/polynomial");
    RootPolynomial P;
    if (j.contains("scale")) P.scale = cx(j.at("scale"), "/polynomial/scale");
    if (j.contains("roots"))
        for (const auto& r : j.at("roots")) P.roots.push_back(cx(r, "/polynomial/roots"));
    return P;
}

DenseElement DenseElement::zero() {
    DenseElement y;
    y.components = {RootPolynomial{0.0, {}}, RootPolynomial{0.0, {}}};
    y.target = 0;
    return y;
}

nlohmann::json DenseElement::to_json() const {
    nlohmann::json j{{"F", components[0].to_json()}, {"G", components[1].to_json()}, {"target", target}};
    if (disc[0]) j["f"] = disc[0]->to_json();
    if (disc[1]) j["g"] = disc[1]->to_json();
    return j;
}

DenseElement DenseElement::from_json(const nlohmann::json& j) {
    require_keys(j, {"F", "G", "f", "g", "target"}, "/targets");
    DenseElement y;
    y.target = get_or(j, "target", 1, "/targets");
    if (j.contains("F")) y.components[0] = RootPolynomial::from_json(j.at("F"));
    if (j.contains("G")) y.components[1] = RootPolynomial::from_json(j.at("G"));
    if (j.contains("f")) y.disc[0] = DiscFunction::from_json(j.at("f"));
    if (j.contains("g")) y.disc[1] = DiscFunction::from_json(j.at("g"));
    return y;
}

std::string family_kind(const SMapFamily& f) {
    switch (f.index()) {
        case 0: return "hyperbolic_pair";
        case 1: return "parabolic_pair";
        case 2: return "composition_pair";
        default: return "shift_pair";
    }
}

std::optional<double> family_ratio(const SMapFamily& f) {
    if (auto h = std::get_if<HyperbolicPair>(&f)) {
        const double a = std::log(h->lambda), b = std::log(h->mu);
        double r = std::max(a, b) / std::min(a, b);
        if (std::fabs(r - std::round(r)) < 1e-12) r = std::round(r);
        return r;
    }
    if (auto p = std::get_if<ParabolicPair>(&f)) {
        if (p->tau1 * p->tau2 <= 0) return std::nullopt;
        const double a = std::fabs(p->tau1), b = std::fabs(p->tau2);
        double r = std::max(a, b) / std::min(a, b);
        if (std::fabs(r - std::round(r)) < 1e-12) r = std::round(r);
        return r;
    }
    return std::nullopt;
}

namespace {

std::array<std::vector<cplx>, 2> mandatory_roots(const SMapFamily& f) {
    if (auto h = std::get_if<HyperbolicPair>(&f)) {
        const cplx b1 = cayley_inverse(h->b1), b2 = cayley_inverse(h->b2);
        std::vector<cplx> r{1.0, b1};
        if (std::abs(b2 - b1) > 1e-15) r.push_back(b2);
        return {r, r};
    }
    if (std::get_if<ParabolicPair>(&f)) return {std::vector<cplx>{1.0, 1.0}, std::vector<cplx>{1.0, 1.0}};
    if (auto c = std::get_if<CompositionPair>(&f)) {
        cplx a1, b1, a2, b2;
        disc_fixed_points(c->phi1, a1, b1);
        disc_fixed_points(c->phi2, a2, b2);
        std::vector<cplx> rf{b1}, rg{b2};
        if (std::abs(a2 - b1) > 1e-12) rf.push_back(a2);
        if (std::abs(a1 - b2) > 1e-12) rg.push_back(a1);
        return {rf, rg};
    }
    return {};
}

}  // namespace

std::vector<DenseElement> dense_targets(const SMapFamily& f, int count) {
    if (count < 1 || count > 4) throw ArgumentError("dense target count must lie in 1..4");
    std::vector<DenseElement> out;
    if (auto s = std::get_if<ShiftPair>(&f)) {
        if (!s->construction) throw PreconditionError("shift pair lacks its construction");
        if (count > s->construction->count) throw RangeError("construction covers fewer targets");
        for (int p = 1; p <= count; ++p) {
            DenseElement y;
            y.target = p;
            out.push_back(y);
        }
        return out;
    }
    const auto base = mandatory_roots(f);
    for (int p = 1; p <= count; ++p) {
        const double c = calkin_wilf(p).get_d();
        DenseElement y;
        y.target = p;
        for (int j = 0; j < 2; ++j) {
            std::vector<cplx> roots = base[j];
            if (p > 1) roots.push_back(cplx(j == 0 ? 1.0 : -1.0) / double(p));
            y.components[j] = normalized(std::move(roots), c);
        }
        out.push_back(std::move(y));
    }
    return out;
}

void validate_dense(const SMapFamily& f, const DenseElement& y) {
    if (auto s = std::get_if<ShiftPair>(&f)) {
        if (!s->construction) throw PreconditionError("shift pair lacks its construction");
        if (y.target < 0 || y.target > s->construction->count)
            throw PreconditionError("shift target index outside 0.." + std::to_string(s->construction->count));
        return;
    }
    const auto base = mandatory_roots(f);
    const char* names[2] = {"F", "G"};
    for (int j = 0; j < 2; ++j) {
        if (y.disc[j]) {
            if (!std::holds_alternative<CompositionPair>(f))
                throw PreconditionError("disc components are only used by the composition pair");
            for (cplx q : base[j])
                if (std::abs(y.disc[j]->polynomial_value(q)) > 1e-10)
                    throw PreconditionError(std::string(names[j]) + " does not vanish at a required zero");
            continue;
        }
        std::vector<cplx> remaining = y.components[j].roots;
        if (y.components[j].is_zero()) continue;
        for (cplx q : base[j]) {
            auto it = std::find_if(remaining.begin(), remaining.end(), [&](cplx r) {
                return std::abs(r - q) <= 1e-12 * std::max(1.0, std::abs(q));
            });
            if (it == remaining.end()) {
                std::ostringstream os;
                os << names[j] << " lacks the required zero at " << q;
                throw PreconditionError(os.str());
            }
            remaining.erase(it);
        }
    }
}

std::function<cplx(cplx)> smap(const SMapFamily& f, const DenseElement& y, std::int64_t n) {
    validate_dense(f, y);
    if (auto h = std::get_if<HyperbolicPair>(&f)) {
        const cplx l1 = std::pow(h->lambda, -double(n)), l2 = std::pow(h->mu, -double(n));
        const HyperbolicPair pr = *h;
        return [pr, y, l1, l2](cplx w) {
            return y.components[0](cayley_inverse(l1 * (w - pr.b1) + pr.b1)) +
                   y.components[1](cayley_inverse(l2 * (w - pr.b2) + pr.b2));
        };
    }
    if (auto p = std::get_if<ParabolicPair>(&f)) {
        const cplx s1(0.0, -double(n) * p->tau1), s2(0.0, -double(n) * p->tau2);
        return [y, s1, s2](cplx w) {
            return y.components[0](cayley_inverse(w + s1)) + y.components[1](cayley_inverse(w + s2));
        };
    }
    if (auto c = std::get_if<CompositionPair>(&f)) {
        const MobiusMap m1 = iterate(c->phi1.domain == MapDomain::disc ? c->phi1 : c->phi1.to_disc(), -n);
        const MobiusMap m2 = iterate(c->phi2.domain == MapDomain::disc ? c->phi2 : c->phi2.to_disc(), -n);
        return [y, m1, m2](cplx z) {
            auto comp = [&](int j, cplx u) { return y.disc[j] ? (*y.disc[j])(u) : y.components[j](u); };
            return comp(0, m1(z)) + comp(1, m2(z));
        };
    }
    throw ArgumentError("shift pair S-maps are sequences; use shift_smap");
}

std::vector<std::pair<std::int64_t, mpq_class>> shift_smap(const ShiftPair& f, int p, std::int64_t n) {
    if (!f.construction) throw PreconditionError("shift pair lacks its construction");
    const DfhcConstruction& c = *f.construction;
    if (p < 1 || p > c.count) throw RangeError("target index outside the construction");
    if (!c.a_sets[p - 1].contains(n)) throw PreconditionError("n = " + std::to_string(n) + " is not in A_p");
    std::vector<std::pair<std::int64_t, mpq_class>> out;
    auto it = std::lower_bound(c.z.begin(), c.z.end(), n, [](const auto& e, std::int64_t v) { return e.first < v; });
    for (; it != c.z.end() && it->first < n + p; ++it) out.push_back(*it);
    return out;
}

// ---------------------------------------------------------------------------
// Config

namespace {

nlohmann::json smap_family_to_json(const SMapFamily& f) {
    if (auto h = std::get_if<HyperbolicPair>(&f))
        return {{"kind", "hyperbolic_pair"}, {"lambda", h->lambda}, {"mu", h->mu},
                {"b1", complex_to_json(h->b1)}, {"b2", complex_to_json(h->b2)}};
    if (auto p = std::get_if<ParabolicPair>(&f)) return {{"kind", "parabolic_pair"}, {"tau1", p->tau1}, {"tau2", p->tau2}};
    if (auto c = std::get_if<CompositionPair>(&f))
        return {{"kind", "composition_pair"}, {"phi1", c->phi1.to_json()}, {"phi2", c->phi2.to_json()}};
    const auto& s = std::get<ShiftPair>(f);
    nlohmann::json j{{"kind", "shift_pair"}};
    if (s.construction) {
        j["horizon"] = s.construction->horizon;
        j["count"] = s.construction->count;
        j["schedule"] = s.construction->n_schedule;
    }
    return j;
}

SMapFamily smap_family_from_json(const nlohmann::json& j) {
    const std::string where = "/family";
    if (!j.is_object() || !j.contains("kind")) throw ConfigError(where + "/kind is required");
    const std::string kind = get_or<std::string>(j, "kind", "", where);
    if (kind == "hyperbolic_pair") {
        require_keys(j, {"kind", "lambda", "mu", "b1", "b2"}, where);
        HyperbolicPair h;
        h.lambda = get_or(j, "lambda", h.lambda, where);
        h.mu = get_or(j, "mu", h.mu, where);
        if (j.contains("b1")) h.b1 = cx(j.at("b1"), where + "/b1");
        if (j.contains("b2")) h.b2 = cx(j.at("b2"), where + "/b2");
        return h;
    }
    if (kind == "parabolic_pair") {
        require_keys(j, {"kind", "tau1", "tau2", "tau", "r"}, where);
        ParabolicPair p;
        if (j.contains("tau")) {
            if (j.contains("tau1") || j.contains("tau2")) throw ConfigError(where + ": give (tau, r) or (tau1, tau2)");
            p.tau1 = get_or(j, "tau", 1.0, where);
            p.tau2 = get_or(j, "r", 2.0, where) * p.tau1;
            return p;
        }
        if (j.contains("r")) throw ConfigError(where + "/r needs /family/tau");
        p.tau1 = get_or(j, "tau1", p.tau1, where);
        p.tau2 = get_or(j, "tau2", p.tau2, where);
        return p;
    }
    if (kind == "composition_pair") {
        require_keys(j, {"kind", "phi1", "phi2"}, where);
        if (!j.contains("phi1") || !j.contains("phi2")) throw ConfigError(where + ": phi1 and phi2 are required");
        try {
            return CompositionPair{MobiusMap::from_json(j.at("phi1")), MobiusMap::from_json(j.at("phi2"))};
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
    if (kind == "shift_pair") {
        require_keys(j, {"kind", "horizon", "count", "schedule"}, where);
        DfhcOptions o;
        o.horizon = get_or(j, "horizon", o.horizon, where);
        o.count = get_or(j, "count", o.count, where);
        if (j.contains("schedule")) o.schedule = get_or(j, "schedule", std::vector<std::int64_t>{}, where);
        return ShiftPair{std::make_shared<const DfhcConstruction>(build_dfhc_pair(o))};
    }
    throw ConfigError("unknown family kind at " + where + "/kind: '" + kind + "'");
}

}  // namespace

nlohmann::json CriterionConfig::to_json() const {
    nlohmann::json ts = nlohmann::json::array();
    for (const auto& y : targets) ts.push_back(y.to_json());
    return {{"family", family_json.is_null() ? smap_family_to_json(family) : family_json},
            {"sequence", sequence.to_json()},
            {"targets", ts},
            {"truncation",
             {{"k_max", truncation.k_max},
              {"l_max", truncation.l_max},
              {"window", truncation.window},
              {"geometric", truncation.geometric}}},
            {"tolerance", tolerance},
            {"horizon", horizon},
            {"grid", {{"nodes", grid.nodes}}}};
}

CriterionConfig CriterionConfig::from_json(const nlohmann::json& j) {
    require_keys(j, {"family", "sequence", "targets", "truncation", "tolerance", "horizon", "grid"}, "");
    CriterionConfig c;
    if (j.contains("family")) {
        c.family = smap_family_from_json(j.at("family"));
        c.family_json = j.at("family");
    }
    if (j.contains("sequence")) c.sequence = ReturnSpec::from_json(j.at("sequence"));
    if (j.contains("truncation")) {
        const auto& t = j.at("truncation");
        require_keys(t, {"k_max", "l_max", "window", "geometric"}, "/truncation");
        c.truncation.k_max = get_or(t, "k_max", c.truncation.k_max, "/truncation");
        c.truncation.l_max = get_or(t, "l_max", c.truncation.l_max, "/truncation");
        c.truncation.window = get_or(t, "window", c.truncation.window, "/truncation");
        c.truncation.geometric = get_or(t, "geometric", c.truncation.geometric, "/truncation");
    }
    c.tolerance = get_or(j, "tolerance", c.tolerance, "");
    c.horizon = get_or(j, "horizon", c.horizon, "");
    if (j.contains("grid")) {
        require_keys(j.at("grid"), {"nodes"}, "/grid");
        c.grid.nodes = get_or(j.at("grid"), "nodes", c.grid.nodes, "/grid");
    }
    if (j.contains("targets")) {
        const auto& t = j.at("targets");
        if (t.is_object()) {
            require_keys(t, {"count"}, "/targets");
            c.targets = dense_targets(c.family, get_or(t, "count", 1, "/targets"));
        } else if (t.is_array()) {
            for (const auto& e : t) c.targets.push_back(DenseElement::from_json(e));
        } else {
            throw ConfigError("/targets must be an array or {\"count\": P}");
        }
    }
    validate_config(c);
    return c;
}

void validate_config(const CriterionConfig& c) {
    const auto& t = c.truncation;
    if (t.k_max < 0 || t.l_max < 0) throw ConfigError("/truncation: k_max and l_max must be ≥ 0");
    if (t.window < 1) throw ConfigError("/truncation/window must be ≥ 1");
    if (!(c.tolerance > 0)) throw ConfigError("/tolerance must be positive");
    if (c.horizon < 1) throw ConfigError("/horizon must be positive");
    if (c.grid.nodes < 16) throw ConfigError("/grid/nodes must be ≥ 16");
    if (auto h = std::get_if<HyperbolicPair>(&c.family)) {
        if (!(h->lambda > 1) || !(h->mu > 1)) throw ConfigError("/family: λ and μ must exceed 1");
        if (std::fabs(h->lambda - h->mu) < 1e-15) throw ConfigError("/family: λ and μ must differ");
        for (cplx b : {h->b1, h->b2})
            if (!(b.real() > -1 && b.real() <= 0) || b.imag() != 0.0)
                throw ConfigError("/family: b₁, b₂ must be real and lie in (−1, 0]");
    }
    if (auto p = std::get_if<ParabolicPair>(&c.family)) {
        if (p->tau1 == 0 || p->tau2 == 0 || p->tau1 == p->tau2)
            throw ConfigError("/family: τ₁, τ₂ must be nonzero and distinct");
    }
    if (auto s = std::get_if<ShiftPair>(&c.family)) {
        if (!s->construction) throw ConfigError("/family: shift pair lacks its construction");
    }
    if (!std::holds_alternative<ShiftPair>(c.family)) {
        if (c.sequence.kind == ReturnKind::block_union) {
            try {
                check_block_union(c.sequence, family_ratio(c.family));
            } catch (const ArgumentError& e) {
                throw ConfigError(std::string("/sequence: ") + e.what());
            }
        }
    }
    for (std::size_t i = 0; i < c.targets.size(); ++i) {
        try {
            validate_dense(c.family, c.targets[i]);
        } catch (const PreconditionError& e) {
            throw ConfigError("/targets/" + std::to_string(i) + ": " + e.what());
        }
    }
}

}  // namespace hclab
