#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "criterion_internal.hpp"
#include "hclab/errors.hpp"

namespace hclab::detail {

Chain& Chain::then(int sym, std::int64_t e) {
    if (e == 0) return *this;
    if (!steps.empty() && steps.back().first == sym) {
        steps.back().second += e;
        if (steps.back().second == 0) steps.pop_back();
    } else {
        steps.emplace_back(sym, e);
    }
    return *this;
}

std::vector<Term> combine(const std::vector<Term>& terms, const std::vector<bool>& zero_poly) {
    std::map<std::pair<int, Chain>, ld> acc;
    std::vector<std::pair<int, Chain>> order;
    for (const Term& t : terms) {
        if (zero_poly[t.poly] || t.weight == 0) continue;
        auto key = std::make_pair(t.poly, t.chain);
        auto it = acc.find(key);
        if (it == acc.end()) {
            acc.emplace(key, t.weight);
            order.push_back(key);
        } else {
            it->second += t.weight;
        }
    }
    std::vector<Term> out;
    for (const auto& key : order) {
        const ld w = acc[key];
        if (w != 0) out.push_back({key.first, key.second, w});
    }
    return out;
}

std::vector<Term> combine_terms(const TermEngine& e, const std::vector<Term>& terms) {
    return combine(terms, e.zero_);
}

void rethrow_at(const Error& e, const std::string& where) {
    const std::string msg = std::string(e.what()) + " at " + where;
    if (e.kind() == "integrability") throw IntegrabilityError(msg);
    if (e.kind() == "pole") throw PoleError(msg);
    if (e.kind() == "range") throw RangeError(msg);
    if (e.kind() == "domain") throw DomainError(msg);
    throw Error(e.kind(), msg);
}

std::vector<std::int64_t> index_grid(std::int64_t max, bool geometric) {
    std::vector<std::int64_t> g;
    if (!geometric) {
        for (std::int64_t i = 0; i <= max; ++i) g.push_back(i);
        return g;
    }
    g.push_back(0);
    for (std::int64_t i = 1; i < max; i *= 2) g.push_back(i);
    if (max > 0) g.push_back(max);
    return g;
}

long double log_abs(const mpq_class& q) {
    if (sgn(q) == 0) throw DomainError("log of zero");
    long en = 0, ed = 0;
    const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
    const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
    return std::log(std::fabs(static_cast<long double>(mn))) - std::log(static_cast<long double>(md)) +
           static_cast<long double>(en - ed) * std::numbers::ln2_v<long double>;
}


namespace {

// Global adaptive Gauss–Kronrod: bisects the segment with the largest error estimate until the
// summed estimate is below rel_tol times the integral (integrands are nonnegative).
template <class F>
ld integrate_segments(F&& f, const std::vector<std::tuple<int, ld, ld>>& segs, ld rel_tol) {
    using GK = boost::math::quadrature::gauss_kronrod<ld, 15>;
    struct Item {
        ld err, val, a, b;
        int kind;
        bool operator<(const Item& o) const { return err < o.err; }
    };
    auto eval = [&](int kind, ld a, ld b) {
        ld err = 0;
        const ld v = GK::integrate([&](ld x) { return f(kind, x); }, a, b, 0, ld(0), &err);
        return Item{err, v, a, b, kind};
    };
    std::priority_queue<Item> heap;
    ld total = 0, err = 0;
    for (const auto& [kind, a, b] : segs) {
        if (!(b > a)) continue;
        Item it = eval(kind, a, b);
        total += it.val;
        err += it.err;
        heap.push(it);
    }
    int budget = 200000;
    while (!heap.empty() && err > rel_tol * total + std::numeric_limits<ld>::min()) {
        if (--budget < 0) throw IntegrabilityError("boundary quadrature did not reach its tolerance");
        Item it = heap.top();
        heap.pop();
        const ld m = (it.a + it.b) / 2;
        if (!(m > it.a && m < it.b)) {
            err -= it.err;  // segment below resolution; its estimate stays in the total
            continue;
        }
        Item l = eval(it.kind, it.a, m), r = eval(it.kind, m, it.b);
        total += l.val + r.val - it.val;
        err += l.err + r.err - it.err;
        heap.push(l);
        heap.push(r);
    }
    return total;
}

}  // namespace

// ---------------------------------------------------------------------------

TermEngine::TermEngine(const CriterionConfig& config) : grid_(config.grid) {
    if (auto h = std::get_if<HyperbolicPair>(&config.family)) {
        sym_[0] = {true, cld(h->b1.real(), h->b1.imag()), std::log(static_cast<ld>(h->lambda)), 0};
        sym_[1] = {true, cld(h->b2.real(), h->b2.imag()), std::log(static_cast<ld>(h->mu)), 0};
    } else if (auto p = std::get_if<ParabolicPair>(&config.family)) {
        sym_[0] = {false, 0, 0, static_cast<ld>(p->tau1)};
        sym_[1] = {false, 0, 0, static_cast<ld>(p->tau2)};
    } else if (auto c = std::get_if<CompositionPair>(&config.family)) {
        disc_ = true;
        phi_[0] = c->phi1.domain == MapDomain::disc ? c->phi1 : c->phi1.to_disc();
        phi_[1] = c->phi2.domain == MapDomain::disc ? c->phi2 : c->phi2.to_disc();
        for (const auto& m : phi_) {
            const LfmClassification cls = classify(m);
            focus_points_.push_back(cls.alpha);
            if (cls.has_beta && !cls.beta_at_infinity) focus_points_.push_back(cls.beta);
        }
    } else {
        throw ArgumentError("the term engine serves the half-plane and composition pairs");
    }
}

int TermEngine::add(const DenseElement& y, int component) {
    const RootPolynomial& P = y.components[component];
    const auto& D = y.disc[component];
    for (std::size_t i = 0; i < roots_.size(); ++i) {
        const bool same_disc = (!D && !discs_[i]) ||
                               (D && discs_[i] && D->to_json() == discs_[i]->to_json());
        if (same_disc && roots_[i].scale == P.scale && roots_[i].roots == P.roots) return static_cast<int>(i);
    }
    roots_.push_back(P);
    discs_.push_back(D);
    bool zero = D ? std::all_of(D->coefficients.begin(), D->coefficients.end(), [](cplx c) { return c == 0.0; })
                  : P.is_zero();
    zero_.push_back(zero);
    return static_cast<int>(roots_.size() - 1);
}

cld TermEngine::pull(const Chain& c, cld v) const {
    for (const auto& [s, e] : c.steps) {
        const Symbol& y = sym_[s - 1];
        if (y.dilation)
            v = (v - y.center) * std::exp(-static_cast<ld>(e) * y.log_rate) + y.center;
        else
            v -= cld(0, static_cast<ld>(e) * y.tau);
    }
    return v;
}

ld TermEngine::log_scale(const Chain& c) const {
    ld s = 0;
    for (const auto& [sym, e] : c.steps)
        if (sym_[sym - 1].dilation) s += static_cast<ld>(e) * sym_[sym - 1].log_rate;
    return s;
}

TermEngine::Piece TermEngine::piece(const Term& t) const {
    const RootPolynomial& P = roots_[t.poly];
    Piece pc;
    const ld la = log_scale(t.chain);
    if (std::fabs(la) > 11000) throw RangeError("chain scale outside the long double range");
    pc.scale = std::exp(la);
    pc.pole = pull(t.chain, cld(-1));
    if (!(pc.pole.real() < 0)) throw IntegrabilityError("composed symbol reaches the pole of F on the closed half-plane");
    pc.coef = cld(P.scale.real(), P.scale.imag()) * t.weight;
    for (cplx r : P.roots) {
        const cld rr(r.real(), r.imag());
        if (r == cplx(1.0)) {
            ++pc.ones;
            pc.coef *= ld(-2);
        } else {
            pc.coef *= (ld(1) - rr);
            pc.zeros.push_back(pull(t.chain, (ld(1) + rr) / (ld(1) - rr)));
        }
    }
    return pc;
}

// H(ψ(w)) = coef · Π (w − w_i)/(w − w_p) · (A(w − w_p))^{−ones}; every factor is a disc quantity.
cld TermEngine::Piece::operator()(cld w) const {
    const ld dr = w.real() - pole.real(), di = w.imag() - pole.imag();
    const ld q = 1 / (dr * dr + di * di);
    const ld ir = dr * q, ii = -di * q;  // 1/d
    ld vr = coef.real(), vi = coef.imag();
    auto mul = [&](ld ar, ld ai) {
        const ld t = vr * ar - vi * ai;
        vi = vr * ai + vi * ar;
        vr = t;
    };
    for (const cld& z : zeros) {
        const ld ar = w.real() - z.real(), ai = w.imag() - z.imag();
        mul(ar * ir - ai * ii, ar * ii + ai * ir);
    }
    if (ones > 0) {
        // 1/(A d) = (1/A)(1/d)
        const ld sr = scale.real(), si = scale.imag();
        const ld sq = 1 / (sr * sr + si * si);
        const ld er = (ir * sr + ii * si) * sq, ei = (ii * sr - ir * si) * sq;
        for (int i = 0; i < ones; ++i) mul(er, ei);
    }
    return {vr, vi};
}

double TermEngine::half_plane_norm2(const std::vector<Term>& terms) const {
    std::vector<Piece> ps;
    ps.reserve(terms.size());
    for (const Term& t : terms) ps.push_back(piece(t));
    if (ps.empty()) return 0.0;

    std::vector<ld> bp{0};
    for (int j = -6; j <= 6; ++j) {
        bp.push_back(std::ldexp(ld(1), j));
        bp.push_back(-std::ldexp(ld(1), j));
    }
    ld lo = std::ldexp(ld(1), -6), hi = std::ldexp(ld(1), 6);
    for (const Piece& p : ps) {
        const ld c = p.pole.imag(), rho = -p.pole.real();
        bp.push_back(c);
        for (int j = -3; j <= 6; ++j) {
            bp.push_back(c + rho * std::ldexp(ld(1), j));
            bp.push_back(c - rho * std::ldexp(ld(1), j));
        }
        lo = std::min(lo, rho / 8);
        hi = std::max(hi, std::fabs(c) + 64 * rho);
    }
    for (ld x = lo; x < hi; x *= 16) {
        bp.push_back(x);
        bp.push_back(-x);
    }
    bp.push_back(hi);
    bp.push_back(-hi);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    const ld inv_pi = 1 / std::numbers::pi_v<ld>;
    auto h = [&](ld t) -> ld {
        const cld w(0, t);
        cld s = 0;
        for (const Piece& p : ps) s += p(w);
        return std::norm(s) * inv_pi / (1 + t * t);
    };
    const ld T1 = bp.back(), T0 = -bp.front();
    // Segments: [a, b] in t, or tails t = ±T/x on x ∈ (0, 1].
    auto f = [&](int kind, ld x) -> ld {
        if (kind == 0) return h(x);
        const ld T = kind > 0 ? T1 : T0;
        const ld t = kind > 0 ? T / x : -T / x;
        return h(t) * T / (x * x);
    };
    std::vector<std::tuple<int, ld, ld>> segs;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) segs.emplace_back(0, bp[i], bp[i + 1]);
    segs.emplace_back(1, ld(0), ld(1));
    segs.emplace_back(-1, ld(0), ld(1));
    const ld total = integrate_segments(f, segs, ld(1e-11));
    if (!std::isfinite(static_cast<double>(total)))
        throw IntegrabilityError("boundary integral is not finite");
    return static_cast<double>(total);
}

MobiusMap TermEngine::map(const Chain& c) const {
    MobiusMap m = MobiusMap::identity();
    for (const auto& [s, e] : c.steps) m = m.compose(iterate(phi_[s - 1], e));
    return m;
}

double TermEngine::disc_norm2(const std::vector<Term>& terms) const {
    if (terms.empty()) return 0.0;
    std::vector<MobiusMap> maps;
    std::vector<double> focus;
    for (const Term& t : terms) {
        maps.push_back(map(t.chain));
        const MobiusMap inv = maps.back().inverse();
        for (cplx q : focus_points_) {
            try {
                const cplx z = inv(q);
                if (std::fabs(std::abs(z) - 1) < 0.5) focus.push_back(std::arg(z));
            } catch (const PoleError&) {
            }
        }
        if (auto p = maps.back().pole(); p && std::fabs(std::abs(*p) - 1) < 0.5) focus.push_back(std::arg(*p));
    }
    std::sort(focus.begin(), focus.end());
    focus.erase(std::unique(focus.begin(), focus.end(), [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
                focus.end());
    auto h = [&](double theta) {
        const cplx z = std::polar(1.0, theta);
        cplx s = 0;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const cplx u = maps[i](z);
            const int k = terms[i].poly;
            s += static_cast<double>(terms[i].weight) * (discs_[k] ? (*discs_[k])(u) : roots_[k](u));
        }
        return std::norm(s);
    };
    const double v = adaptive_integral(h, QuadratureGrid{grid_.nodes, Substitution::circle}, focus, 1e-10);
    if (!std::isfinite(v)) throw IntegrabilityError("boundary integral is not finite");
    return v;
}

double TermEngine::norm(const std::vector<Term>& terms) const {
    const std::vector<Term> ts = combine(terms, zero_);
    if (ts.empty()) return 0.0;
    if (ts.size() == 1) return std::fabs(static_cast<double>(ts[0].weight)) * single_norm(ts[0].poly, ts[0].chain);
    return std::sqrt(disc_ ? disc_norm2(ts) : half_plane_norm2(ts));
}

double TermEngine::single_norm(int poly, const Chain& chain) const {
    if (zero_[poly]) return 0.0;
    auto key = std::make_pair(poly, chain);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const std::vector<Term> ts{{poly, chain, 1}};
    const double v = std::sqrt(disc_ ? disc_norm2(ts) : half_plane_norm2(ts));
    cache_.emplace(std::move(key), v);
    return v;
}

cplx TermEngine::value(const std::vector<Term>& terms, cplx point) const {
    cplx s = 0;
    for (const Term& t : terms) {
        if (zero_[t.poly]) continue;
        if (disc_) {
            const cplx u = map(t.chain)(point);
            s += static_cast<double>(t.weight) * (discs_[t.poly] ? (*discs_[t.poly])(u) : roots_[t.poly](u));
        } else {
            const cld v = piece(t)(cld(point.real(), point.imag()));
            s += cplx(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        }
    }
    return s;
}

}  // namespace hclab::detail
