#include "ymr/indexcalc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace ymr {

int parabolic_degree(const N4& n) { return 2 * n[0] + n[1] + n[2] + n[3]; }

bool canonical_less(const N4& a, const N4& b)
{
    int da = parabolic_degree(a), db = parabolic_degree(b);
    if (da != db) return da < db;
    return a < b;
}

std::string n4_string(const N4& n)
{
    std::ostringstream os;
    os << "(" << n[0] << "," << n[1] << "," << n[2] << "," << n[3] << ")";
    return os.str();
}

std::strong_ordering GradedValue::operator<=>(const GradedValue& o) const
{
    if (r != o.r) return r < o.r ? std::strong_ordering::less : std::strong_ordering::greater;
    if (s != o.s) return s <=> o.s;
    return u <=> o.u;
}

double GradedValue::to_double(Rational eps, Rational eps_minus) const
{
    Rational v = r + eps * s + eps_minus * u;
    return boost::rational_cast<double>(v);
}

std::string GradedValue::str() const
{
    std::ostringstream os;
    os << r.numerator();
    if (r.denominator() != 1) os << "/" << r.denominator();
    if (s != 0) os << (s > 0 ? " + " : " - ") << std::labs(s) << "eps";
    if (u != 0) os << (u > 0 ? " + " : " - ") << std::labs(u) << "eps_";
    return os.str();
}

nlohmann::json GradedValue::to_json() const
{
    std::string rs = std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
    return {{"r", rs}, {"s", s}, {"u", u}};
}

GradedValue GradedValue::from_json(const nlohmann::json& j)
{
    std::string rs = j.at("r").get<std::string>();
    auto slash = rs.find('/');
    Rational r = slash == std::string::npos
                     ? Rational(std::stoll(rs))
                     : Rational(std::stoll(rs.substr(0, slash)), std::stoll(rs.substr(slash + 1)));
    return {r, j.value("s", 0L), j.value("u", 0L)};
}

const HomParams& default_hom()
{
    static const HomParams hp{};
    return hp;
}

MultiIndex MultiIndex::delta_g(int k)
{
    MultiIndex b;
    b.g = k;
    return b;
}

MultiIndex MultiIndex::delta_n(const N4& n, int k)
{
    MultiIndex b;
    if (k > 0) b.poly.push_back({n, k});
    return b;
}

static void normalize(std::vector<std::pair<N4, int>>& p)
{
    std::sort(p.begin(), p.end(),
              [](const auto& a, const auto& b) { return canonical_less(a.first, b.first); });
    std::vector<std::pair<N4, int>> out;
    for (auto& e : p) {
        if (!out.empty() && out.back().first == e.first)
            out.back().second += e.second;
        else
            out.push_back(e);
    }
    std::erase_if(out, [](const auto& e) { return e.second == 0; });
    p = std::move(out);
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const
{
    MultiIndex b;
    b.g = g + o.g;
    b.poly = poly;
    b.poly.insert(b.poly.end(), o.poly.begin(), o.poly.end());
    normalize(b.poly);
    return b;
}

MultiIndex MultiIndex::operator-(const MultiIndex& o) const
{
    if (!contains(o)) throw std::invalid_argument("multi-index difference would be negative");
    MultiIndex b;
    b.g = g - o.g;
    b.poly = poly;
    for (auto& e : o.poly)
        for (auto& f : b.poly)
            if (f.first == e.first) f.second -= e.second;
    normalize(b.poly);
    return b;
}

int MultiIndex::count(const N4& n) const
{
    for (auto& e : poly)
        if (e.first == n) return e.second;
    return 0;
}

bool MultiIndex::contains(const MultiIndex& o) const
{
    if (o.g > g) return false;
    for (auto& e : o.poly)
        if (count(e.first) < e.second) return false;
    return true;
}

int MultiIndex::slots() const
{
    int s = 0;
    for (auto& e : poly) s += e.second;
    return s;
}

bool MultiIndex::operator<(const MultiIndex& o) const
{
    if (g != o.g) return g < o.g;
    size_t m = std::min(poly.size(), o.poly.size());
    for (size_t i = 0; i < m; ++i) {
        if (poly[i].first != o.poly[i].first) return canonical_less(poly[i].first, o.poly[i].first);
        if (poly[i].second != o.poly[i].second) return poly[i].second < o.poly[i].second;
    }
    return poly.size() < o.poly.size();
}

std::string MultiIndex::str() const
{
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    if (g > 0) {
        os << "g^" << g;
        first = false;
    }
    for (auto& e : poly) {
        if (!first) os << " * ";
        os << "n" << n4_string(e.first) << "^" << e.second;
        first = false;
    }
    return os.str();
}

MultiIndex MultiIndex::parse(const std::string& s)
{
    MultiIndex b;
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (t == "0" || t.empty()) return b;
    size_t pos = 0;
    while (pos < t.size()) {
        size_t end = t.find('*', pos);
        if (end == std::string::npos) end = t.size();
        std::string term = t.substr(pos, end - pos);
        pos = end + 1;
        int power = 1;
        auto caret = term.rfind('^');
        std::string base = term;
        if (caret != std::string::npos && term.find(')', caret) == std::string::npos) {
            power = std::stoi(term.substr(caret + 1));
            base = term.substr(0, caret);
        }
        if (base == "g") {
            b.g += power;
        } else if (base.size() > 3 && base[0] == 'n' && base[1] == '(' && base.back() == ')') {
            N4 n{};
            std::stringstream ss(base.substr(2, base.size() - 3));
            std::string item;
            int k = 0;
            while (std::getline(ss, item, ',')) {
                if (k >= 4) throw std::invalid_argument("bad multi-index term: " + term);
                n[k++] = std::stoi(item);
            }
            if (k != 4) throw std::invalid_argument("bad multi-index term: " + term);
            b.poly.push_back({n, power});
        } else {
            throw std::invalid_argument("bad multi-index term: " + term);
        }
    }
    normalize(b.poly);
    return b;
}

nlohmann::json MultiIndex::to_json() const
{
    nlohmann::json p = nlohmann::json::array();
    for (auto& e : poly) p.push_back({e.first, e.second});
    return {{"g", g}, {"poly", p}};
}

MultiIndex MultiIndex::from_json(const nlohmann::json& j)
{
    MultiIndex b;
    b.g = j.value("g", 0);
    for (auto& e : j.value("poly", nlohmann::json::array())) {
        N4 n = e.at(0).get<N4>();
        b.poly.push_back({n, e.at(1).get<int>()});
    }
    normalize(b.poly);
    return b;
}

int population(const MultiIndex& b) { return b.g - b.slots(); }

long poly_weight(const MultiIndex& b)
{
    long P = b.g;
    for (auto& e : b.poly) P += static_cast<long>(e.second) * parabolic_degree(e.first);
    return P;
}

GradedValue grade(const MultiIndex& b, GradeKind kind, const HomParams& hp)
{
    long p1 = population(b) + 1;
    GradedValue v = GradedValue::integer(poly_weight(b)) + hp.alpha * p1;
    if (kind == GradeKind::modified) v.r += Rational(hp.d, 2) * p1;
    if (kind == GradeKind::corrected) v.u -= p1;
    return v;
}

Membership membership(const MultiIndex& b)
{
    Membership m;
    int s = b.slots();
    m.in_Mpp = b.g == 0 && s == 1;
    m.in_Mgeq0 = population(b) >= 0;
    bool b2 = b.g == 1 && s == 2;
    bool b3 = b.g == 2 && s == 3;
    m.in_Mprime = m.in_Mgeq0 || b2 || b3;
    m.in_M = m.in_Mprime || m.in_Mpp;
    return m;
}

std::vector<N4> n4_upto(int maxdeg)
{
    std::vector<N4> out;
    for (int n0 = 0; 2 * n0 <= maxdeg; ++n0)
        for (int n1 = 0; 2 * n0 + n1 <= maxdeg; ++n1)
            for (int n2 = 0; 2 * n0 + n1 + n2 <= maxdeg; ++n2)
                for (int n3 = 0; 2 * n0 + n1 + n2 + n3 <= maxdeg; ++n3) out.push_back({n0, n1, n2, n3});
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

bool grade_order_less(const MultiIndex& a, const MultiIndex& b, GradeKind kind, const HomParams& hp)
{
    auto ga = grade(a, kind, hp), gb = grade(b, kind, hp);
    if (ga != gb) return ga < gb;
    if (a.g != b.g) return a.g < b.g;
    return a < b;
}

namespace {

// multisets of `size` elements from alphabet (non-decreasing positions) whose degree sum
// keeps base + sum < bound
void multisets(const std::vector<N4>& alpha, const std::vector<int>& deg, int size, int start,
               long degsum, const GradedValue& base, const GradedValue& bound,
               std::vector<int>& cur, const std::function<void(const std::vector<int>&)>& emit)
{
    if (static_cast<int>(cur.size()) == size) {
        emit(cur);
        return;
    }
    for (int i = start; i < static_cast<int>(alpha.size()); ++i) {
        long d = degsum + deg[i];
        // remaining slots contribute at least deg[i] each since the alphabet is degree sorted
        long rest = static_cast<long>(size - cur.size() - 1) * deg[i];
        if (!(base + GradedValue::integer(d + rest) < bound)) break;
        cur.push_back(i);
        multisets(alpha, deg, size, i, d, base, bound, cur, emit);
        cur.pop_back();
    }
}

}  // namespace

std::vector<MultiIndex> enumerate_populated(const GradedValue& bound, GradeKind kind, const HomParams& hp)
{
    if (kind == GradeKind::corrected)
        throw std::invalid_argument("enumeration supports plain and modified grades");
    std::vector<MultiIndex> out;

    auto shape_base = [&](int l, int s) {
        MultiIndex b = MultiIndex::delta_g(l) + MultiIndex::delta_n({0, 0, 0, 0}, s);
        return grade(b, kind, hp);
    };
    // largest polynomial degree any slot can carry
    auto max_slot_degree = [&](const GradedValue& base) {
        GradedValue gap = bound - base;
        if (!(GradedValue() < gap)) return -1L;
        long d = static_cast<long>(std::floor(boost::rational_cast<double>(gap.r))) + 1;
        return d;
    };

    auto run_shape = [&](int l, int s) {
        GradedValue base = shape_base(l, s);
        if (!(base < bound)) return;
        long dmax = max_slot_degree(base);
        if (dmax < 0) return;
        auto alpha = n4_upto(static_cast<int>(dmax));
        std::vector<int> deg;
        for (auto& n : alpha) deg.push_back(parabolic_degree(n));
        std::vector<int> cur;
        multisets(alpha, deg, s, 0, 0, base, bound, cur, [&](const std::vector<int>& pick) {
            MultiIndex b;
            b.g = l;
            for (int i : pick) {
                if (!b.poly.empty() && b.poly.back().first == alpha[i])
                    b.poly.back().second++;
                else
                    b.poly.push_back({alpha[i], 1});
            }
            out.push_back(std::move(b));
        });
    };

    // populated, [beta] >= 0
    for (int l = 0; l < 100000; ++l) {
        bool any = false;
        for (int s = 0; s <= l; ++s)
            if (shape_base(l, s) < bound) any = true;
        if (!any) {
            // grades of all shapes grow with l for both kinds, so stop at the first empty level
            break;
        }
        for (int s = 0; s <= l; ++s) run_shape(l, s);
    }
    run_shape(1, 2);   // delta_g + delta_n + delta_n'
    run_shape(2, 3);   // 2 delta_g + delta_n + delta_n' + delta_n''
    run_shape(0, 1);   // purely polynomial

    std::sort(out.begin(), out.end(),
              [&](const MultiIndex& a, const MultiIndex& b) { return grade_order_less(a, b, kind, hp); });
    check_surrogate_order(out, kind, hp);
    return out;
}

void check_surrogate_order(const std::vector<MultiIndex>& sorted, GradeKind kind, const HomParams& hp)
{
    for (size_t i = 1; i < sorted.size(); ++i) {
        auto a = grade(sorted[i - 1], kind, hp), b = grade(sorted[i], kind, hp);
        if (a == b) continue;
        Rational va = a.r + hp.eps * a.s + hp.eps_minus * a.u;
        Rational vb = b.r + hp.eps * b.s + hp.eps_minus * b.u;
        if (!(va < vb))
            throw std::runtime_error("epsilon surrogate breaks grade order between " + sorted[i - 1].str() +
                                     " and " + sorted[i].str());
    }
}

namespace {

// every sub-index c <= b
std::vector<MultiIndex> sub_indices(const MultiIndex& b)
{
    std::vector<MultiIndex> out;
    MultiIndex cur;
    std::function<void(size_t)> rec = [&](size_t i) {
        if (i == b.poly.size()) {
            for (int k = 0; k <= b.g; ++k) {
                MultiIndex c = cur;
                c.g = k;
                out.push_back(c);
            }
            return;
        }
        for (int c = 0; c <= b.poly[i].second; ++c) {
            if (c > 0) cur.poly.push_back({b.poly[i].first, c});
            rec(i + 1);
            if (c > 0) cur.poly.pop_back();
        }
    };
    rec(0);
    return out;
}

}  // namespace

std::vector<Decomposition> decompositions(const MultiIndex& b, DecompPattern pattern)
{
    // only populated parts contribute; the others have vanishing realizations
    auto populated = [](const MultiIndex& x) { return membership(x).in_M; };
    std::vector<Decomposition> out;
    if (pattern == DecompPattern::kg_rest) {
        for (int k = 1; k <= 4 && k <= b.g; ++k) {
            MultiIndex r = b - MultiIndex::delta_g(k);
            if (populated(r)) out.push_back({k, {r}});
        }
        return out;
    }
    int need = pattern == DecompPattern::pair ? 1 : 2;
    if (b.g < need) return out;
    MultiIndex rest = b - MultiIndex::delta_g(need);
    for (auto& b1 : sub_indices(rest)) {
        if (!populated(b1)) continue;
        MultiIndex r1 = rest - b1;
        if (pattern == DecompPattern::pair) {
            if (populated(r1)) out.push_back({0, {b1, r1}});
        } else {
            for (auto& b2 : sub_indices(r1))
                if (populated(b2) && populated(r1 - b2)) out.push_back({0, {b1, b2, r1 - b2}});
        }
    }
    return out;
}

}  // namespace ymr
