#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

namespace ymr {

using Rational = boost::rational<long long>;
using N4 = std::array<int, 4>;   // (n0 time, n1, n2, n3)

int parabolic_degree(const N4& n);
// graded-lex order by (|n|, n0, n1, n2, n3)
bool canonical_less(const N4& a, const N4& b);
std::string n4_string(const N4& n);

// value r + s*eps + u*eps_minus with eps, eps_minus symbolic, 0 < eps_minus << eps
struct GradedValue {
    Rational r{0};
    long s = 0;
    long u = 0;

    GradedValue() = default;
    GradedValue(Rational r_, long s_ = 0, long u_ = 0) : r(r_), s(s_), u(u_) {}
    static GradedValue integer(long k) { return GradedValue(Rational(k)); }

    GradedValue operator+(const GradedValue& o) const { return {r + o.r, s + o.s, u + o.u}; }
    GradedValue operator-(const GradedValue& o) const { return {r - o.r, s - o.s, u - o.u}; }
    GradedValue operator*(long k) const { return {r * k, s * k, u * k}; }
    bool operator==(const GradedValue& o) const { return r == o.r && s == o.s && u == o.u; }
    std::strong_ordering operator<=>(const GradedValue& o) const;

    double to_double(Rational eps, Rational eps_minus) const;
    std::string str() const;
    nlohmann::json to_json() const;
    static GradedValue from_json(const nlohmann::json& j);
};

struct HomParams {
    int d = 5;
    GradedValue alpha{Rational(-1, 2), -1, 0};
    Rational eps{1, 128};
    Rational eps_minus{1, 16384};
};

const HomParams& default_hom();

struct MultiIndex {
    int g = 0;
    std::vector<std::pair<N4, int>> poly;   // sorted canonically, counts > 0

    static MultiIndex zero() { return {}; }
    static MultiIndex delta_g(int k = 1);
    static MultiIndex delta_n(const N4& n, int k = 1);

    MultiIndex operator+(const MultiIndex& o) const;
    // componentwise difference; valid only when o <= *this
    MultiIndex operator-(const MultiIndex& o) const;
    bool contains(const MultiIndex& o) const;   // o <= *this componentwise
    int count(const N4& n) const;
    int slots() const;   // sum of poly counts
    bool is_zero() const { return g == 0 && poly.empty(); }

    bool operator==(const MultiIndex& o) const { return g == o.g && poly == o.poly; }
    bool operator<(const MultiIndex& o) const;   // structural order for containers

    std::string str() const;
    static MultiIndex parse(const std::string& s);
    nlohmann::json to_json() const;
    static MultiIndex from_json(const nlohmann::json& j);
};

enum class GradeKind { plain, modified, corrected };

int population(const MultiIndex& b);
long poly_weight(const MultiIndex& b);   // P(beta) = g + sum count*|n|
GradedValue grade(const MultiIndex& b, GradeKind kind, const HomParams& hp = default_hom());

struct Membership {
    bool in_Mpp = false, in_Mgeq0 = false, in_Mprime = false, in_M = false;
};
Membership membership(const MultiIndex& b);

// all beta in M with grade(beta, kind) < bound, sorted by (grade, g, poly)
std::vector<MultiIndex> enumerate_populated(const GradedValue& bound, GradeKind kind,
                                            const HomParams& hp = default_hom());
// throws if the rational surrogates break the symbolic order of a sorted list
void check_surrogate_order(const std::vector<MultiIndex>& sorted, GradeKind kind,
                           const HomParams& hp = default_hom());
bool grade_order_less(const MultiIndex& a, const MultiIndex& b, GradeKind kind,
                      const HomParams& hp = default_hom());

enum class DecompPattern { pair, triple, kg_rest };

struct Decomposition {
    int k = 0;                       // used by kg_rest
    std::vector<MultiIndex> parts;   // ordered
};
std::vector<Decomposition> decompositions(const MultiIndex& b, DecompPattern pattern);

// all m in N^4 with |m| <= maxdeg, canonical order
std::vector<N4> n4_upto(int maxdeg);

}  // namespace ymr
