#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "ymr/indexcalc.hpp"

using namespace ymr;

namespace {

// independent oracle: plain grade as (r, s) with alpha = -1/2 - eps, no eps_minus part
struct Plain {
    Rational r;
    long s;
};
Plain oracle_grade(int g, const std::vector<N4>& slots)
{
    long P = g;
    for (auto& n : slots) P += 2 * n[0] + n[1] + n[2] + n[3];
    long p1 = g - static_cast<long>(slots.size()) + 1;
    return {Rational(P) - Rational(p1, 2), -p1};
}

bool oracle_populated(int g, size_t slots)
{
    long pop = g - static_cast<long>(slots);
    return pop >= 0 || (g == 0 && slots == 1) || (g == 1 && slots == 2) || (g == 2 && slots == 3);
}

MultiIndex from_slots(int g, const std::vector<N4>& slots)
{
    MultiIndex b = MultiIndex::delta_g(0);
    b.g = g;
    for (auto& n : slots) b = b + MultiIndex::delta_n(n);
    return b;
}

// every beta with g <= gmax, at most smax slots, slot degrees <= dmax, filtered by the oracle predicates
std::set<std::string> brute_force_below(Rational bound_r, int gmax, int smax, int dmax)
{
    std::vector<N4> alphabet;
    for (int a = 0; 2 * a <= dmax; ++a)
        for (int b = 0; 2 * a + b <= dmax; ++b)
            for (int c = 0; 2 * a + b + c <= dmax; ++c)
                for (int d = 0; 2 * a + b + c + d <= dmax; ++d) alphabet.push_back({a, b, c, d});
    std::set<std::string> out;
    std::vector<N4> cur;
    std::function<void(size_t)> rec = [&](size_t start) {
        for (int g = 0; g <= gmax; ++g) {
            if (!oracle_populated(g, cur.size())) continue;
            auto gr = oracle_grade(g, cur);
            // (r, s) < (bound_r, 0) lexicographically
            if (gr.r < bound_r || (gr.r == bound_r && gr.s < 0)) out.insert(from_slots(g, cur).str());
        }
        if (static_cast<int>(cur.size()) == smax) return;
        for (size_t i = start; i < alphabet.size(); ++i) {
            cur.push_back(alphabet[i]);
            rec(i);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

}  // namespace

TEST_CASE("parabolic degree and population examples")
{
    CHECK(parabolic_degree({0, 0, 0, 0}) == 0);
    CHECK(parabolic_degree({1, 0, 0, 0}) == 2);
    CHECK(parabolic_degree({0, 1, 1, 0}) == 2);
    CHECK(population(MultiIndex::zero()) == 0);
    CHECK(population(MultiIndex::delta_n({0, 1, 0, 0})) == -1);
    CHECK(population(MultiIndex::delta_g(2) + MultiIndex::delta_n({0, 0, 0, 0}, 3)) == -1);
}

TEST_CASE("grade examples")
{
    const GradedValue alpha(Rational(-1, 2), -1, 0);
    CHECK(grade(MultiIndex::zero(), GradeKind::plain) == alpha);
    for (int k = 1; k <= 4; ++k) {
        auto b = MultiIndex::delta_g(k) + MultiIndex::delta_n({0, 0, 0, 0});
        CHECK(grade(b, GradeKind::plain) == GradedValue(Rational(k, 2), -k, 0));
    }
    CHECK(grade(MultiIndex::zero(), GradeKind::modified) == GradedValue(Rational(2), -1, 0));
    auto dn = MultiIndex::delta_n({1, 1, 0, 0});
    CHECK(grade(dn, GradeKind::corrected) == GradedValue::integer(3));
    // corrected subtracts eps_minus once per ([beta] + 1)
    CHECK(grade(MultiIndex::delta_g(2), GradeKind::corrected) ==
          grade(MultiIndex::delta_g(2), GradeKind::plain) - GradedValue(Rational(0), 0, 3));
}

TEST_CASE("graded value order is lexicographic in (r, s, u)")
{
    GradedValue a(Rational(1), 0, 0), b(Rational(1), 1, 0), c(Rational(1), 1, -5), d(Rational(3, 2), -100, 0);
    CHECK(a < c);
    CHECK(c < b);
    CHECK(b < d);
    auto hp = default_hom();
    CHECK(a.to_double(hp.eps, hp.eps_minus) < c.to_double(hp.eps, hp.eps_minus));
    CHECK(GradedValue::from_json(d.to_json()) == d);
}

TEST_CASE("membership examples")
{
    auto z = MultiIndex::delta_n({0, 0, 0, 0});
    auto m = membership(MultiIndex::delta_g() + z + z);
    CHECK(m.in_Mprime);
    CHECK_FALSE(m.in_Mgeq0);
    m = membership(z);
    CHECK(m.in_Mpp);
    CHECK_FALSE(m.in_Mprime);
    CHECK(m.in_M);
    m = membership(MultiIndex::delta_n({0, 0, 0, 0}, 3));
    CHECK_FALSE(m.in_Mpp);
    CHECK_FALSE(m.in_Mgeq0);
    CHECK_FALSE(m.in_Mprime);
    CHECK_FALSE(m.in_M);
}

TEST_CASE("enumeration below 2 matches the brute-force filter")
{
    auto list = enumerate_populated(GradedValue::integer(2), GradeKind::plain);
    std::set<std::string> got;
    for (auto& b : list) got.insert(b.str());
    CHECK(got.size() == list.size());
    CHECK(got == brute_force_below(Rational(2), 7, 6, 3));

    // 19 in M' plus the purely polynomial 1, y1, y2, y3
    int nprime = 0, npp = 0;
    for (auto& b : list) {
        auto m = membership(b);
        nprime += m.in_Mprime;
        npp += m.in_Mpp;
    }
    CHECK(nprime == 19);
    CHECK(npp == 4);

    // the four families and their grades
    auto z = MultiIndex::delta_n({0, 0, 0, 0});
    auto has = [&](const MultiIndex& b) { return std::find(list.begin(), list.end(), b) != list.end(); };
    for (int k = 0; k <= 5; ++k) {
        CHECK(has(MultiIndex::delta_g(k)));
        CHECK(grade(MultiIndex::delta_g(k), GradeKind::plain) == GradedValue(Rational(k - 1, 2), -(k + 1), 0));
    }
    for (int k = 1; k <= 4; ++k) CHECK(has(MultiIndex::delta_g(k) + z));
    for (int k = 1; k <= 3; ++k) {
        auto b = MultiIndex::delta_g(k) + z + z;
        CHECK(has(b));
        CHECK(grade(b, GradeKind::plain) == GradedValue(Rational(k + 1, 2), -(k - 1), 0));
    }
    for (int k = 1; k <= 2; ++k)
        for (int i = 1; i <= 3; ++i) {
            N4 e{0, 0, 0, 0};
            e[i] = 1;
            auto b = MultiIndex::delta_g(k) + MultiIndex::delta_n(e);
            CHECK(has(b));
            CHECK(grade(b, GradeKind::plain) == GradedValue(Rational(k + 2, 2), -k, 0));
        }
    check_surrogate_order(list, GradeKind::plain);
    for (size_t i = 1; i < list.size(); ++i) CHECK(grade_order_less(list[i - 1], list[i], GradeKind::plain));
}

TEST_CASE("enumeration boundary cases")
{
    const GradedValue alpha(Rational(-1, 2), -1, 0);
    // strict inequality: nothing below alpha, only 0 just above it
    CHECK(enumerate_populated(alpha, GradeKind::plain).empty());
    auto just = enumerate_populated(alpha + GradedValue(Rational(1, 1000000000)), GradeKind::plain);
    REQUIRE(just.size() == 1);
    CHECK(just[0].is_zero());
    // a finer bound keeps matching the oracle
    std::set<std::string> got;
    for (auto& b : enumerate_populated(GradedValue(Rational(3, 2)), GradeKind::plain)) got.insert(b.str());
    CHECK(got == brute_force_below(Rational(3, 2), 7, 6, 3));
}

TEST_CASE("modified bound 17 covers every populated index of plain grade at most 2")
{
    auto big = enumerate_populated(GradedValue::integer(17), GradeKind::modified);
    std::set<MultiIndex> S(big.begin(), big.end());
    for (auto& b : enumerate_populated(GradedValue(Rational(2), 0, 1), GradeKind::plain)) CHECK(S.count(b) == 1);
}

TEST_CASE("decomposition examples")
{
    auto z = MultiIndex::delta_n({0, 0, 0, 0});
    auto d = decompositions(MultiIndex::delta_g() + z + z, DecompPattern::pair);
    REQUIRE(d.size() == 1);
    CHECK(d[0].parts == std::vector<MultiIndex>{z, z});
    d = decompositions(MultiIndex::delta_g(), DecompPattern::pair);
    REQUIRE(d.size() == 1);
    CHECK(d[0].parts == std::vector<MultiIndex>{MultiIndex::zero(), MultiIndex::zero()});
    d = decompositions(MultiIndex::delta_g(2) + z, DecompPattern::kg_rest);
    REQUIRE(d.size() == 2);
    std::set<std::pair<int, std::string>> got;
    for (auto& x : d) {
        REQUIRE(x.parts.size() == 1);
        got.insert({x.k, x.parts[0].str()});
    }
    CHECK(got == std::set<std::pair<int, std::string>>{{1, (MultiIndex::delta_g() + z).str()}, {2, z.str()}});
}

TEST_CASE("property: pair decompositions recombine to the index")
{
    for (auto& b : enumerate_populated(GradedValue::integer(2), GradeKind::plain)) {
        for (auto& d : decompositions(b, DecompPattern::pair)) {
            REQUIRE(d.parts.size() == 2);
            CHECK(d.parts[0] + d.parts[1] + MultiIndex::delta_g() == b);
        }
        for (auto& d : decompositions(b, DecompPattern::triple)) {
            REQUIRE(d.parts.size() == 3);
            CHECK(d.parts[0] + d.parts[1] + d.parts[2] + MultiIndex::delta_g(2) == b);
        }
    }
}

TEST_CASE("property: grade minus alpha is additive and grades are bounded below by alpha")
{
    const GradedValue alpha(Rational(-1, 2), -1, 0);
    auto list = enumerate_populated(GradedValue::integer(2), GradeKind::plain);
    for (auto& a : list) {
        CHECK_FALSE(grade(a, GradeKind::plain) < alpha);
        if (!a.is_zero()) CHECK(alpha < grade(a, GradeKind::plain));
        for (auto& b : list)
            CHECK(grade(a + b, GradeKind::plain) - alpha ==
                  (grade(a, GradeKind::plain) - alpha) + (grade(b, GradeKind::plain) - alpha));
        auto m = membership(a);
        // nonnegative population carries an eps part
        if (m.in_Mgeq0) CHECK(grade(a, GradeKind::plain).s != 0);
        // modified dominates plain, equality exactly at population -1
        if (m.in_Mgeq0 || m.in_Mpp) {
            CHECK_FALSE(grade(a, GradeKind::modified) < grade(a, GradeKind::plain));
            CHECK((grade(a, GradeKind::modified) == grade(a, GradeKind::plain)) == (population(a) == -1));
        }
    }
}

TEST_CASE("serialization round trips")
{
    auto b = MultiIndex::delta_g(2) + MultiIndex::delta_n({0, 1, 0, 0}) + MultiIndex::delta_n({0, 0, 0, 0}, 2);
    CHECK(MultiIndex::parse(b.str()) == b);
    CHECK(MultiIndex::from_json(b.to_json()) == b);
    CHECK(MultiIndex::parse("0").is_zero());
    CHECK(b.contains(MultiIndex::delta_g()));
    CHECK((b - MultiIndex::delta_g()).g == 1);
}
