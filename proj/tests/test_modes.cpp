#include <catch2/catch_amalgamated.hpp>

#include "switchlag/modes.hpp"

using namespace switchlag;

namespace {

OpMode op(std::initializer_list<int> cs) {
    OpMode m;
    for (int c : cs) m.comps.push_back(int8_t(c));
    return m;
}

SwitchMode sw(std::initializer_list<int> bs) {
    SwitchMode m;
    for (int b : bs) m.bits.push_back(int8_t(b));
    return m;
}

// Failure count plus total activity strictly increases on every real
// transition; this is what makes the transition graph acyclic.
int potential(const OpMode& a) {
    int p = 0;
    for (int8_t c : a.comps) p += std::abs(int(c)) + (c == -1 ? 1 : 0);
    return p;
}

}  // namespace

TEST_CASE("single-plant enumeration matches the forced structure") {
    auto t = ModeTables::build(1);
    REQUIRE(t.switch_modes().size() == 2);
    REQUIRE(t.pairs().size() == 5);

    // pairs ordered switch-major: (-1,0),(0,0) then (-1,1),(0,1),(1,1)
    REQUIRE(t.pairs()[0].a == op({-1}));
    REQUIRE(t.pairs()[0].b == sw({0}));
    REQUIRE(t.pairs()[4].a == op({1}));
    REQUIRE(t.pairs()[4].b == sw({1}));

    REQUIRE(t.transitions(op({0}), sw({0})) == std::vector<OpMode>{op({0})});
    REQUIRE(t.transitions(op({0}), sw({1})) ==
            std::vector<OpMode>{op({-1}), op({0}), op({1})});
    REQUIRE(t.absorbing(sw({1})) == std::vector<OpMode>{op({-1})});
    REQUIRE(t.absorbing(sw({0})) == std::vector<OpMode>{op({-1}), op({0})});
}

TEST_CASE("allowed switches") {
    auto t1 = ModeTables::build(1);
    REQUIRE(t1.allowed_switches(sw({0})) == std::vector<SwitchMode>{sw({1})});
    REQUIRE(t1.allowed_switches(sw({1})) == std::vector<SwitchMode>{sw({0})});

    auto t2 = ModeTables::build(2);
    REQUIRE(t2.allowed_switches(sw({1, 0})) ==
            std::vector<SwitchMode>{sw({0, 0}), sw({0, 1}), sw({1, 1})});
}

TEST_CASE("post-switch mode is the componentwise minimum") {
    REQUIRE(post_switch_mode(op({1, -1}), sw({0, 1})) == op({0, -1}));
    REQUIRE(post_switch_mode(op({0}), sw({1})) == op({0}));
    REQUIRE(post_switch_mode(op({-1, 1}), sw({1, 1})) == op({-1, 1}));
    REQUIRE_THROWS_AS(post_switch_mode(op({1}), sw({1, 1})), std::invalid_argument);
}

TEST_CASE("plant count is capped") {
    REQUIRE_THROWS_WITH(ModeTables::build(0), Catch::Matchers::ContainsSubstring("6^n"));
    REQUIRE_THROWS_WITH(ModeTables::build(9), Catch::Matchers::ContainsSubstring("6^n"));
    REQUIRE_NOTHROW(ModeTables::build(8));
}

TEST_CASE("mode-table invariants hold exhaustively for n in 1..3") {
    for (int n = 1; n <= 3; ++n) {
        auto t = ModeTables::build(n);

        size_t two_n = size_t(1) << n;
        REQUIRE(t.switch_modes().size() == two_n);
        for (size_t i = 1; i < t.switch_modes().size(); ++i)
            REQUIRE(t.switch_code(t.switch_modes()[i]) > t.switch_code(t.switch_modes()[i - 1]));

        for (size_t p = 0; p < t.pairs().size(); ++p) {
            const auto& pair = t.pairs()[p];
            REQUIRE(leq(pair.a, pair.b));

            const auto& trans = t.transitions(int(p));
            bool self_found = false;
            for (const auto& a2 : trans) {
                if (a2 == pair.a) self_found = true;
                REQUIRE(leq(a2, pair.b));
                for (int i = 0; i < n; ++i) {
                    REQUIRE(std::abs(int(a2.comps[i])) >= std::abs(int(pair.a.comps[i])));
                    if (pair.a.comps[i] == -1 || pair.a.comps[i] == -int(pair.b.bits[i]))
                        REQUIRE(a2.comps[i] == pair.a.comps[i]);
                    // failure permanence
                    if (pair.a.comps[i] == -1) REQUIRE(a2.comps[i] == -1);
                }
                // DAG: strict potential increase off the self-loop
                if (!(a2 == pair.a)) REQUIRE(potential(a2) > potential(pair.a));
            }
            REQUIRE(self_found);

            if (t.is_absorbing(pair.a, pair.b)) {
                REQUIRE(trans.size() == 1);
                REQUIRE(trans[0] == pair.a);
            }
        }

        // absorbing set is the product over plants of {-b_i} ∪ {-1}
        for (const auto& b : t.switch_modes()) {
            size_t expect = 1;
            for (int i = 0; i < n; ++i) expect *= (b.bits[i] == 1 ? 1 : 2);
            REQUIRE(t.absorbing(b).size() == expect);
            for (const auto& a : t.absorbing(b))
                for (int i = 0; i < n; ++i)
                    REQUIRE((a.comps[i] == -1 || a.comps[i] == -int(b.bits[i])));
        }

        // post_switch_mode(a, beta) <= beta for every feasible input
        for (const auto& pair : t.pairs())
            for (const auto& beta : t.switch_modes())
                REQUIRE(leq(post_switch_mode(pair.a, beta), beta));
    }
}
