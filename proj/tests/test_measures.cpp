#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "cantor/measures.hpp"
#include "cantor/sets.hpp"

using namespace cantor;

namespace {

// Leaf masses drawn from 1..5 on a random support, normalized to total 1.
MassTrie<Rational> random_rational_measure(int m, int depth, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto support = random_trie(m, depth, seed, 0.6);
    std::vector<std::pair<Word, Rational>> leaves;
    Rational total = 0;
    for (const auto& w : support.leaves()) {
        const Rational x(static_cast<long>(1 + rng() % 5));
        leaves.emplace_back(w, x);
        total += x;
    }
    for (auto& [w, x] : leaves) x /= total;
    return MassTrie<Rational>::from_leaf_masses(m, depth, leaves);
}

}  // namespace

TEST_SUITE("measures") {
    TEST_CASE("natural measure on the full set") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<Rational>(CylinderTrie::full(3, 6), p);
        for (int k = 0; k <= 6; ++k) {
            for (const auto& x : mu.level_mass(k)) {
                Rational expected(1);
                for (int i = 0; i < k; ++i) expected /= 3;
                REQUIRE(x == expected);
            }
        }
        CHECK(mu.is_additive());
        REQUIRE(mu.frostman());
        CHECK(mu.frostman()->exponent == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mu.frostman()->constant == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("natural measure on a digit restriction") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(DigitRestriction{{0, 1}}, p, 20), p);
        for (int k = 0; k <= 20; ++k) {
            for (const auto& x : mu.level_mass(k)) REQUIRE(x == std::ldexp(1.0, -k));
        }
        CHECK(mu.frostman()->exponent == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-12));
        CHECK(mu.frostman()->constant == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(mu.mass_of(Word::parse("3", 3)) == 0.0);
        CHECK(mu.mass_of(Word::parse("12", 3)) == 0.25);
    }

    TEST_CASE("natural measure on a Moran set") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(MoranSet{0.4, std::nullopt}, p, 20), p, 0.4);
        CHECK(mu.is_additive());
        CHECK(mu.total() == doctest::Approx(1.0));
        CHECK(mu.frostman()->exponent == 0.4);
        CHECK(mu.frostman()->constant <= 3.0);
    }

    TEST_CASE("leaf masses and integrity") {
        const std::vector<std::pair<Word, double>> leaves{{Word::parse("11", 2), 0.25}, {Word::parse("22", 2), 0.75}};
        const auto mu = MassTrie<double>::from_leaf_masses(2, 2, leaves);
        CHECK(mu.total() == 1.0);
        CHECK(mu.mass_of(Word::parse("1", 2)) == 0.25);
        std::stringstream ss;
        mu.write(ss);
        CHECK(ss.str() == "m=2 depth=2\n11 mass=0.25\n22 mass=0.75\n");
        const std::vector<std::pair<Word, double>> dup{{Word::parse("11", 2), 0.25}, {Word::parse("11", 2), 0.75}};
        CHECK_THROWS_AS(MassTrie<double>::from_leaf_masses(2, 2, dup), std::invalid_argument);
        // Break additivity by hand; the two leaves share one node.
        std::vector<std::vector<double>> bad{{1.0}, {0.5, 0.6}, {0.5}};
        const MassTrie<double> broken(CylinderTrie::from_leaves(2, 2, std::vector<Word>{Word::parse("11", 2),
                                                                                        Word::parse("22", 2)}),
                                      bad);
        CHECK_FALSE(broken.is_additive());
        CHECK_THROWS_AS(broken.check_additive(), IntegrityError);
    }

    TEST_CASE("tau on the full set is the measure of A") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(CylinderTrie::full(3, 8), p);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto sigma = sample_automorphism(p, seed);
            CHECK(tau(mu, mu, sigma, Word{}, 8) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(tau(mu, mu, sigma, Word::parse("21", 3), 6) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
        }
    }

    TEST_CASE("tau at the level of A") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(MoranSet{0.8, 3}, p, 8), p);
        const auto nu = natural_measure<double>(build_set(DigitRestriction{{0, 2}}, p, 8), p);
        std::mt19937_64 rng(9);
        for (int t = 0; t < 50; ++t) {
            const auto sigma = sample_automorphism(p, rng());
            const Word a = word_from_index(rng() % 27, 3, 3);
            const double expected = 27.0 * mu.mass_of(a) * nu.mass_of(sigma.apply_inverse(a));
            REQUIRE(tau(mu, nu, sigma, a, 3) == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    TEST_CASE("finite additivity and the surrogate measure") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(DigitRestriction{{0, 1}}, p, 10), p);
        const auto nu = natural_measure<double>(build_set(DigitRestriction{{1, 2}}, p, 10), p);
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto sigma = sample_automorphism(p, seed);
            const auto surrogate = tau_measure(mu, nu, sigma, 10);
            CHECK(surrogate.is_additive(1e-12));
            for (const char* a : {"ROOT", "1", "2", "12", "21"}) {
                const Word w = Word::parse(a, 3);
                double children = 0.0;
                for (std::uint8_t d = 0; d < 3; ++d) {
                    auto digits = w.digits();
                    digits.push_back(d);
                    children += tau(mu, nu, sigma, Word(digits), 10);
                }
                REQUIRE(tau(mu, nu, sigma, w, 10) == doctest::Approx(children).epsilon(1e-12));
                REQUIRE(surrogate.mass_of(w) == doctest::Approx(tau(mu, nu, sigma, w, 10)).epsilon(1e-12));
            }
            const auto traj = martingale_trajectory(mu, nu, sigma, Word::parse("1", 3), 10);
            REQUIRE(traj.size() == 10);
            for (int l = 1; l <= 10; ++l) {
                REQUIRE(traj[static_cast<std::size_t>(l - 1)] ==
                        doctest::Approx(tau(mu, nu, sigma, Word::parse("1", 3), l)).epsilon(1e-12));
            }
        }
    }

    TEST_CASE("support check with a perturbed control") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto e = build_set(DigitRestriction{{0, 1}}, p, 8);
        const auto f = build_set(DigitRestriction{{1, 2}}, p, 8);
        const auto mu = natural_measure<double>(e, p);
        const auto nu = natural_measure<double>(f, p);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto sigma = sample_automorphism(p, seed);
            CHECK(support_check(mu, nu, sigma, 8));
            const auto surrogate = tau_measure(mu, nu, sigma, 8);
            if (surrogate.empty()) continue;
            // Drop one supported leaf from E: the check must notice.
            auto leaves = e.leaves();
            const Word target = surrogate.trie().leaves().front();
            leaves.erase(std::find(leaves.begin(), leaves.end(), target));
            const auto smaller = CylinderTrie::from_leaves(3, 8, leaves);
            CHECK_FALSE(support_check(surrogate, smaller, f, sigma));
        }
    }

    TEST_CASE("exact martingale property over the truncated group") {
        const SpaceParams p(2, 0.5);
        for (std::uint64_t seed = 1; seed <= 4; ++seed) {
            const auto mu = random_rational_measure(2, 3, seed);
            const auto nu = random_rational_measure(2, 3, seed + 100);
            for (const char* a_text : {"ROOT", "1", "21"}) {
                const Word a = Word::parse(a_text, 2);
                // Group the 128 elements by their action on U_2; the level-2
                // permutations vary freely inside each group.
                std::map<std::vector<std::uint64_t>, std::pair<Rational, int>> groups;
                std::map<std::vector<std::uint64_t>, Rational> coarse;
                Rational grand = 0;
                TruncatedGroupEnumerator en(p, 3);
                do {
                    std::vector<std::uint64_t> key;
                    for (std::uint64_t i = 0; i < 4; ++i) {
                        key.push_back(word_index(apply_word(en.current(), word_from_index(i, 2, 2)), 2));
                    }
                    const Rational t3 = tau(mu, nu, en.current(), a, 3);
                    auto& g = groups[key];
                    g.first += t3;
                    ++g.second;
                    grand += t3;
                    if (a.size() <= 2) coarse[key] = tau(mu, nu, en.current(), a, 2);
                } while (en.next());
                grand /= 128;
                grand.canonicalize();
                CHECK(grand == mu.mass_of(a) * nu.total());
                if (a.size() <= 2) {
                    for (auto& [key, g] : groups) {
                        REQUIRE(g.second == 16);
                        Rational mean = g.first / 16;
                        mean.canonicalize();
                        REQUIRE(mean == coarse[key]);
                    }
                }
            }
        }
    }

    TEST_CASE("second moment bound constants") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(DigitRestriction{{0, 1}}, p, 12), p);
        const auto b = second_moment_bound(mu, mu, p, Word{});
        CHECK(b.gamma == doctest::Approx(2.0 * std::log(2.0) / std::log(3.0) - 1.0).epsilon(1e-12));
        CHECK(b.c1 == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(b.c0 == doctest::Approx(4.0).epsilon(1e-9));
        CHECK(b.value == doctest::Approx(4.0).epsilon(1e-9));
        const auto ba = second_moment_bound(mu, mu, p, Word::parse("1", 3));
        CHECK(ba.value == doctest::Approx(4.0 * 0.5 * 0.75).epsilon(1e-9));
        const auto rows = second_moment_stats(mu, mu, p, Word{}, 4, 8, 4000, 11, 2);
        for (const auto& row : rows) {
            CHECK(std::abs(row.mean - 1.0) <= 5.0 * row.mean_stderr);
            CHECK(row.m2 <= b.value);
            CHECK(row.bound_ratio == doctest::Approx(row.m2 / b.value));
        }
    }

    TEST_CASE("second moment refuses a nonpositive exponent sum") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto mu = natural_measure<double>(build_set(MoranSet{0.4, std::nullopt}, p, 12), p, 0.4);
        CHECK_THROWS_AS(second_moment_bound(mu, mu, p, Word{}), HypothesisError);
        CHECK_THROWS_AS(second_moment_stats(mu, mu, p, Word{}, 0, 4, 10, 1, 1), HypothesisError);
    }

    TEST_CASE("off-diagonal pair sums are dominated by the full square") {
        // m * sum_{i != j} c_i c_j <= (m - 1) * sum_{i,j} c_i c_j for c >= 0.
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int t = 0; t < 100000; ++t) {
            const int m = 2 + static_cast<int>(rng() % 8);
            std::vector<double> c(static_cast<std::size_t>(m));
            for (auto& x : c) x = u(rng) < 0.2 ? 0.0 : u(rng);
            double off = 0.0;
            double all = 0.0;
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    const double prod = c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(j)];
                    all += prod;
                    if (i != j) off += prod;
                }
            }
            REQUIRE(m * off <= (m - 1) * all * (1.0 + 1e-12) + 1e-300);
        }
    }
}
