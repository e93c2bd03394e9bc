#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "cantor/automorphism.hpp"
#include "cantor/rational.hpp"

using namespace cantor;

namespace {

Perm perm_from(std::initializer_list<int> one_based) {
    Perm p = identity_perm(static_cast<int>(one_based.size()));
    std::size_t i = 0;
    for (int v : one_based) p[i++] = static_cast<std::uint8_t>(v - 1);
    return p;
}

// Two-level automorphism with a hand-checked action.
ExplicitAutomorphism two_level_example() {
    ExplicitAutomorphism a(3, 2);
    a.set(Word{}, perm_from({1, 3, 2}));
    a.set(Word::parse("1", 3), perm_from({3, 2, 1}));
    a.set(Word::parse("2", 3), perm_from({3, 1, 2}));
    a.set(Word::parse("3", 3), perm_from({1, 2, 3}));
    return a;
}

Word random_word(std::mt19937_64& rng, int m, int len) {
    std::vector<std::uint8_t> d(static_cast<std::size_t>(len));
    for (auto& x : d) x = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(m));
    return Word(std::move(d));
}

std::uint64_t ipow(std::uint64_t b, int e) {
    std::uint64_t out = 1;
    while (e-- > 0) out *= b;
    return out;
}

// The action on U_k as the list of image indices.
template <class Source>
std::vector<std::uint64_t> action(const Source& src, int k, int m) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < ipow(static_cast<std::uint64_t>(m), k); ++i) {
        out.push_back(word_index(apply_word(src, word_from_index(i, k, m)), m));
    }
    return out;
}

}  // namespace

TEST_SUITE("automorphism") {
    TEST_CASE("hand-checked two-level example") {
        const auto a = two_level_example();
        CHECK(apply_word(a, Word::parse("21", 3)).to_string() == "33");
        CHECK(apply_inverse_word(a, Word::parse("33", 3)).to_string() == "21");
        // The full picture: each original leaf and where it lands.
        const char* expected[][2] = {{"11", "13"}, {"12", "12"}, {"13", "11"}, {"21", "33"}, {"22", "31"},
                                     {"23", "32"}, {"31", "21"}, {"32", "22"}, {"33", "23"}};
        for (const auto& [from, to] : expected) CHECK(apply_word(a, Word::parse(from, 3)).to_string() == to);
    }

    TEST_CASE("identity") {
        const SpaceParams p(3, 1.0 / 3.0);
        const auto id = Automorphism::identity(p);
        CHECK(id.apply(Word::parse("123", 3)).to_string() == "123");
        CHECK(id.apply_inverse(Word::parse("231", 3)).to_string() == "231");
    }

    TEST_CASE("explicit depth bound") {
        const auto a = two_level_example();
        CHECK_THROWS_AS(apply_word(a, Word::parse("111", 3)), std::invalid_argument);
        CHECK_THROWS_AS(a.get(Word::parse("11", 3)), std::invalid_argument);
        ExplicitAutomorphism b(3, 2);
        CHECK_THROWS_AS(b.set(Word{}, perm_from({1, 1, 2})), std::invalid_argument);
    }

    TEST_CASE("lazy permutations are pure functions of seed and node") {
        const LazyAutomorphism a(4, 99);
        const auto table = ExplicitAutomorphism::tabulate(a, 3);
        // Query in a shuffled order through a fresh instance.
        std::vector<Word> nodes;
        for (int k = 0; k < 3; ++k) {
            for (std::uint64_t i = 0; i < ipow(4, k); ++i) nodes.push_back(word_from_index(i, k, 4));
        }
        std::mt19937_64 rng(5);
        std::shuffle(nodes.begin(), nodes.end(), rng);
        const LazyAutomorphism b(4, 99);
        for (const auto& w : nodes) {
            auto c = b.root();
            for (auto d : w.digits()) c = b.child(c, d);
            REQUIRE(b.perm(c) == table.get(w));
            REQUIRE(is_bijection(b.perm(c), 4));
        }
    }

    TEST_CASE("isometry, bijectivity and inverse law for sampled automorphisms") {
        std::mt19937_64 rng(17);
        for (int m : {2, 3, 5}) {
            const SpaceParams p(m, 0.4);
            for (int t = 0; t < 20; ++t) {
                const auto sigma = sample_automorphism(p, rng());
                for (int k = 1; k <= 4; ++k) {
                    std::set<Word> images;
                    for (std::uint64_t i = 0; i < ipow(static_cast<std::uint64_t>(m), k); ++i) {
                        images.insert(sigma.apply(word_from_index(i, k, m)));
                    }
                    REQUIRE(images.size() == ipow(static_cast<std::uint64_t>(m), k));
                }
                for (int q = 0; q < 500; ++q) {
                    const int len = 1 + static_cast<int>(rng() % 12);
                    const Word x = random_word(rng, m, len);
                    const Word y = random_word(rng, m, len);
                    REQUIRE(metric_distance(sigma.apply(x), sigma.apply(y), p).value == metric_distance(x, y, p).value);
                }
            }
        }
        const SpaceParams p(3, 1.0 / 3.0);
        for (int t = 0; t < 100000; ++t) {
            const auto sigma = sample_automorphism(p, rng());
            const Word w = random_word(rng, 3, 1 + static_cast<int>(rng() % 10));
            REQUIRE(sigma.apply_inverse(sigma.apply(w)) == w);
            REQUIRE(sigma.apply(sigma.apply_inverse(w)) == w);
        }
    }

    TEST_CASE("hit frequency of a fixed target") {
        const SpaceParams p(3, 1.0 / 3.0);
        const Word i = Word::parse("11", 3);
        const Word j = Word::parse("23", 3);
        int hits = 0;
        const int n = 100000;
        for (int t = 0; t < n; ++t) hits += sample_automorphism(p, derive_seed(42, static_cast<std::uint64_t>(t))).apply(i) == j;
        CHECK(std::abs(hits / static_cast<double>(n) - 1.0 / 9.0) <= 0.005);
    }

    TEST_CASE("enumerator sizes and exhaustiveness") {
        const SpaceParams p2(2, 0.5);
        const SpaceParams p3(3, 1.0 / 3.0);
        CHECK(TruncatedGroupEnumerator(p2, 3).count() == 128);
        CHECK(TruncatedGroupEnumerator(p3, 1).count() == 6);
        CHECK(TruncatedGroupEnumerator(p2, 2).count() == 8);
        CHECK(truncated_group_order(2, 3) == "128");
        CHECK(truncated_group_order(3, 2) == "1296");
        CHECK(truncated_group_order(2, 10).size() > 300);
        try {
            TruncatedGroupEnumerator too_big(p2, 10);
            FAIL("expected a refusal");
        } catch (const EnumerationCapExceeded& e) {
            CHECK(e.required() == truncated_group_order(2, 10));
        }
        // The action on U_k determines the assignment, so distinct actions
        // mean each assignment appears once.
        for (auto [m, k] : {std::pair{2, 1}, std::pair{2, 2}, std::pair{2, 3}, std::pair{3, 1}, std::pair{3, 2}}) {
            TruncatedGroupEnumerator en(SpaceParams(m, 0.3), k);
            std::set<std::vector<std::uint64_t>> actions;
            std::uint64_t produced = 0;
            do {
                actions.insert(action(en.current(), k, m));
                ++produced;
            } while (en.next());
            CHECK(produced == en.count());
            CHECK(actions.size() == en.count());
        }
    }

    TEST_CASE("exact uniformity of sigma(I) over the truncated group") {
        for (int k = 1; k <= 3; ++k) {
            const int m = 2;
            const auto cells = ipow(2, k);
            TruncatedGroupEnumerator en(SpaceParams(m, 0.5), k);
            std::vector<std::uint64_t> hits(cells * cells, 0);
            do {
                const auto act = action(en.current(), k, m);
                for (std::uint64_t i = 0; i < cells; ++i) ++hits[i * cells + act[i]];
            } while (en.next());
            for (auto h : hits) {
                Rational freq(static_cast<unsigned long>(h), static_cast<unsigned long>(en.count()));
                freq.canonicalize();
                CHECK(freq == Rational(1, static_cast<unsigned long>(cells)));
            }
        }
    }

    TEST_CASE("conditional enumerator varies only the chosen nodes") {
        const auto base = ExplicitAutomorphism::tabulate(LazyAutomorphism(3, 8), 3);
        const Word within = Word::parse("2", 3);
        TruncatedGroupEnumerator en(base, 2, within);
        CHECK(en.count() == 216);
        do {
            for (std::uint64_t i = 0; i < 9; ++i) {
                const Word node = word_from_index(i, 2, 3);
                if (node[0] != 1) REQUIRE(en.current().get(node) == base.get(node));
            }
            REQUIRE(en.current().get(Word{}) == base.get(Word{}));
        } while (en.next());
    }

    TEST_CASE("explicit text format round trip") {
        const auto a = two_level_example();
        std::stringstream ss;
        a.write(ss);
        const auto text = ss.str();
        CHECK(text.find("node=ROOT perm=1,3,2") != std::string::npos);
        CHECK(text.find("node=2 perm=3,1,2") != std::string::npos);
        const auto b = ExplicitAutomorphism::read(ss);
        CHECK(apply_word(b, Word::parse("21", 3)).to_string() == "33");
        std::stringstream bad("m=3 depth=1\nnode=ROOT perm=1,1,2\n");
        CHECK_THROWS(ExplicitAutomorphism::read(bad));
    }
}
