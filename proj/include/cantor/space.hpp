#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cantor {

// Digits are written as single characters in every text format.
inline constexpr int kMaxArity = 9;

// Alphabet size and metric scale of the Cantor space C^m with d(x, y) = r^k.
class SpaceParams {
public:
    SpaceParams(int m, double r);

    int m() const { return m_; }
    double r() const { return r_; }

    // -log m / log r, the dimension of the whole space.
    double ambient_dim() const;

    // log m / log r; the additive term of the codimension formula.
    double codim_shift() const { return -ambient_dim(); }

    // r^(level * s)
    double scale_pow(int level, double s) const;

private:
    int m_;
    double r_;
};

// Finite digit string naming a cylinder. Stored 0-based; 1-based on the
// text boundary.
class Word {
public:
    Word() = default;
    explicit Word(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {}

    // Parses 1-based concatenated digits ("122"). "ROOT" and "" give the
    // empty word.
    static Word parse(std::string_view text, int m);

    // 1-based concatenated digits; the empty word prints as "".
    std::string to_string() const;

    std::size_t size() const { return digits_.size(); }
    bool empty() const { return digits_.empty(); }
    std::uint8_t operator[](std::size_t i) const { return digits_[i]; }
    std::uint8_t& operator[](std::size_t i) { return digits_[i]; }
    const std::vector<std::uint8_t>& digits() const { return digits_; }

    void push_back(std::uint8_t d) { digits_.push_back(d); }
    void pop_back() { digits_.pop_back(); }
    Word prefix(std::size_t len) const;
    Word child(std::uint8_t d) const;

    auto operator<=>(const Word&) const = default;

private:
    std::vector<std::uint8_t> digits_;
};

// Lexicographic rank of the word among all words of its length.
std::uint64_t word_index(const Word& w, int m);
Word word_from_index(std::uint64_t index, int length, int m);

struct Distance {
    double value = 0.0;
    // Equal truncated words: the points agree to the working depth, so value
    // is r^L, an upper bound on the true distance.
    bool indistinguishable = false;
};

Distance metric_distance(const Word& x, const Word& y, const SpaceParams& p);

// Longest common prefix, x ^ y.
Word common_ancestor(const Word& x, const Word& y);

}  // namespace cantor
