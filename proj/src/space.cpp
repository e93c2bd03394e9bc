#include "cantor/space.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cantor {

SpaceParams::SpaceParams(int m, double r) : m_(m), r_(r) {
    if (m < 2 || m > kMaxArity) {
        throw std::invalid_argument("alphabet size m must be in 2.." + std::to_string(kMaxArity));
    }
    if (!(r > 0.0 && r < 1.0)) {
        throw std::invalid_argument("scale r must lie in (0, 1)");
    }
}

double SpaceParams::ambient_dim() const {
    return -std::log(static_cast<double>(m_)) / std::log(r_);
}

double SpaceParams::scale_pow(int level, double s) const {
    return std::pow(r_, static_cast<double>(level) * s);
}

Word Word::parse(std::string_view text, int m) {
    if (text == "ROOT") return Word{};
    std::vector<std::uint8_t> digits;
    digits.reserve(text.size());
    for (char c : text) {
        int d = c - '0';
        if (d < 1 || d > m) {
            throw std::invalid_argument("invalid digit '" + std::string(1, c) + "' for m=" +
                                        std::to_string(m));
        }
        digits.push_back(static_cast<std::uint8_t>(d - 1));
    }
    return Word(std::move(digits));
}

std::string Word::to_string() const {
    std::string out;
    out.reserve(digits_.size());
    for (auto d : digits_) out.push_back(static_cast<char>('1' + d));
    return out;
}

Word Word::prefix(std::size_t len) const {
    if (len > digits_.size()) throw std::invalid_argument("prefix longer than word");
    return Word({digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(len)});
}

Word Word::child(std::uint8_t d) const {
    Word w = *this;
    w.push_back(d);
    return w;
}

std::uint64_t word_index(const Word& w, int m) {
    std::uint64_t index = 0;
    const auto limit = std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(m);
    for (auto d : w.digits()) {
        if (index > limit) throw std::overflow_error("word index exceeds 64 bits");
        index = index * static_cast<std::uint64_t>(m) + d;
    }
    return index;
}

Word word_from_index(std::uint64_t index, int length, int m) {
    std::vector<std::uint8_t> digits(static_cast<std::size_t>(length));
    for (int i = length - 1; i >= 0; --i) {
        digits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % static_cast<std::uint64_t>(m));
        index /= static_cast<std::uint64_t>(m);
    }
    return Word(std::move(digits));
}

Distance metric_distance(const Word& x, const Word& y, const SpaceParams& p) {
    if (x.size() != y.size()) throw std::invalid_argument("metric_distance: length mismatch");
    const std::size_t k = common_ancestor(x, y).size();
    return {std::pow(p.r(), static_cast<double>(k)), k == x.size()};
}

Word common_ancestor(const Word& x, const Word& y) {
    if (x.size() != y.size()) throw std::invalid_argument("common_ancestor: length mismatch");
    std::size_t k = 0;
    while (k < x.size() && x[k] == y[k]) ++k;
    return x.prefix(k);
}

}  // namespace cantor
