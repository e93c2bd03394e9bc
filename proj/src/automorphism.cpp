#include "cantor/automorphism.hpp"

#include <algorithm>
#include <gmpxx.h>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace cantor {

namespace {

constexpr std::uint32_t kRootTag = 0x726f6f74u;
constexpr std::uint32_t kChildTag = 0x6368696cu;
constexpr std::uint32_t kPermTag = 0x7065726du;

std::uint64_t checked_pow(std::uint64_t base, int exp) {
    std::uint64_t out = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(out, base, &out)) throw std::overflow_error("node count exceeds 64 bits");
    }
    return out;
}

}  // namespace

Perm identity_perm(int m) {
    Perm p{};
    for (int d = 0; d < kMaxArity; ++d) p[d] = static_cast<std::uint8_t>(d);
    (void)m;
    return p;
}

Perm invert(const Perm& perm, int m) {
    Perm inv = identity_perm(m);
    for (int d = 0; d < m; ++d) inv[perm[d]] = static_cast<std::uint8_t>(d);
    return inv;
}

bool is_bijection(const Perm& perm, int m) {
    std::array<bool, kMaxArity> hit{};
    for (int d = 0; d < m; ++d) {
        if (perm[d] >= m || hit[perm[d]]) return false;
        hit[perm[d]] = true;
    }
    return true;
}

std::vector<Perm> all_perms(int m) {
    std::vector<Perm> out;
    Perm p = identity_perm(m);
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.begin() + m));
    return out;
}

LazyAutomorphism::LazyAutomorphism(int m, std::uint64_t seed)
    : m_(m), seed_(seed), key_(Philox4x32::key_from_seed(seed)) {
    if (m < 2 || m > kMaxArity) throw std::invalid_argument("LazyAutomorphism: arity out of range");
}

LazyAutomorphism::Cursor LazyAutomorphism::root() const {
    return {Philox4x32::apply({kRootTag, 0, 0, 0}, key_)};
}

LazyAutomorphism::Cursor LazyAutomorphism::child(const Cursor& c, std::uint8_t d) const {
    return {Philox4x32::apply(c.label, {key_[0] ^ kChildTag, key_[1] ^ (0x100u + d)})};
}

Perm LazyAutomorphism::perm(const Cursor& c) const {
    PhiloxStream stream({key_[0] ^ kPermTag, key_[1]}, c.label);
    Perm p = identity_perm(m_);
    for (int i = m_ - 1; i > 0; --i) {
        const auto j = stream.uniform_below(static_cast<std::uint32_t>(i) + 1);
        std::swap(p[i], p[j]);
    }
    return p;
}

ExplicitAutomorphism::ExplicitAutomorphism(int m, int depth) : m_(m), depth_(depth) {
    if (m < 2 || m > kMaxArity) throw std::invalid_argument("ExplicitAutomorphism: arity out of range");
    if (depth < 0) throw std::invalid_argument("ExplicitAutomorphism: negative depth");
    std::size_t total = 0;
    table_.resize(static_cast<std::size_t>(depth));
    for (int k = 0; k < depth; ++k) {
        const std::uint64_t n = checked_pow(static_cast<std::uint64_t>(m), k);
        total += n;
        if (total > kMaxNodes) {
            throw std::invalid_argument("ExplicitAutomorphism: depth " + std::to_string(depth) +
                                        " needs more than " + std::to_string(kMaxNodes) + " node tables");
        }
        table_[static_cast<std::size_t>(k)].assign(n, identity_perm(m));
    }
}

void ExplicitAutomorphism::set(int level, std::uint64_t index, const Perm& perm) {
    if (level < 0 || level >= depth_) throw std::invalid_argument("ExplicitAutomorphism::set: level out of range");
    if (!is_bijection(perm, m_)) throw std::invalid_argument("ExplicitAutomorphism::set: not a bijection");
    table_[static_cast<std::size_t>(level)].at(index) = perm;
}

void ExplicitAutomorphism::set(const Word& node, const Perm& perm) {
    set(static_cast<int>(node.size()), word_index(node, m_), perm);
}

const Perm& ExplicitAutomorphism::get(const Word& node) const {
    if (static_cast<int>(node.size()) >= depth_) throw std::invalid_argument("ExplicitAutomorphism::get: beyond depth");
    return table_[node.size()].at(word_index(node, m_));
}

void ExplicitAutomorphism::write(std::ostream& out) const {
    out << "m=" << m_ << " depth=" << depth_ << '\n';
    for (int k = 0; k < depth_; ++k) {
        const auto& level = table_[static_cast<std::size_t>(k)];
        for (std::uint64_t i = 0; i < level.size(); ++i) {
            const Word w = word_from_index(i, k, m_);
            out << "node=" << (w.empty() ? "ROOT" : w.to_string()) << " perm=";
            for (int d = 0; d < m_; ++d) out << (d ? "," : "") << static_cast<int>(level[i][d]) + 1;
            out << '\n';
        }
    }
}

ExplicitAutomorphism ExplicitAutomorphism::read(std::istream& in) {
    struct Entry {
        std::string node;
        std::vector<int> perm;
    };
    std::vector<Entry> entries;
    std::optional<int> m_hdr;
    std::optional<int> depth_hdr;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a)) continue;
        ls >> b;
        if (a.rfind("m=", 0) == 0 && b.rfind("depth=", 0) == 0) {
            m_hdr = std::stoi(a.substr(2));
            depth_hdr = std::stoi(b.substr(6));
            continue;
        }
        if (a.rfind("node=", 0) != 0 || b.rfind("perm=", 0) != 0) {
            throw std::invalid_argument("automorphism text: bad line '" + line + "'");
        }
        Entry e{a.substr(5), {}};
        std::istringstream ps(b.substr(5));
        std::string tok;
        while (std::getline(ps, tok, ',')) e.perm.push_back(std::stoi(tok));
        entries.push_back(std::move(e));
    }
    const int m = m_hdr ? *m_hdr : (entries.empty() ? 2 : static_cast<int>(entries.front().perm.size()));
    int depth = depth_hdr.value_or(0);
    std::vector<std::pair<Word, Perm>> parsed;
    for (const auto& e : entries) {
        if (static_cast<int>(e.perm.size()) != m) throw std::invalid_argument("automorphism text: perm length != m");
        Perm p = identity_perm(m);
        for (int d = 0; d < m; ++d) {
            if (e.perm[static_cast<std::size_t>(d)] < 1 || e.perm[static_cast<std::size_t>(d)] > m) {
                throw std::invalid_argument("automorphism text: perm entry out of range");
            }
            p[d] = static_cast<std::uint8_t>(e.perm[static_cast<std::size_t>(d)] - 1);
        }
        Word w = Word::parse(e.node, m);
        if (!depth_hdr) depth = std::max(depth, static_cast<int>(w.size()) + 1);
        parsed.emplace_back(std::move(w), p);
    }
    ExplicitAutomorphism out(m, depth);
    for (const auto& [w, p] : parsed) out.set(w, p);
    return out;
}

Automorphism::Automorphism(const SpaceParams& p, Source source) : params_(p), source_(std::move(source)) {
    const int m = std::visit([](const auto& s) { return s.m(); }, source_);
    if (m != p.m()) throw std::invalid_argument("Automorphism: source arity does not match space");
}

Automorphism Automorphism::identity(const SpaceParams& p) {
    return Automorphism(p, IdentityAutomorphism(p.m()));
}

int Automorphism::depth_bound() const {
    return visit([](const auto& s) { return s.depth_bound(); });
}

Word Automorphism::apply(const Word& w) const {
    return visit([&](const auto& s) { return apply_word(s, w); });
}

Word Automorphism::apply_inverse(const Word& w) const {
    return visit([&](const auto& s) { return apply_inverse_word(s, w); });
}

Automorphism sample_automorphism(const SpaceParams& p, std::uint64_t seed) {
    return Automorphism(p, LazyAutomorphism(p.m(), seed));
}

EnumerationCapExceeded::EnumerationCapExceeded(std::string required, std::uint64_t cap)
    : std::runtime_error("enumeration needs " + required + " assignments, above the cap of " +
                         std::to_string(cap)),
      required_(std::move(required)) {}

namespace {

mpz_class factorial(int m) {
    mpz_class f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

}  // namespace

std::string truncated_group_order(int m, int depth) {
    mpz_class nodes = 0;
    mpz_class level = 1;
    for (int k = 0; k < depth; ++k) {
        nodes += level;
        level *= m;
    }
    if (!nodes.fits_ulong_p()) return "(m!)^" + nodes.get_str();
    mpz_class order;
    mpz_pow_ui(order.get_mpz_t(), factorial(m).get_mpz_t(), nodes.get_ui());
    return order.get_str();
}

void TruncatedGroupEnumerator::init_count(std::uint64_t cap) {
    mpz_class total;
    mpz_pow_ui(total.get_mpz_t(), factorial(m_).get_mpz_t(), slots_.size());
    if (total > mpz_class(std::to_string(cap))) throw EnumerationCapExceeded(total.get_str(), cap);
    count_ = std::stoull(total.get_str());
    odometer_.assign(slots_.size(), 0);
    for (const auto& s : slots_) current_.set(s.level, s.index, perms_[0]);
}

TruncatedGroupEnumerator::TruncatedGroupEnumerator(const SpaceParams& p, int depth, std::uint64_t cap)
    : m_(p.m()), current_(p.m(), 0), perms_(all_perms(p.m())) {
    if (depth < 0) throw std::invalid_argument("enumerate_truncations: negative depth");
    // Refuse before allocating tables for absurd depths.
    std::uint64_t nodes = 0;
    std::uint64_t level = 1;
    for (int k = 0; k < depth; ++k) {
        nodes += level;
        if (nodes > 64 || __builtin_mul_overflow(level, static_cast<std::uint64_t>(m_), &level)) {
            throw EnumerationCapExceeded(truncated_group_order(m_, depth), cap);
        }
    }
    current_ = ExplicitAutomorphism(m_, depth);
    level = 1;
    for (int k = 0; k < depth; ++k) {
        for (std::uint64_t i = 0; i < level; ++i) slots_.push_back({k, i});
        level *= static_cast<std::uint64_t>(m_);
    }
    init_count(cap);
}

TruncatedGroupEnumerator::TruncatedGroupEnumerator(ExplicitAutomorphism base, int level, const Word& within,
                                                   std::uint64_t cap)
    : m_(base.m()), current_(std::move(base)), perms_(all_perms(m_)) {
    if (level < 0 || level >= current_.depth_bound()) {
        throw std::invalid_argument("TruncatedGroupEnumerator: level outside the base automorphism");
    }
    if (static_cast<int>(within.size()) > level) {
        throw std::invalid_argument("TruncatedGroupEnumerator: prefix deeper than the enumerated level");
    }
    const int free_levels = level - static_cast<int>(within.size());
    std::uint64_t span = 1;
    for (int k = 0; k < free_levels; ++k) {
        if (span > 64) throw EnumerationCapExceeded("more than (m!)^64", cap);
        span *= static_cast<std::uint64_t>(m_);
    }
    const std::uint64_t first = word_index(within, m_) * span;
    for (std::uint64_t i = 0; i < span; ++i) slots_.push_back({level, first + i});
    init_count(cap);
}

bool TruncatedGroupEnumerator::next() {
    const auto radix = static_cast<std::uint32_t>(perms_.size());
    for (std::size_t i = slots_.size(); i-- > 0;) {
        const auto& s = slots_[i];
        if (++odometer_[i] < radix) {
            current_.set(s.level, s.index, perms_[odometer_[i]]);
            return true;
        }
        odometer_[i] = 0;
        current_.set(s.level, s.index, perms_[0]);
    }
    return false;
}

}  // namespace cantor
