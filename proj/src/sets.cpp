#include "cantor/sets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cantor/box_dim.hpp"
#include "cantor/philox.hpp"

namespace cantor {

namespace {

constexpr std::size_t kMaxExplicitNodes = std::size_t{1} << 25;

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// "key=value" pairs after the colon.
std::vector<std::pair<std::string, std::string>> parse_kv(std::string_view body) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& item : split(body, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("set spec: expected key=value, got '" + item + "'");
        out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("set spec: bad number '" + s + "'");
    return v;
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Grows a Moran tree below `start` so that level k holds counts[k] nodes.
// Parents split the level count as evenly as possible.
void grow_counts(TrieBuilder& b, int m, int start_level, std::uint32_t start, const std::vector<std::uint64_t>& counts,
                 int depth, std::optional<std::uint64_t> seed) {
    std::vector<std::uint32_t> frontier{start};
    // Mass of each frontier node under equal splitting; extra children go to
    // the heaviest parents so the natural measure stays close to uniform.
    std::vector<double> weight{1.0};
    std::optional<PhiloxStream> rng;
    if (seed) rng.emplace(Philox4x32::key_from_seed(*seed), Philox4x32::Counter{0x6d6f7261u, 0, 0, 0});
    std::size_t total = 0;
    for (int k = start_level; k < depth; ++k) {
        const std::uint64_t target = counts[static_cast<std::size_t>(k) + 1];
        const std::uint64_t parents = frontier.size();
        const std::uint64_t base = target / parents;
        const std::uint64_t extra = target % parents;
        // Parents in extra-child order: heaviest first, ties by position
        // (or shuffled when seeded). rank[q] is the position of parent q.
        std::vector<std::uint64_t> order(parents);
        std::iota(order.begin(), order.end(), 0);
        if (rng) {
            for (std::uint64_t i = parents; i-- > 1;) {
                std::swap(order[i], order[rng->uniform_below(static_cast<std::uint32_t>(i + 1))]);
            }
        }
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return weight[x] > weight[y]; });
        std::vector<std::uint64_t> rank(parents);
        for (std::uint64_t i = 0; i < parents; ++i) rank[order[i]] = i;
        total += target;
        if (total > kMaxExplicitNodes) throw std::invalid_argument("Moran construction exceeds the node budget");
        std::vector<std::uint32_t> next;
        std::vector<double> next_weight;
        next.reserve(target);
        next_weight.reserve(target);
        for (std::uint64_t q = 0; q < parents; ++q) {
            const auto c = static_cast<int>(base + (rank[q] < extra ? 1 : 0));
            std::vector<std::uint8_t> digits(static_cast<std::size_t>(m));
            std::iota(digits.begin(), digits.end(), 0);
            if (rng) {
                for (int i = m - 1; i > 0; --i) {
                    std::swap(digits[static_cast<std::size_t>(i)],
                              digits[rng->uniform_below(static_cast<std::uint32_t>(i) + 1)]);
                }
                std::sort(digits.begin(), digits.begin() + c);
            }
            for (int j = 0; j < c; ++j) {
                next.push_back(b.add_child(k, frontier[q], digits[static_cast<std::size_t>(j)]));
                next_weight.push_back(weight[q] / c);
            }
        }
        frontier = std::move(next);
        weight = std::move(next_weight);
    }
}

// Counts for a component started as a single cylinder at `start_level`:
// round(r^{-(k-start)t}) clamped to the branching limits and to r^{-k cap}.
std::vector<std::uint64_t> relative_counts(double t, double cap, const SpaceParams& p, int start_level, int depth) {
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(depth) + 1, 0);
    counts[static_cast<std::size_t>(start_level)] = 1;
    const auto m = static_cast<std::uint64_t>(p.m());
    for (int k = start_level + 1; k <= depth; ++k) {
        const std::uint64_t prev = counts[static_cast<std::size_t>(k) - 1];
        const double target = std::round(std::pow(p.r(), -(k - start_level) * t));
        std::uint64_t n = target >= 1.8e19 ? m * prev : static_cast<std::uint64_t>(target);
        n = std::clamp(n, prev, m * prev);
        if (cap > 0.0) {
            const double bound = std::floor(std::pow(p.r(), -k * cap) * (1.0 + 1e-12));
            if (bound < 1.8e19) n = std::min(n, std::max(prev, static_cast<std::uint64_t>(bound)));
        }
        counts[static_cast<std::size_t>(k)] = n;
    }
    return counts;
}

CylinderTrie digits_trie(const DigitRestriction& spec, int m, int depth) {
    if (spec.digits.empty()) throw std::invalid_argument("digit restriction needs at least one digit");
    for (auto d : spec.digits) {
        if (d >= m) throw std::invalid_argument("digit restriction: digit " + std::to_string(d + 1) + " exceeds m");
    }
    TrieBuilder b(m, depth);
    std::uint32_t node = b.add_root();
    for (int k = 0; k < depth; ++k) {
        const std::uint32_t next = b.add_child(k, node, spec.digits.front());
        for (std::size_t i = 1; i < spec.digits.size(); ++i) b.link(k, node, spec.digits[i], next);
        node = next;
    }
    return std::move(b).finish().trie;
}

void check_depth(int depth) {
    if (depth < 1) throw std::invalid_argument("build_set: depth must be >= 1");
}

}  // namespace

SetSpec parse_set_spec(std::string_view text) {
    const auto colon = text.find(':');
    const std::string kind(text.substr(0, colon));
    const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (kind == "full") {
        if (!body.empty()) throw std::invalid_argument("set spec 'full' takes no arguments");
        return FullSet{};
    }
    if (kind == "digits") {
        DigitRestriction spec;
        for (const auto& tok : split(body, ',')) {
            const int d = std::stoi(tok);
            if (d < 1 || d > kMaxArity) throw std::invalid_argument("digits: digit out of range");
            spec.digits.push_back(static_cast<std::uint8_t>(d - 1));
        }
        std::sort(spec.digits.begin(), spec.digits.end());
        if (std::adjacent_find(spec.digits.begin(), spec.digits.end()) != spec.digits.end()) {
            throw std::invalid_argument("digits: repeated digit");
        }
        return spec;
    }
    if (kind == "moran") {
        MoranSet spec;
        bool has_t = false;
        for (const auto& [k, v] : parse_kv(body)) {
            if (k == "t") {
                spec.t = parse_double(v);
                has_t = true;
            } else if (k == "seed") {
                spec.placement_seed = std::stoull(v);
            } else {
                throw std::invalid_argument("moran: unknown key '" + k + "'");
            }
        }
        if (!has_t) throw std::invalid_argument("moran: missing t=");
        return spec;
    }
    if (kind == "union") {
        UnionExample spec;
        bool has_alpha = false;
        bool has_imax = false;
        for (const auto& [k, v] : parse_kv(body)) {
            if (k == "alpha") {
                spec.alpha = parse_double(v);
                has_alpha = true;
            } else if (k == "imax") {
                spec.imax = std::stoi(v);
                has_imax = true;
            } else {
                throw std::invalid_argument("union: unknown key '" + k + "'");
            }
        }
        if (!has_alpha || !has_imax) throw std::invalid_argument("union: needs alpha= and imax=");
        return spec;
    }
    if (kind == "file") {
        const std::string path(body);
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("file: cannot open '" + path + "'");
        return ExplicitSet{std::make_shared<const CylinderTrie>(CylinderTrie::read(in)), path};
    }
    throw std::invalid_argument("unknown set spec '" + std::string(text) + "'");
}

std::string to_string(const SetSpec& spec) {
    struct Printer {
        std::string operator()(const FullSet&) const { return "full"; }
        std::string operator()(const DigitRestriction& s) const {
            std::string out = "digits:";
            for (std::size_t i = 0; i < s.digits.size(); ++i) {
                out += (i ? "," : "") + std::to_string(s.digits[i] + 1);
            }
            return out;
        }
        std::string operator()(const MoranSet& s) const {
            std::string out = "moran:t=" + format_double(s.t);
            if (s.placement_seed) out += ",seed=" + std::to_string(*s.placement_seed);
            return out;
        }
        std::string operator()(const UnionExample& s) const {
            return "union:alpha=" + format_double(s.alpha) + ",imax=" + std::to_string(s.imax);
        }
        std::string operator()(const ExplicitSet& s) const { return "file:" + s.origin; }
    };
    return std::visit(Printer{}, spec);
}

std::vector<std::uint64_t> moran_counts(double t, const SpaceParams& p, int depth) {
    if (!(t > 0.0) || t > p.ambient_dim() * (1.0 + 1e-12)) {
        throw std::invalid_argument("Moran target dimension must lie in (0, ambient_dim]");
    }
    return relative_counts(t, 0.0, p, 0, depth);
}

int union_first_index(double alpha) {
    return static_cast<int>(std::floor(1.0 / alpha)) + 1;
}

std::vector<UnionComponent> build_union_components(const UnionExample& spec, const SpaceParams& p, int depth) {
    check_depth(depth);
    if (!(spec.alpha > 0.0) || spec.alpha >= p.ambient_dim()) {
        throw std::invalid_argument("union: alpha must lie in (0, ambient_dim)");
    }
    const int first = union_first_index(spec.alpha);
    const int last = std::min(spec.imax, depth);
    if (last < first) {
        throw std::invalid_argument("union: no component index in " + std::to_string(first) + ".." +
                                    std::to_string(std::min(spec.imax, depth)));
    }
    std::vector<UnionComponent> out;
    for (int i = first; i <= last; ++i) {
        std::vector<std::uint8_t> digits(static_cast<std::size_t>(i - 1), 0);
        digits.push_back(1);
        Word cylinder(std::move(digits));
        const double dimension = spec.alpha - 1.0 / i;
        const auto counts = relative_counts(dimension, spec.alpha, p, i, depth);
        TrieBuilder b(p.m(), depth);
        std::uint32_t node = b.add_root();
        for (int k = 0; k < i; ++k) node = b.add_child(k, node, cylinder[static_cast<std::size_t>(k)]);
        grow_counts(b, p.m(), i, node, counts, depth, std::nullopt);
        out.push_back(UnionComponent{i, std::move(cylinder), dimension, std::move(b).finish().trie});
    }
    return out;
}

CylinderTrie build_set(const SetSpec& spec, const SpaceParams& p, int depth) {
    check_depth(depth);
    struct Builder {
        const SpaceParams& p;
        int depth;

        CylinderTrie operator()(const FullSet&) const { return CylinderTrie::full(p.m(), depth); }
        CylinderTrie operator()(const DigitRestriction& s) const { return digits_trie(s, p.m(), depth); }
        CylinderTrie operator()(const MoranSet& s) const {
            const auto counts = moran_counts(s.t, p, depth);
            TrieBuilder b(p.m(), depth);
            grow_counts(b, p.m(), 0, b.add_root(), counts, depth, s.placement_seed);
            return std::move(b).finish().trie;
        }
        CylinderTrie operator()(const UnionExample& s) const {
            const auto components = build_union_components(s, p, depth);
            TrieBuilder b(p.m(), depth);
            const std::uint32_t root = b.add_root();
            // chain[j] is the node for the word 1^j.
            std::vector<std::uint32_t> chain{root};
            for (const auto& c : components) {
                while (static_cast<int>(chain.size()) < c.index) {
                    chain.push_back(b.add_child(static_cast<int>(chain.size()) - 1, chain.back(), 0));
                }
                // Copy the component's subtree below I_i.
                std::uint32_t src = 0;
                for (int k = 0; k < c.index; ++k) src = c.trie.node(k, src).child[c.cylinder[static_cast<std::size_t>(k)]];
                const std::uint32_t dst = b.add_child(c.index - 1, chain[static_cast<std::size_t>(c.index) - 1], 1);
                auto copy = [&](auto&& self, int level, std::uint32_t from, std::uint32_t to) -> void {
                    if (level == depth) return;
                    const auto& n = c.trie.node(level, from);
                    for (int d = 0; d < p.m(); ++d) {
                        if (n.child[d] == kNoNode) continue;
                        self(self, level + 1, n.child[d], b.add_child(level, to, static_cast<std::uint8_t>(d)));
                    }
                };
                copy(copy, c.index, src, dst);
            }
            return std::move(b).finish().trie;
        }
        CylinderTrie operator()(const ExplicitSet& s) const {
            if (s.trie->m() != p.m()) throw std::invalid_argument("explicit set: arity does not match m");
            if (s.trie->depth() < depth) {
                throw std::invalid_argument("explicit set has depth " + std::to_string(s.trie->depth()) +
                                            ", requested " + std::to_string(depth));
            }
            return truncate(*s.trie, depth);
        }
    };
    return std::visit(Builder{p, depth}, spec);
}

double nominal_dimension(const SetSpec& spec, const SpaceParams& p) {
    struct Dim {
        const SpaceParams& p;
        double operator()(const FullSet&) const { return p.ambient_dim(); }
        double operator()(const DigitRestriction& s) const {
            return std::log(static_cast<double>(s.digits.size())) / -std::log(p.r());
        }
        double operator()(const MoranSet& s) const { return s.t; }
        double operator()(const UnionExample& s) const {
            return s.alpha - 1.0 / std::max(s.imax, union_first_index(s.alpha));
        }
        double operator()(const ExplicitSet& s) const {
            if (s.trie->empty() || s.trie->depth() < 2) return 0.0;
            const auto counts = s.trie->cover_counts();
            return box_dim_estimate(counts, p, default_k_range(s.trie->depth())).slope;
        }
    };
    return std::visit(Dim{p}, spec);
}

CylinderTrie truncate(const CylinderTrie& t, int depth) {
    if (depth > t.depth()) throw std::invalid_argument("truncate: depth exceeds trie depth");
    if (depth == t.depth()) return t;
    TrieBuilder b(t.m(), depth);
    if (t.empty()) return std::move(b).finish().trie;
    b.add_root();
    // Shared children stay shared.
    std::vector<std::vector<std::uint32_t>> idx(static_cast<std::size_t>(depth) + 1);
    idx[0] = {0};
    for (int k = 0; k < depth; ++k) {
        const auto next_size = t.level(k + 1).size();
        idx[static_cast<std::size_t>(k) + 1].assign(next_size, kNoNode);
        for (std::size_t i = 0; i < t.level(k).size(); ++i) {
            const auto& n = t.node(k, static_cast<std::uint32_t>(i));
            for (int d = 0; d < t.m(); ++d) {
                const auto c = n.child[d];
                if (c == kNoNode) continue;
                auto& slot = idx[static_cast<std::size_t>(k) + 1][c];
                if (slot == kNoNode) {
                    slot = b.add_child(k, idx[static_cast<std::size_t>(k)][i], static_cast<std::uint8_t>(d));
                } else {
                    b.link(k, idx[static_cast<std::size_t>(k)][i], static_cast<std::uint8_t>(d), slot);
                }
            }
        }
    }
    return std::move(b).finish().trie;
}

CylinderTrie random_trie(int m, int depth, std::uint64_t seed, double density) {
    check_depth(depth);
    if (m < 2 || m > kMaxArity) throw std::invalid_argument("random_trie: arity out of range");
    if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("random_trie: density outside [0, 1]");
    std::uint64_t total = 1;
    for (int k = 0; k < depth; ++k) {
        total *= static_cast<std::uint64_t>(m);
        if (total > (std::uint64_t{1} << 24)) throw std::invalid_argument("random_trie: too many leaves");
    }
    PhiloxStream rng(Philox4x32::key_from_seed(seed), Philox4x32::Counter{});
    std::vector<Word> leaves;
    for (std::uint64_t i = 0; i < total; ++i) {
        if (rng.uniform01() < density) leaves.push_back(word_from_index(i, depth, m));
    }
    return CylinderTrie::from_leaves(m, depth, leaves);
}

}  // namespace cantor
