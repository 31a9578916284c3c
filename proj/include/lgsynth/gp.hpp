#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace lgsynth::gp {

/// Constructor primitives. Series and Split take two construction actions; the
/// Add_* terminals each add one element and carry its sampled parameter value.
enum class Primitive : std::uint8_t { Series, Split, AddA, AddD, AddT };

constexpr bool is_function(Primitive p) noexcept { return p == Primitive::Series || p == Primitive::Split; }
constexpr std::size_t arity(Primitive p) noexcept { return is_function(p) ? 2 : 0; }

constexpr std::string_view to_string(Primitive p) noexcept {
    switch (p) {
    case Primitive::Series: return "Series";
    case Primitive::Split: return "Split";
    case Primitive::AddA: return "Add_A";
    case Primitive::AddD: return "Add_D";
    case Primitive::AddT: return "Add_T";
    }
    return "?";
}

inline constexpr std::array<Primitive, 2> function_set{Primitive::Series, Primitive::Split};
inline constexpr std::array<Primitive, 3> terminal_set{Primitive::AddA, Primitive::AddD, Primitive::AddT};

struct Node {
    Primitive op = Primitive::AddD;
    double value = 0.0;  // component value, terminals only

    friend bool operator==(const Node&, const Node&) = default;
};

/// Program tree stored in prefix order; a subtree is a contiguous range.
/// Depth counts levels, so a lone terminal has depth 1.
class Tree {
public:
    Tree() = default;

    explicit Tree(std::vector<Node> prefix) : nodes_(std::move(prefix)) {
        if (!nodes_.empty() && !well_formed(nodes_)) throw std::invalid_argument("Tree: malformed prefix sequence");
        depth_ = compute_depth(nodes_);
    }

    static Tree terminal(Primitive op, double value) {
        if (is_function(op)) throw std::invalid_argument("Tree::terminal: not a terminal");
        return Tree(std::vector<Node>{Node{op, value}});
    }

    static Tree function(Primitive op, const Tree& first, const Tree& second) {
        if (!is_function(op) || first.empty() || second.empty())
            throw std::invalid_argument("Tree::function: needs a function and two non-empty children");
        std::vector<Node> nodes;
        nodes.reserve(1 + first.size() + second.size());
        nodes.push_back(Node{op, 0.0});
        nodes.insert(nodes.end(), first.nodes_.begin(), first.nodes_.end());
        nodes.insert(nodes.end(), second.nodes_.begin(), second.nodes_.end());
        return Tree(std::move(nodes));
    }

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    [[nodiscard]] const Node& operator[](std::size_t i) const { return nodes_.at(i); }

    [[nodiscard]] std::size_t terminal_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return !is_function(n.op); }));
    }

    /// One past the last node of the subtree rooted at `i`.
    [[nodiscard]] std::size_t subtree_end(std::size_t i) const {
        std::size_t open = 1;
        std::size_t j = i;
        while (open > 0) {
            open = open + arity(nodes_.at(j).op) - 1;
            ++j;
        }
        return j;
    }

    /// Level of node `i` (root is 1).
    [[nodiscard]] std::size_t node_level(std::size_t i) const {
        std::vector<std::size_t> pending;  // remaining child slots per open function
        std::size_t level = 0;
        for (std::size_t j = 0; j <= i; ++j) {
            level = pending.size() + 1;
            if (j == i) break;
            if (is_function(nodes_[j].op)) {
                pending.push_back(2);
            } else {
                while (!pending.empty() && --pending.back() == 0) pending.pop_back();
            }
        }
        return level;
    }

    [[nodiscard]] Tree subtree(std::size_t i) const {
        return Tree(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(i),
                                      nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(i))));
    }

    [[nodiscard]] Tree replace_subtree(std::size_t i, const Tree& replacement) const {
        std::vector<Node> out;
        out.reserve(nodes_.size() + replacement.size());
        out.insert(out.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(i));
        out.insert(out.end(), replacement.nodes_.begin(), replacement.nodes_.end());
        out.insert(out.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(i)), nodes_.end());
        return Tree(std::move(out));
    }

    /// Arity check: every function has exactly two complete children and nothing trails the root.
    static bool well_formed(std::span<const Node> nodes) {
        if (nodes.empty()) return false;
        std::size_t open = 1;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (open == 0) return false;
            open = open + arity(nodes[j].op) - 1;
        }
        return open == 0;
    }

    [[nodiscard]] bool well_formed() const { return well_formed(nodes_) && depth_ == compute_depth(nodes_); }

    /// S-expression, e.g. Split(Add_T[1e-05], Add_A[2e-09]).
    [[nodiscard]] std::string to_string() const {
        if (nodes_.empty()) return "()";
        std::string out;
        std::size_t pos = 0;
        write(out, pos);
        return out;
    }

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    static std::size_t compute_depth(std::span<const Node> nodes) {
        std::vector<std::size_t> pending;
        std::size_t depth = 0;
        for (const Node& n : nodes) {
            depth = std::max(depth, pending.size() + 1);
            if (is_function(n.op)) {
                pending.push_back(2);
            } else {
                while (!pending.empty() && --pending.back() == 0) pending.pop_back();
            }
        }
        return depth;
    }

    void write(std::string& out, std::size_t& pos) const {
        const Node& n = nodes_[pos++];
        out += gp::to_string(n.op);
        if (is_function(n.op)) {
            out += '(';
            write(out, pos);
            out += ", ";
            write(out, pos);
            out += ')';
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "[%.6g]", n.value);
            out += buf;
        }
    }

    std::vector<Node> nodes_;
    std::size_t depth_ = 0;
};

using Rng = std::mt19937_64;

// Portable draws so seeded runs agree across standard libraries.
template <std::uniform_random_bit_generator G>
double uniform01(G& rng) {
    static_assert(G::min() == 0 && G::max() == std::numeric_limits<std::uint64_t>::max(),
                  "uniform01 expects a full-range 64-bit generator");
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <std::uniform_random_bit_generator G>
std::size_t uniform_index(G& rng, std::size_t n) {
    // Rejection sampling over the top of the range removes modulo bias.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
        r = static_cast<std::uint64_t>(rng());
    } while (r >= limit);
    return static_cast<std::size_t>(r % bound);
}

template <class S, class G>
concept TerminalSampler = requires(S s, Primitive p, G& rng) {
    { s(p, rng) } -> std::convertible_to<double>;
};

enum class InitMethod { Full, Grow };

namespace detail {

template <class G, TerminalSampler<G> S>
void generate(std::vector<Node>& out, std::size_t level, std::size_t target, InitMethod method, S& sampler, G& rng) {
    bool function = false;
    if (level < target) function = method == InitMethod::Full || uniform_index(rng, 2) == 0;
    if (function) {
        out.push_back(Node{function_set[uniform_index(rng, function_set.size())], 0.0});
        generate(out, level + 1, target, method, sampler, rng);
        generate(out, level + 1, target, method, sampler, rng);
    } else {
        const Primitive t = terminal_set[uniform_index(rng, terminal_set.size())];
        out.push_back(Node{t, static_cast<double>(sampler(t, rng))});
    }
}

}  // namespace detail

/// Tree of exactly `target_depth` levels (Full) or at most that many (Grow).
template <class G, TerminalSampler<G> S>
Tree generate_tree(std::size_t target_depth, InitMethod method, S&& sampler, G& rng) {
    if (target_depth < 1) throw std::invalid_argument("generate_tree: depth must be >= 1");
    std::vector<Node> nodes;
    detail::generate(nodes, 1, target_depth, method, sampler, rng);
    return Tree(std::move(nodes));
}

/// Ramped half-and-half: depth uniform in [1, max_depth], then Full or Grow with equal odds.
template <class G, TerminalSampler<G> S>
Tree random_tree(std::size_t max_depth, S&& sampler, G& rng) {
    if (max_depth < 1) throw std::invalid_argument("random_tree: max_depth must be >= 1");
    const std::size_t target = 1 + uniform_index(rng, max_depth);
    const InitMethod method = uniform_index(rng, 2) == 0 ? InitMethod::Full : InitMethod::Grow;
    return generate_tree(target, method, sampler, rng);
}

struct Selection {
    enum class Method { RouletteWheel, Tournament };
    Method method = Method::Tournament;
    std::size_t tournament_size = 4;

    static Selection roulette() { return {Method::RouletteWheel, 0}; }
    static Selection tournament(std::size_t k) { return {Method::Tournament, k}; }

    friend bool operator==(const Selection&, const Selection&) = default;
};

/// Picks one parent index. Fitness is minimized: roulette weights are
/// f_max - f_i + eps with eps = 1e-9 (1 + |f_max|); tournaments draw k indices
/// with replacement and keep the lowest fitness (lower index on ties).
template <std::uniform_random_bit_generator G>
std::size_t select_parent(std::span<const double> fitness, const Selection& sel, G& rng) {
    if (fitness.empty()) throw std::invalid_argument("select_parent: EmptyPopulation");
    for (double f : fitness)
        if (!std::isfinite(f)) throw std::invalid_argument("select_parent: non-finite fitness");

    if (sel.method == Selection::Method::Tournament) {
        const std::size_t k = std::max<std::size_t>(sel.tournament_size, 1);
        std::size_t best = uniform_index(rng, fitness.size());
        for (std::size_t draw = 1; draw < k; ++draw) {
            const std::size_t c = uniform_index(rng, fitness.size());
            if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best)) best = c;
        }
        return best;
    }

    const double f_max = *std::max_element(fitness.begin(), fitness.end());
    const double eps = 1e-9 * (1.0 + std::abs(f_max));
    double total = 0.0;
    for (double f : fitness) total += f_max - f + eps;
    const double spin = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        acc += f_max - fitness[i] + eps;
        if (spin < acc) return i;
    }
    return fitness.size() - 1;
}

/// Subtree swap at uniformly chosen nodes. A child deeper than `max_depth` is
/// replaced by a copy of the parent it came from.
template <std::uniform_random_bit_generator G>
std::pair<Tree, Tree> crossover(const Tree& a, const Tree& b, std::size_t max_depth, G& rng) {
    const std::size_t ia = uniform_index(rng, a.size());
    const std::size_t ib = uniform_index(rng, b.size());
    Tree c1 = a.replace_subtree(ia, b.subtree(ib));
    Tree c2 = b.replace_subtree(ib, a.subtree(ia));
    if (c1.depth() > max_depth) c1 = a;
    if (c2.depth() > max_depth) c2 = b;
    return {std::move(c1), std::move(c2)};
}

/// Replaces a uniformly chosen subtree by a fresh ramped tree that fits under `max_depth`.
template <class G, TerminalSampler<G> S>
Tree mutate(const Tree& a, std::size_t max_depth, S&& sampler, G& rng) {
    const std::size_t i = uniform_index(rng, a.size());
    const std::size_t level = a.node_level(i);
    const std::size_t room = max_depth >= level ? max_depth - level + 1 : 1;
    return a.replace_subtree(i, random_tree(room, sampler, rng));
}

struct EvolutionConfig {
    std::size_t population_size = 50;
    std::size_t generations = 100;
    std::size_t max_depth = 8;
    double crossover_rate = 0.85;
    double mutation_rate = 0.10;
    double reproduction_rate = 0.05;
    Selection selection = Selection::tournament(4);
    std::size_t elitism_count = 1;
    std::uint64_t rng_seed = 1;
    std::size_t threads = 1;  // fitness evaluation workers

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (population_size < 2) throw std::invalid_argument("population_size must be >= 2");
        if (generations < 1) throw std::invalid_argument("generations must be >= 1");
        if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
        if (!prob(crossover_rate) || !prob(mutation_rate) || !prob(reproduction_rate))
            throw std::invalid_argument("operator rates must lie in [0, 1]");
        if (std::abs(crossover_rate + mutation_rate + reproduction_rate - 1.0) > 1e-12)
            throw std::invalid_argument("operator rates must sum to 1");
        if (elitism_count >= population_size) throw std::invalid_argument("elitism_count must be < population_size");
        if (selection.method == Selection::Method::Tournament && selection.tournament_size < 1)
            throw std::invalid_argument("tournament size must be >= 1");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    }

    friend bool operator==(const EvolutionConfig&, const EvolutionConfig&) = default;
};

struct GenerationStats {
    std::size_t generation = 0;
    double best_so_far_fitness = 0.0;
    double median_fitness = 0.0;
    double mean_fitness = 0.0;
    double fitness_stddev = 0.0;
    std::size_t best_depth = 0;
    std::size_t best_size = 0;

    friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct EvolutionResult {
    Tree best;
    double best_fitness = std::numeric_limits<double>::infinity();
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
};

namespace detail {

inline GenerationStats summarize(std::size_t generation, std::vector<double> fitness, double best_fitness,
                                 const Tree& best) {
    GenerationStats s;
    s.generation = generation;
    s.best_so_far_fitness = best_fitness;
    s.best_depth = best.depth();
    s.best_size = best.size();
    const std::size_t n = fitness.size();
    std::sort(fitness.begin(), fitness.end());
    s.median_fitness = n % 2 == 1 ? fitness[n / 2] : 0.5 * (fitness[n / 2 - 1] + fitness[n / 2]);
    s.mean_fitness = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(n);
    double sq = 0.0;
    for (double f : fitness) sq += (f - s.mean_fitness) * (f - s.mean_fitness);
    s.fitness_stddev = std::sqrt(sq / static_cast<double>(n));
    return s;
}

// Fills in missing fitness values; results land at their population index so the
// outcome does not depend on the worker count.
template <class Fn>
std::size_t evaluate_population(const std::vector<Tree>& pop, std::vector<double>& fitness,
                                std::vector<bool>& known, Fn& fitness_fn, std::size_t threads) {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!known[i]) todo.push_back(i);

    auto run = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t j = worker; j < todo.size(); j += stride) {
            const double f = static_cast<double>(fitness_fn(pop[todo[j]]));
            if (!std::isfinite(f)) throw std::domain_error("fitness function returned a non-finite value");
            fitness[todo[j]] = f;
        }
    };

    const std::size_t workers = std::min(threads, todo.size());
    if (workers <= 1) {
        run(0, 1);
    } else {
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    run(w, workers);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    for (std::size_t i : todo) known[i] = true;
    return todo.size();
}

}  // namespace detail

/// Generational GP minimizing `fitness_fn`. Each generation is evaluated, summarized,
/// and then replaced by `elitism_count` elites plus offspring from crossover,
/// mutation or reproduction chosen per the configured rates. All random choices
/// come from one stream seeded with `cfg.rng_seed`.
template <class Fn, TerminalSampler<Rng> S>
    requires std::invocable<Fn&, const Tree&>
EvolutionResult evolve(const EvolutionConfig& cfg, Fn&& fitness_fn, S&& sampler) {
    cfg.validate();
    Rng rng(cfg.rng_seed);

    std::vector<Tree> pop;
    pop.reserve(cfg.population_size);
    for (std::size_t i = 0; i < cfg.population_size; ++i) pop.push_back(random_tree(cfg.max_depth, sampler, rng));
    std::vector<double> fitness(cfg.population_size, 0.0);
    std::vector<bool> known(cfg.population_size, false);

    EvolutionResult result;
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        result.evaluations += detail::evaluate_population(pop, fitness, known, fitness_fn, cfg.threads);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (fitness[i] < result.best_fitness) {
                result.best_fitness = fitness[i];
                result.best = pop[i];
            }
        }
        result.history.push_back(detail::summarize(gen, fitness, result.best_fitness, result.best));
        if (gen + 1 == cfg.generations) break;

        std::vector<std::size_t> rank(pop.size());
        std::iota(rank.begin(), rank.end(), std::size_t{0});
        std::stable_sort(rank.begin(), rank.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

        std::vector<Tree> next;
        std::vector<double> next_fitness;
        std::vector<bool> next_known;
        next.reserve(cfg.population_size);
        auto push = [&](Tree t, std::optional<double> f) {
            next.push_back(std::move(t));
            next_fitness.push_back(f.value_or(0.0));
            next_known.push_back(f.has_value());
        };

        for (std::size_t e = 0; e < cfg.elitism_count; ++e) push(pop[rank[e]], fitness[rank[e]]);

        while (next.size() < cfg.population_size) {
            const double r = uniform01(rng);
            if (r < cfg.crossover_rate) {
                const std::size_t pa = select_parent(fitness, cfg.selection, rng);
                const std::size_t pb = select_parent(fitness, cfg.selection, rng);
                auto [c1, c2] = crossover(pop[pa], pop[pb], cfg.max_depth, rng);
                push(std::move(c1), std::nullopt);
                if (next.size() < cfg.population_size) push(std::move(c2), std::nullopt);
            } else if (r < cfg.crossover_rate + cfg.mutation_rate) {
                const std::size_t p = select_parent(fitness, cfg.selection, rng);
                push(mutate(pop[p], cfg.max_depth, sampler, rng), std::nullopt);
            } else {
                const std::size_t p = select_parent(fitness, cfg.selection, rng);
                push(pop[p], fitness[p]);
            }
        }
        pop = std::move(next);
        fitness = std::move(next_fitness);
        known = std::move(next_known);
    }
    return result;
}

}  // namespace lgsynth::gp
