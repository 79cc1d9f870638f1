#pragma once

#include <cstddef>
#include <vector>

namespace ckh {

// Partially directed graph over nodes 0..n-1. Node index order is the
// deterministic scan order for every rule application.
class Pdag {
public:
    explicit Pdag(std::size_t n);

    std::size_t size() const noexcept { return n_; }

    bool adjacent(std::size_t a, std::size_t b) const { return directed(a, b) || directed(b, a) || undirected(a, b); }
    bool directed(std::size_t from, std::size_t to) const { return dir_[from * n_ + to] != 0; }
    bool undirected(std::size_t a, std::size_t b) const { return und_[a * n_ + b] != 0; }

    void add_directed(std::size_t from, std::size_t to);
    void add_undirected(std::size_t a, std::size_t b);
    void remove(std::size_t a, std::size_t b);
    // Turns an adjacency (of any kind) into from -> to.
    void orient(std::size_t from, std::size_t to);

    // True if a path of one or more directed edges leads from -> to.
    bool has_directed_path(std::size_t from, std::size_t to) const;

    // Adding from -> to would close a directed cycle.
    bool creates_cycle(std::size_t from, std::size_t to) const { return has_directed_path(to, from); }

    // Applies, to a fixed point:
    //   a - b with a directed path a ~> b       =>  a -> b
    //   c -> a, a - b, c and b non-adjacent     =>  a -> b
    // An orientation that would close a cycle is skipped. Returns the number
    // of edges oriented.
    std::size_t apply_orientation_rules();

    std::vector<std::size_t> neighbours(std::size_t a) const;  // any adjacency, ascending

private:
    std::size_t n_;
    std::vector<unsigned char> dir_;
    std::vector<unsigned char> und_;
};

}  // namespace ckh
