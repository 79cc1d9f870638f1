#include "ckh/pdag.hpp"

namespace ckh {

Pdag::Pdag(std::size_t n) : n_(n), dir_(n * n, 0), und_(n * n, 0) {}

void Pdag::add_directed(std::size_t from, std::size_t to) {
    remove(from, to);
    dir_[from * n_ + to] = 1;
}

void Pdag::add_undirected(std::size_t a, std::size_t b) {
    remove(a, b);
    und_[a * n_ + b] = 1;
    und_[b * n_ + a] = 1;
}

void Pdag::remove(std::size_t a, std::size_t b) {
    dir_[a * n_ + b] = 0;
    dir_[b * n_ + a] = 0;
    und_[a * n_ + b] = 0;
    und_[b * n_ + a] = 0;
}

void Pdag::orient(std::size_t from, std::size_t to) { add_directed(from, to); }

bool Pdag::has_directed_path(std::size_t from, std::size_t to) const {
    std::vector<unsigned char> seen(n_, 0);
    std::vector<std::size_t> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < n_; ++w) {
            if (!directed(v, w)) continue;
            if (w == to) return true;
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
        }
    }
    return false;
}

std::size_t Pdag::apply_orientation_rules() {
    std::size_t oriented = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t a = 0; a < n_; ++a) {
            for (std::size_t b = 0; b < n_; ++b) {
                if (a == b || !undirected(a, b)) continue;
                bool orient_ab = has_directed_path(a, b);
                for (std::size_t c = 0; c < n_ && !orient_ab; ++c) {
                    orient_ab = c != a && c != b && directed(c, a) && !adjacent(c, b);
                }
                if (orient_ab && !creates_cycle(a, b)) {
                    orient(a, b);
                    ++oriented;
                    changed = true;
                }
            }
        }
    }
    return oriented;
}

std::vector<std::size_t> Pdag::neighbours(std::size_t a) const {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < n_; ++b) {
        if (b != a && adjacent(a, b)) out.push_back(b);
    }
    return out;
}

}  // namespace ckh
