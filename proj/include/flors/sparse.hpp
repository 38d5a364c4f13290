#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace flors {

// Sparse real vector, indices strictly increasing.
struct SparseVec {
    std::vector<std::uint32_t> idx;
    std::vector<double> val;

    std::size_t nnz() const { return idx.size(); }

    void push(std::uint32_t i, double v) {
        idx.push_back(i);
        val.push_back(v);
    }

    bool operator==(const SparseVec&) const = default;
};

inline double dot(std::span<const double> dense, const SparseVec& x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.idx.size(); ++k) {
        if (x.idx[k] >= dense.size())
            throw std::invalid_argument("sparse index exceeds vector dimension");
        s += dense[x.idx[k]] * x.val[k];
    }
    return s;
}

// dense += a * x
inline void axpy(double a, const SparseVec& x, std::span<double> dense) {
    for (std::size_t k = 0; k < x.idx.size(); ++k) dense[x.idx[k]] += a * x.val[k];
}

}  // namespace flors
