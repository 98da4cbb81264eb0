#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cw {

inline constexpr int kMaxDim = 4;

/// Uniform tensor-product grid on a box. Periodic axes wrap (angle
/// coordinates); on those the last node is the one before the seam.
class Chart {
public:
    Chart(std::string name, int dim,
          std::array<double, kMaxDim> lo, std::array<double, kMaxDim> hi,
          std::array<int, kMaxDim> res, std::array<bool, kMaxDim> periodic);

    static Chart box(std::string name, int dim, double half_width, int res);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    double lo(int ax) const { return lo_[ax]; }
    double hi(int ax) const { return hi_[ax]; }
    int res(int ax) const { return res_[ax]; }
    bool periodic(int ax) const { return periodic_[ax]; }
    double spacing(int ax) const { return h_[ax]; }

    std::size_t node_count() const { return nodes_; }

    std::size_t index(const std::array<int, kMaxDim>& idx) const {
        std::size_t flat = 0;
        for (int a = 0; a < dim_; ++a) flat = flat * res_[a] + idx[a];
        return flat;
    }
    std::array<int, kMaxDim> unindex(std::size_t flat) const {
        std::array<int, kMaxDim> idx{};
        for (int a = dim_ - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(flat % res_[a]);
            flat /= res_[a];
        }
        return idx;
    }
    std::array<double, kMaxDim> coords(const std::array<int, kMaxDim>& idx) const {
        std::array<double, kMaxDim> x{};
        for (int a = 0; a < dim_; ++a) x[a] = lo_[a] + h_[a] * idx[a];
        return x;
    }
    std::array<double, kMaxDim> coords(std::size_t flat) const {
        return coords(unindex(flat));
    }

    bool contains(const std::array<double, kMaxDim>& x, double slack = 1e-12) const;

    bool same_grid(const Chart& o) const;

private:
    std::string name_;
    int dim_;
    std::array<double, kMaxDim> lo_{}, hi_{}, h_{};
    std::array<int, kMaxDim> res_{};
    std::array<bool, kMaxDim> periodic_{};
    std::size_t nodes_ = 1;
};

using ChartPtr = std::shared_ptr<const Chart>;

struct ChartMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace cw
