#pragma once

#include <cstddef>
#include <vector>

namespace levydam::detail {

/// Cubic Hermite table of W with its derivative and running integral.
struct HermiteTable {
    std::vector<double> x, w, d, wbar;
    // Nodes from index `uniform_from` on are x[uniform_from] + k * h.
    std::size_t uniform_from = 0;
    double h = 0.0;
    // Cell 0 is interpolated linearly (W' may blow up at 0).
    bool linear_first_cell = true;
    // Cells ending at or below sqrt_top are interpolated in u = sqrt(x).
    double sqrt_top = 0.0;

    void finish();  // fills wbar
    std::size_t cell(double t) const;
    double eval_w(double t) const;
    double eval_d(double t) const;
    double eval_wbar(double t) const;
    double upper() const { return x.back(); }

private:
    bool in_sqrt(std::size_t i) const { return i > 0 && x[i + 1] <= sqrt_top; }
    double sqrt_w(std::size_t i, double u) const;
    double sqrt_int(std::size_t i, double t) const;
};

std::vector<double> fd_derivative(const std::vector<double>& f, double h);

}  // namespace levydam::detail
