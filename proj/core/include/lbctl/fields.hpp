#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lbctl/grid.hpp"

namespace lbctl {

/// Cell-centred scalar (temperature, pressure, heating, divergence).
class ScalarField {
public:
    explicit ScalarField(const GridSpec& grid);

    const GridSpec& grid() const noexcept { return grid_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[j * grid_.nx() + i]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * grid_.nx() + i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    template <class F>
    static ScalarField sample(const GridSpec& grid, F&& f) {
        ScalarField out(grid);
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i) out(i, j) = f(grid.xc(i), grid.yc(j));
        return out;
    }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double a) noexcept;
    /// this += a * x
    ScalarField& axpy(double a, const ScalarField& x);
    void fill(double value) noexcept;

private:
    GridSpec grid_;
    std::vector<double> data_;
};

/// Staggered velocity. The x-component is stored on all (nx+1) x ny vertical
/// faces and the y-component on all nx x (ny+1) horizontal faces; faces lying
/// on the boundary carry the homogeneous Dirichlet value and stay zero for
/// every admissible field.
class VelocityField {
public:
    explicit VelocityField(const GridSpec& grid);

    const GridSpec& grid() const noexcept { return grid_; }

    double& u(std::size_t i, std::size_t j) noexcept { return u_[j * (grid_.nx() + 1) + i]; }
    double u(std::size_t i, std::size_t j) const noexcept { return u_[j * (grid_.nx() + 1) + i]; }
    double& v(std::size_t i, std::size_t j) noexcept { return v_[j * grid_.nx() + i]; }
    double v(std::size_t i, std::size_t j) const noexcept { return v_[j * grid_.nx() + i]; }

    std::span<double> u_values() noexcept { return u_; }
    std::span<const double> u_values() const noexcept { return u_; }
    std::span<double> v_values() noexcept { return v_; }
    std::span<const double> v_values() const noexcept { return v_; }

    /// Sample (fu, fv) at face centres; boundary-normal faces are forced to zero.
    template <class FU, class FV>
    static VelocityField sample(const GridSpec& grid, FU&& fu, FV&& fv) {
        VelocityField out(grid);
        for (std::size_t j = 0; j < grid.ny(); ++j)
            for (std::size_t i = 1; i < grid.nx(); ++i) out.u(i, j) = fu(grid.xf(i), grid.yc(j));
        for (std::size_t j = 1; j < grid.ny(); ++j)
            for (std::size_t i = 0; i < grid.nx(); ++i) out.v(i, j) = fv(grid.xc(i), grid.yf(j));
        return out;
    }

    VelocityField& operator+=(const VelocityField& o);
    VelocityField& operator-=(const VelocityField& o);
    VelocityField& operator*=(double a) noexcept;
    VelocityField& axpy(double a, const VelocityField& x);
    void fill(double value) noexcept;
    /// Zero the boundary-normal faces.
    void clear_boundary() noexcept;

private:
    GridSpec grid_;
    std::vector<double> u_;
    std::vector<double> v_;
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline ScalarField operator*(double s, ScalarField a) { return a *= s; }
inline VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
inline VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
inline VelocityField operator*(double s, VelocityField a) { return a *= s; }

/// Tensor field of the cell-centred velocity gradient, G(a,b) = d y_a / d x_b.
struct GradientTensor {
    ScalarField dudx;
    ScalarField dudy;
    ScalarField dvdx;
    ScalarField dvdy;
};

}  // namespace lbctl
