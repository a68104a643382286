#include "lbctl/fields.hpp"

#include <algorithm>

#include "lbctl/errors.hpp"

namespace lbctl {

namespace {

void require_same(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) throw ShapeError("field grids do not match");
}

}  // namespace

ScalarField::ScalarField(const GridSpec& grid) : grid_(grid), data_(grid.cells(), 0.0) {}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same(grid_, o.grid_);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same(grid_, o.grid_);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
}

ScalarField& ScalarField::operator*=(double a) noexcept {
    for (double& x : data_) x *= a;
    return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& x) {
    require_same(grid_, x.grid_);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += a * x.data_[n];
    return *this;
}

void ScalarField::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

VelocityField::VelocityField(const GridSpec& grid)
    : grid_(grid), u_((grid.nx() + 1) * grid.ny(), 0.0), v_(grid.nx() * (grid.ny() + 1), 0.0) {}

VelocityField& VelocityField::operator+=(const VelocityField& o) {
    require_same(grid_, o.grid_);
    for (std::size_t n = 0; n < u_.size(); ++n) u_[n] += o.u_[n];
    for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
    return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& o) {
    require_same(grid_, o.grid_);
    for (std::size_t n = 0; n < u_.size(); ++n) u_[n] -= o.u_[n];
    for (std::size_t n = 0; n < v_.size(); ++n) v_[n] -= o.v_[n];
    return *this;
}

VelocityField& VelocityField::operator*=(double a) noexcept {
    for (double& x : u_) x *= a;
    for (double& x : v_) x *= a;
    return *this;
}

VelocityField& VelocityField::axpy(double a, const VelocityField& x) {
    require_same(grid_, x.grid_);
    for (std::size_t n = 0; n < u_.size(); ++n) u_[n] += a * x.u_[n];
    for (std::size_t n = 0; n < v_.size(); ++n) v_[n] += a * x.v_[n];
    return *this;
}

void VelocityField::fill(double value) noexcept {
    std::fill(u_.begin(), u_.end(), value);
    std::fill(v_.begin(), v_.end(), value);
    clear_boundary();
}

void VelocityField::clear_boundary() noexcept {
    const std::size_t nx = grid_.nx(), ny = grid_.ny();
    for (std::size_t j = 0; j < ny; ++j) {
        u(0, j) = 0.0;
        u(nx, j) = 0.0;
    }
    for (std::size_t i = 0; i < nx; ++i) {
        v(i, 0) = 0.0;
        v(i, ny) = 0.0;
    }
}

}  // namespace lbctl
