#pragma once

#include <functional>
#include <variant>

namespace vfem {

/// PDE coefficient: a constant, a function of (x, y, t), or a function of the
/// unknown u together with its derivative du.
class CoefficientField {
public:
    enum class Kind { constant, spatial, state };

    using SpatialFn = std::function<double(double x, double y, double t)>;
    using StateFn = std::function<double(double u)>;

    static CoefficientField constant(double value);
    static CoefficientField spatial(SpatialFn f);
    static CoefficientField state(StateFn f, StateFn df);

    Kind kind() const noexcept { return static_cast<Kind>(impl_.index()); }
    bool is_zero() const noexcept;
    double constant_value() const;

    /// Value at a point; u is ignored unless the field is state-dependent.
    double value(double x, double y, double t, double u) const;
    /// d(value)/du; identically zero for constant and spatial fields.
    double derivative(double u) const;

private:
    struct Constant { double value; };
    struct Spatial { SpatialFn f; };
    struct State { StateFn f; StateFn df; };

    explicit CoefficientField(std::variant<Constant, Spatial, State> impl) : impl_(std::move(impl)) {}

    std::variant<Constant, Spatial, State> impl_;
};

} // namespace vfem
