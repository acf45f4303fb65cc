#include "vfem/coefficient.hpp"

#include "vfem/error.hpp"

namespace vfem {

CoefficientField CoefficientField::constant(double value) { return CoefficientField(Constant{value}); }

CoefficientField CoefficientField::spatial(SpatialFn f) {
    if (!f) throw Error("spatial coefficient needs a function");
    return CoefficientField(Spatial{std::move(f)});
}

CoefficientField CoefficientField::state(StateFn f, StateFn df) {
    if (!f || !df) throw Error("state-dependent coefficient needs both a function and its derivative");
    return CoefficientField(State{std::move(f), std::move(df)});
}

bool CoefficientField::is_zero() const noexcept {
    const auto* c = std::get_if<Constant>(&impl_);
    return c && c->value == 0.0;
}

double CoefficientField::constant_value() const {
    const auto* c = std::get_if<Constant>(&impl_);
    if (!c) throw Error("coefficient is not constant");
    return c->value;
}

double CoefficientField::value(double x, double y, double t, double u) const {
    switch (impl_.index()) {
        case 0: return std::get<Constant>(impl_).value;
        case 1: return std::get<Spatial>(impl_).f(x, y, t);
        default: return std::get<State>(impl_).f(u);
    }
}

double CoefficientField::derivative(double u) const {
    if (const auto* s = std::get_if<State>(&impl_)) return s->df(u);
    return 0.0;
}

} // namespace vfem
