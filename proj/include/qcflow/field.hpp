#pragma once

#include <memory>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "qcflow/complex.hpp"

namespace qcflow {

class FieldDescriptor;

namespace kinds {

/// f(z) = i*omega*z, circles about the origin.
struct Degenerate {
    double omega = 1.0;
};
/// f(z) = (lambda + i*omega) * z.
struct Linear {
    double lambda = 1.0;
    double omega = 0.0;
};
/// f(z) = c * z * |z|^p; f(0) = 0 for p > -1.
struct RadialPower {
    double c = 1.0;
    double p = 0.0;
};
/// 10 z / sqrt|z|, the Hoelder field with two integral curves through 0.
struct Example1 {};
/// 2z on Im z >= 0, 3z - conj(z) on Im z <= 0.
struct Example2 {};
/// time_scale * inner(z).
struct Rescaled {
    std::shared_ptr<const FieldDescriptor> inner;
    double time_scale = 1.0;
};
/// (1 - t) f(z) + t g(z).
struct ConvexCombo {
    std::shared_ptr<const FieldDescriptor> f;
    std::shared_ptr<const FieldDescriptor> g;
    double t = 0.0;
};

}  // namespace kinds

/// Declarative, immutable description of a planar vector field.
/// Copies share nested descriptors; all kinds are total on the finite plane.
class FieldDescriptor {
public:
    using Variant = std::variant<kinds::Degenerate, kinds::Linear, kinds::RadialPower, kinds::Example1,
                                 kinds::Example2, kinds::Rescaled, kinds::ConvexCombo>;

    FieldDescriptor() : v_(kinds::Linear{}) {}
    explicit FieldDescriptor(Variant v) : v_(std::move(v)) {}

    const Variant& variant() const noexcept { return v_; }

    /// Kind name as used in the JSON form ("linear", "example2", ...).
    std::string kind_name() const;

    /// Compact human-readable label, e.g. "linear(1,2)" or "rescaled(example2,0.5)".
    std::string label() const;

    ComplexPoint operator()(ComplexPoint z) const;

    /// True if this descriptor, or any nested one, is of kind K.
    template <class K>
    bool contains() const;

    friend bool operator==(const FieldDescriptor& a, const FieldDescriptor& b);

private:
    Variant v_;
};

namespace field {

FieldDescriptor degenerate(double omega);
FieldDescriptor linear(double lambda, double omega);
FieldDescriptor radial_power(double c, double p);
FieldDescriptor example1();
FieldDescriptor example2();
FieldDescriptor rescaled(FieldDescriptor inner, double time_scale);
FieldDescriptor convex_combo(FieldDescriptor f, FieldDescriptor g, double t);

/// Divides a field by re f(1) so that re f(1) = 1. Throws NotNormalizable if re f(1) <= 0.
FieldDescriptor normalized(const FieldDescriptor& f);

}  // namespace field

inline ComplexPoint eval(const FieldDescriptor& field, ComplexPoint z) { return field(z); }

nlohmann::json to_json(const FieldDescriptor& field);

/// Parses the JSON form. Throws QcError(ConfigParse) on malformed input.
FieldDescriptor field_from_json(const nlohmann::json& j);

/// Accepts either a JSON object or one of the shorthands
/// "degenerate:w", "linear:l,w", "radial_power:c,p", "example1", "example2".
FieldDescriptor parse_field(const std::string& text);

// ---------------------------------------------------------------------------

template <class K>
bool FieldDescriptor::contains() const {
    return std::visit(
        [](const auto& k) -> bool {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, K>) {
                return true;
            } else if constexpr (std::is_same_v<T, kinds::Rescaled>) {
                return k.inner->template contains<K>();
            } else if constexpr (std::is_same_v<T, kinds::ConvexCombo>) {
                return k.f->template contains<K>() || k.g->template contains<K>();
            } else {
                return false;
            }
        },
        v_);
}

}  // namespace qcflow
