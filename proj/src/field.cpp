#include "qcflow/field.hpp"

#include <cstdlib>
#include <optional>
#include <cstdio>
#include <sstream>
#include <vector>

#include "qcflow/error.hpp"

namespace qcflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ComplexPoint radial_power_eval(double c, double p, ComplexPoint z) {
    const double r = std::abs(z);
    if (r == 0.0) return {0.0, 0.0};
    return c * z * std::pow(r, p);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Shortest form that still round-trips reads better in labels.
    for (int prec = 1; prec <= 17; ++prec) {
        char tmp[32];
        std::snprintf(tmp, sizeof tmp, "%.*g", prec, v);
        if (std::strtod(tmp, nullptr) == v) return tmp;
    }
    return buf;
}

}  // namespace

ComplexPoint FieldDescriptor::operator()(ComplexPoint z) const {
    return std::visit(
        overloaded{
            [&](const kinds::Degenerate& k) { return ComplexPoint(0.0, k.omega) * z; },
            [&](const kinds::Linear& k) { return ComplexPoint(k.lambda, k.omega) * z; },
            [&](const kinds::RadialPower& k) { return radial_power_eval(k.c, k.p, z); },
            [&](const kinds::Example1&) { return radial_power_eval(10.0, -0.5, z); },
            [&](const kinds::Example2&) {
                // Both branches give 2x on the real axis.
                if (z.imag() >= 0.0) return 2.0 * z;
                return 3.0 * z - std::conj(z);
            },
            [&](const kinds::Rescaled& k) { return k.time_scale * (*k.inner)(z); },
            [&](const kinds::ConvexCombo& k) { return (1.0 - k.t) * (*k.f)(z) + k.t * (*k.g)(z); },
        },
        v_);
}

std::string FieldDescriptor::kind_name() const {
    return std::visit(overloaded{
                          [](const kinds::Degenerate&) { return std::string("degenerate"); },
                          [](const kinds::Linear&) { return std::string("linear"); },
                          [](const kinds::RadialPower&) { return std::string("radial_power"); },
                          [](const kinds::Example1&) { return std::string("example1"); },
                          [](const kinds::Example2&) { return std::string("example2"); },
                          [](const kinds::Rescaled&) { return std::string("rescaled"); },
                          [](const kinds::ConvexCombo&) { return std::string("convex_combo"); },
                      },
                      v_);
}

std::string FieldDescriptor::label() const {
    return std::visit(
        overloaded{
            [](const kinds::Degenerate& k) { return "degenerate(" + num(k.omega) + ")"; },
            [](const kinds::Linear& k) { return "linear(" + num(k.lambda) + "," + num(k.omega) + ")"; },
            [](const kinds::RadialPower& k) { return "radial_power(" + num(k.c) + "," + num(k.p) + ")"; },
            [](const kinds::Example1&) { return std::string("example1"); },
            [](const kinds::Example2&) { return std::string("example2"); },
            [](const kinds::Rescaled& k) { return "rescaled(" + k.inner->label() + "," + num(k.time_scale) + ")"; },
            [](const kinds::ConvexCombo& k) {
                return "convex_combo(" + k.f->label() + "," + k.g->label() + "," + num(k.t) + ")";
            },
        },
        v_);
}

bool operator==(const FieldDescriptor& a, const FieldDescriptor& b) { return to_json(a) == to_json(b); }

namespace field {

FieldDescriptor degenerate(double omega) { return FieldDescriptor(kinds::Degenerate{omega}); }
FieldDescriptor linear(double lambda, double omega) { return FieldDescriptor(kinds::Linear{lambda, omega}); }
FieldDescriptor radial_power(double c, double p) { return FieldDescriptor(kinds::RadialPower{c, p}); }
FieldDescriptor example1() { return FieldDescriptor(kinds::Example1{}); }
FieldDescriptor example2() { return FieldDescriptor(kinds::Example2{}); }

FieldDescriptor rescaled(FieldDescriptor inner, double time_scale) {
    return FieldDescriptor(
        kinds::Rescaled{std::make_shared<const FieldDescriptor>(std::move(inner)), time_scale});
}

FieldDescriptor convex_combo(FieldDescriptor f, FieldDescriptor g, double t) {
    return FieldDescriptor(kinds::ConvexCombo{std::make_shared<const FieldDescriptor>(std::move(f)),
                                              std::make_shared<const FieldDescriptor>(std::move(g)), t});
}

FieldDescriptor normalized(const FieldDescriptor& f) {
    const double re_f1 = f(1.0).real();
    if (!(re_f1 > 0.0)) {
        throw QcError(ErrorCode::NotNormalizable,
                      f.label() + " has re f(1) = " + num(re_f1) + " <= 0");
    }
    return rescaled(f, 1.0 / re_f1);
}

}  // namespace field

// --- JSON ------------------------------------------------------------------

nlohmann::json to_json(const FieldDescriptor& f) {
    using nlohmann::json;
    return std::visit(
        overloaded{
            [](const kinds::Degenerate& k) {
                return json{{"kind", "degenerate"}, {"params", {{"omega", k.omega}}}};
            },
            [](const kinds::Linear& k) {
                return json{{"kind", "linear"}, {"params", {{"lambda", k.lambda}, {"omega", k.omega}}}};
            },
            [](const kinds::RadialPower& k) {
                return json{{"kind", "radial_power"}, {"params", {{"c", k.c}, {"p", k.p}}}};
            },
            [](const kinds::Example1&) { return json{{"kind", "example1"}, {"params", json::object()}}; },
            [](const kinds::Example2&) { return json{{"kind", "example2"}, {"params", json::object()}}; },
            [](const kinds::Rescaled& k) {
                return json{{"kind", "rescaled"},
                            {"params", {{"time_scale", k.time_scale}}},
                            {"inner", to_json(*k.inner)}};
            },
            [](const kinds::ConvexCombo& k) {
                return json{{"kind", "convex_combo"},
                            {"params", {{"t", k.t}}},
                            {"f", to_json(*k.f)},
                            {"g", to_json(*k.g)}};
            },
        },
        f.variant());
}

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw QcError(ErrorCode::ConfigParse, msg); }

double number_param(const nlohmann::json& j, const char* name, std::optional<double> fallback = {}) {
    // Numeric parameters live in "params"; nested kinds also accept them at top level.
    if (j.contains("params") && j["params"].is_object() && j["params"].contains(name)) {
        const auto& v = j["params"][name];
        if (!v.is_number()) parse_fail(std::string("parameter '") + name + "' is not a number");
        return v.get<double>();
    }
    if (j.contains(name)) {
        const auto& v = j[name];
        if (!v.is_number()) parse_fail(std::string("parameter '") + name + "' is not a number");
        return v.get<double>();
    }
    if (fallback) return *fallback;
    parse_fail(std::string("missing parameter '") + name + "'");
}

const nlohmann::json& nested(const nlohmann::json& j, const char* name) {
    if (!j.contains(name) || !j[name].is_object()) parse_fail(std::string("missing nested field '") + name + "'");
    return j[name];
}

std::vector<double> split_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (item.empty() || end == item.c_str() || *end != '\0') parse_fail("bad number '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

FieldDescriptor field_from_json(const nlohmann::json& j) {
    if (!j.is_object()) parse_fail("field descriptor must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string()) parse_fail("field descriptor needs a string 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "degenerate") return field::degenerate(number_param(j, "omega"));
    if (kind == "linear") return field::linear(number_param(j, "lambda"), number_param(j, "omega", 0.0));
    if (kind == "radial_power") return field::radial_power(number_param(j, "c"), number_param(j, "p"));
    if (kind == "example1") return field::example1();
    if (kind == "example2") return field::example2();
    if (kind == "rescaled") return field::rescaled(field_from_json(nested(j, "inner")), number_param(j, "time_scale"));
    if (kind == "convex_combo") {
        return field::convex_combo(field_from_json(nested(j, "f")), field_from_json(nested(j, "g")),
                                   number_param(j, "t"));
    }
    parse_fail("unknown field kind '" + kind + "'");
}

FieldDescriptor parse_field(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            parse_fail(std::string("malformed field JSON: ") + e.what());
        }
        return field_from_json(j);
    }
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    const std::vector<double> args =
        colon == std::string::npos ? std::vector<double>{} : split_numbers(text.substr(colon + 1));
    auto want = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi) parse_fail("wrong argument count in '" + text + "'");
    };
    if (name == "degenerate") {
        want(1, 1);
        return field::degenerate(args[0]);
    }
    if (name == "linear") {
        want(1, 2);
        return field::linear(args[0], args.size() > 1 ? args[1] : 0.0);
    }
    if (name == "radial_power") {
        want(2, 2);
        return field::radial_power(args[0], args[1]);
    }
    if (name == "example1") {
        want(0, 0);
        return field::example1();
    }
    if (name == "example2") {
        want(0, 0);
        return field::example2();
    }
    parse_fail("unrecognized field '" + text + "'");
}

}  // namespace qcflow
