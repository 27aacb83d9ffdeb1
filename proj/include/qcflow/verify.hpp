#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcflow/field.hpp"
#include "qcflow/moduli.hpp"

namespace qcflow {

struct CheckEntry {
    std::string field;
    std::string name;
    /// "pass", "fail", "excluded" or "info".
    std::string status;
    std::optional<double> metric;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckEntry> entries;

    std::size_t failures() const;
    bool ok() const { return failures() == 0; }
    nlohmann::json to_json() const;
};

/// Exact (K, d) for the built-in family fields, matched structurally.
std::optional<QCParams> known_params(const FieldDescriptor& field);

/// The built-ins checked by `verify all-builtin`, the degenerate rotation included.
std::vector<FieldDescriptor> builtin_fields();

/// Runs every check on one field. Fields with re f(1) > 0 are divided by re f(1) first;
/// re f(1) = 0 is reported as excluded and re f(1) < 0 as a failure.
void verify_field(const FieldDescriptor& field, std::uint64_t seed, double tolerance, VerifyReport& report);

/// Field-independent checks (the inner-product lemma fuzz).
void verify_common(std::uint64_t seed, VerifyReport& report);

}  // namespace qcflow
