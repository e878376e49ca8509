#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace mwscm {

enum class ScalarKind { String, Int, Float, Bool };

// The scalar value space shared by requests, operation arguments and results.
using Scalar = std::variant<std::string, std::int64_t, double, bool>;

using Record = std::map<std::string, Scalar>;

// A task's output slot holds either one scalar or a whole record.
using ResultValue = std::variant<Scalar, Record>;

ScalarKind kind_of(const Scalar& value);
std::string_view kind_name(ScalarKind kind);
std::optional<ScalarKind> kind_from_name(std::string_view name);

// Canonical text: bool -> true/false, int -> decimal, float -> shortest
// round-tripping form, string -> as-is. Used on every wire format.
std::string scalar_text(const Scalar& value);

// Parses text as one specific kind; nullopt when the text does not denote a
// value of that kind (whole-string match, no trailing garbage).
std::optional<Scalar> scalar_from_text(std::string_view text, ScalarKind kind);

// Types a bare text by syntax: integer literal -> Int, decimal/exponent
// literal -> Float, true/false -> Bool, 'quoted' -> String (quotes stripped),
// anything else -> String. Used for handler configs and CALL result lines.
Scalar sniff_scalar(std::string_view text);

// Canonical flat encoding of a record: "k1=v1;k2=v2" with keys sorted.
std::string record_text(const Record& record);

}  // namespace mwscm
