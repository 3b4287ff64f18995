#pragma once

// JSON forms of operators, 4-forms and certificates. Symmetric operators are
// stored as their lower triangle in row-major order, together with a frame
// descriptor.

#include "snn/certifier.hpp"

#include <json.hpp>

#include <string>

namespace snn {

inline constexpr const char* kLibraryVersion = "0.1.0";

using Json = nlohmann::json;

Json operator_to_json(const BivectorOp& s, const std::string& frame_description = "orthonormal");
/// Inverse of operator_to_json; the result is bitwise equal to the input operator.
BivectorOp operator_from_json(const Json& j);

Json fourform_to_json(const FourForm& w);
FourForm fourform_from_json(const Json& j);

Json certificate_to_json(const Certificate& c, std::uint64_t seed);

Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

} // namespace snn
