#pragma once

namespace fracbound {

inline constexpr const char* kToolVersion = "0.1.0";

// Persisted scan file schema. Bump on any incompatible format change.
inline constexpr unsigned char kScanSchemaVersion = 1;

}  // namespace fracbound
