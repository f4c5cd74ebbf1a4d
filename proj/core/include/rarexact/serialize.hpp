#pragma once

#include <iosfwd>
#include <string>

#include "rarexact/cmdp.hpp"
#include "rarexact/oc.hpp"
#include "rarexact/path_engine.hpp"
#include "rarexact/policy.hpp"

namespace rarexact {

std::string version();

/// Thrown for unreadable or malformed files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary layout: magic "RXPWT001", u32 n, u32 b, f64 p, u32 descriptor
/// length, descriptor bytes (UTF-8 JSON), u64 count, count f64 log-weights.
/// All integers and floats little-endian.
void write_path_table(std::ostream& os, const PathWeightTable& g);
PathWeightTable read_path_table(std::istream& is);

/// JSON: {"n", "burn_in", "p", "layers": [[codes...], ...]} with -1 marking
/// burn-in entries. `meta` is an optional JSON object embedded verbatim.
std::string policy_table_to_json(const PolicyTable& table, const std::string& meta = "{}");
PolicyTable policy_table_from_json(const std::string& text);

/// JSON rule document: kind, alpha, critical values, audit suprema.
std::string rule_to_json(const TestRule& rule, const std::string& meta = "{}");
TestRule rule_from_json(const std::string& text);

std::string audit_to_json(const AuditReport& audit, const DualState* dual, const std::string& meta = "{}");

}  // namespace rarexact
