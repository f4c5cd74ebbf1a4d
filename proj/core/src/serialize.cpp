#include "rarexact/serialize.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "json.hpp"

#ifndef RAREXACT_VERSION
#define RAREXACT_VERSION "0.0.0"
#endif

namespace rarexact {

using nlohmann::ordered_json;

std::string version() { return RAREXACT_VERSION; }

namespace {

constexpr char kMagic[8] = {'R', 'X', 'P', 'W', 'T', '0', '0', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = std::bit_cast<U>(v);
  unsigned char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), sizeof b);
}

template <class T>
T get_le(std::istream& is) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char b[sizeof(U)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof b)) throw IoError("path table: truncated file");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(b[i]) << (8 * i);
  return std::bit_cast<T>(u);
}

ordered_json parse(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
}

// Statistic values may be infinite; JSON carries them as strings.
ordered_json stat_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

std::optional<double> stat_from(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw IoError("rule: invalid statistic value " + s);
  }
  return j.get<double>();
}

ordered_json bracket_json(const SupBracket& b) {
  return ordered_json{{"lower", b.lower}, {"upper", b.upper}, {"argmax", b.argmax}};
}

SupBracket bracket_from(const ordered_json& j) {
  return SupBracket{j.at("lower").get<double>(), j.at("upper").get<double>(), j.at("argmax").get<double>()};
}

}  // namespace

void write_path_table(std::ostream& os, const PathWeightTable& g) {
  os.write(kMagic, sizeof kMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.n));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.burn_in));
  put_le<double>(os, g.p);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(g.policy.size()));
  os.write(g.policy.data(), static_cast<std::streamsize>(g.policy.size()));
  put_le<std::uint64_t>(os, g.log_g.size());
  for (double v : g.log_g) put_le<double>(os, v);
  if (!os) throw IoError("path table: write failed");
}

PathWeightTable read_path_table(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw IoError("path table: bad magic");
  PathWeightTable g;
  g.n = static_cast<int>(get_le<std::uint32_t>(is));
  g.burn_in = static_cast<int>(get_le<std::uint32_t>(is));
  g.p = get_le<double>(is);
  const auto len = get_le<std::uint32_t>(is);
  g.policy.resize(len);
  if (!is.read(g.policy.data(), len)) throw IoError("path table: truncated descriptor");
  const auto count = get_le<std::uint64_t>(is);
  if (2 * g.burn_in > g.n || count != g.layer().size()) throw IoError("path table: inconsistent header");
  g.log_g.resize(count);
  for (auto& v : g.log_g) v = get_le<double>(is);
  return g;
}

std::string policy_table_to_json(const PolicyTable& table, const std::string& meta) {
  ordered_json j;
  j["meta"] = parse(meta);
  j["n"] = table.horizon();
  j["burn_in"] = table.burn_in();
  j["p"] = table.p();
  ordered_json layers = ordered_json::array();
  for (int t = 0; t < table.horizon(); ++t) {
    ordered_json row = ordered_json::array();
    for (auto c : table.layer_codes(t)) row.push_back(c == PolicyTable::kBurnIn ? -1 : static_cast<int>(c));
    layers.push_back(std::move(row));
  }
  j["layers"] = std::move(layers);
  return j.dump() + "\n";
}

PolicyTable policy_table_from_json(const std::string& text) {
  const auto j = parse(text);
  try {
    PolicyTable table(j.at("n").get<int>(), j.at("burn_in").get<int>(), j.at("p").get<double>());
    const auto& layers = j.at("layers");
    if (static_cast<int>(layers.size()) != table.horizon()) throw IoError("policy table: layer count mismatch");
    for (int t = 0; t < table.horizon(); ++t) {
      auto codes = table.layer_codes(t);
      const auto& row = layers[t];
      if (row.size() != codes.size()) throw IoError("policy table: layer size mismatch");
      const bool burn = t < 2 * table.burn_in();
      for (std::size_t i = 0; i < codes.size(); ++i) {
        const int c = row[i].get<int>();
        if (burn ? c != -1 : (c < 0 || c > 2)) throw IoError("policy table: invalid action code");
        codes[i] = burn ? PolicyTable::kBurnIn : static_cast<std::uint8_t>(c);
      }
    }
    return table;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("policy table: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("policy table: ") + e.what());
  }
}

std::string rule_to_json(const TestRule& rule, const std::string& meta) {
  ordered_json j;
  j["meta"] = parse(meta);
  j["kind"] = test_name(rule);
  std::visit([&](const auto& r) { j["alpha"] = r.alpha; }, rule);
  if (const auto* r = std::get_if<ConditionalRule>(&rule)) {
    j["n"] = r->n;
    ordered_json lo = ordered_json::array(), up = ordered_json::array();
    for (int s = 0; s <= r->n; ++s) {
      lo.push_back(stat_json(r->lower[s]));
      up.push_back(stat_json(r->upper[s]));
    }
    j["lower"] = lo;
    j["upper"] = up;
    j["audit"] = {{"lower_tail", bracket_json(r->lower_audit)}, {"upper_tail", bracket_json(r->upper_audit)}};
  } else if (const auto* r = std::get_if<UnconditionalRule>(&rule)) {
    j["n"] = r->n;
    j["lower"] = stat_json(r->lower);
    j["upper"] = stat_json(r->upper);
    j["audit"] = {{"lower_tail", bracket_json(r->lower_audit)}, {"upper_tail", bracket_json(r->upper_audit)}};
  } else if (const auto* r = std::get_if<GbRule>(&rule)) {
    j["n"] = r->n;
    j["threshold"] = r->threshold ? ordered_json(*r->threshold) : ordered_json(nullptr);
    j["excluded_floor"] = stat_json(r->excluded_floor);
    j["audit"] = bracket_json(r->audit);
    ordered_json pv = ordered_json::array();
    for (double v : r->p_value) pv.push_back(std::isnan(v) ? ordered_json(nullptr) : ordered_json(v));
    j["p_value"] = std::move(pv);
  }
  return j.dump() + "\n";
}

TestRule rule_from_json(const std::string& text) {
  const auto j = parse(text);
  try {
    const auto kind = j.at("kind").get<std::string>();
    const double alpha = j.at("alpha").get<double>();
    if (kind == "asymptotic") return AsymptoticRule{alpha};
    if (kind == "conditional") {
      ConditionalRule r;
      r.n = j.at("n").get<int>();
      r.alpha = alpha;
      for (const auto& v : j.at("lower")) r.lower.push_back(stat_from(v));
      for (const auto& v : j.at("upper")) r.upper.push_back(stat_from(v));
      if (static_cast<int>(r.lower.size()) != r.n + 1 || static_cast<int>(r.upper.size()) != r.n + 1)
        throw IoError("rule: stratum count mismatch");
      r.lower_audit = bracket_from(j.at("audit").at("lower_tail"));
      r.upper_audit = bracket_from(j.at("audit").at("upper_tail"));
      return r;
    }
    if (kind == "unconditional") {
      UnconditionalRule r;
      r.n = j.at("n").get<int>();
      r.alpha = alpha;
      r.lower = stat_from(j.at("lower"));
      r.upper = stat_from(j.at("upper"));
      r.lower_audit = bracket_from(j.at("audit").at("lower_tail"));
      r.upper_audit = bracket_from(j.at("audit").at("upper_tail"));
      return r;
    }
    if (kind == "gb") {
      GbRule r;
      r.n = j.at("n").get<int>();
      r.alpha = alpha;
      r.threshold = stat_from(j.at("threshold"));
      r.excluded_floor = *stat_from(j.at("excluded_floor"));
      r.audit = bracket_from(j.at("audit"));
      for (const auto& v : j.at("p_value"))
        r.p_value.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      return r;
    }
    throw IoError("rule: unknown kind " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("rule: ") + e.what());
  }
}

std::string audit_to_json(const AuditReport& audit, const DualState* dual, const std::string& meta) {
  ordered_json j;
  j["meta"] = parse(meta);
  j["objective"] = audit.objective;
  j["max_violation"] = audit.max_violation();
  ordered_json cs = ordered_json::array();
  for (const auto& c : audit.constraints)
    cs.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"sense", c.upper ? "<=" : ">="}});
  j["constraints"] = std::move(cs);
  if (dual) {
    j["multipliers"] = dual->multipliers;
    ordered_json hist = ordered_json::array();
    for (const auto& h : dual->history)
      hist.push_back({{"iteration", h.iteration},
                      {"objective", h.objective},
                      {"max_violation", h.max_violation},
                      {"lagrangian", h.lagrangian}});
    j["history"] = std::move(hist);
  }
  return j.dump(2) + "\n";
}

}  // namespace rarexact
