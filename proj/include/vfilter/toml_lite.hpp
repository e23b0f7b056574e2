#pragma once

// Small TOML subset: comments, one level of [table] headers, and
// key = scalar | array-of-scalars. Enough for run configs, nothing more.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vfilter::toml {

struct Value {
    enum class Kind { Int, Float, Str, Bool, Array } kind = Kind::Int;
    std::int64_t as_int = 0;
    double as_float = 0.0;
    std::string as_str;
    bool as_bool = false;
    std::vector<Value> items;

    double number() const;  // Int or Float, widened
};

using Table = std::map<std::string, Value>;
using Document = std::map<std::string, Table>;  // root table keyed by ""

Document parse(const std::string& text);
Document parse_file(const std::string& path);

// Lookup helpers; "need" variants throw domain_error naming table.key.
const Value* find(const Document& doc, const std::string& table, const std::string& key);
double need_number(const Document& doc, const std::string& table, const std::string& key);
double opt_number(const Document& doc, const std::string& table, const std::string& key,
                  double fallback);
std::int64_t need_int(const Document& doc, const std::string& table, const std::string& key);
std::int64_t opt_int(const Document& doc, const std::string& table, const std::string& key,
                     std::int64_t fallback);
std::string need_str(const Document& doc, const std::string& table, const std::string& key);
std::string opt_str(const Document& doc, const std::string& table, const std::string& key,
                    const std::string& fallback);
bool opt_bool(const Document& doc, const std::string& table, const std::string& key,
              bool fallback);
std::vector<double> opt_numbers(const Document& doc, const std::string& table,
                                const std::string& key);
std::vector<std::int64_t> opt_ints(const Document& doc, const std::string& table,
                                   const std::string& key);

}  // namespace vfilter::toml
