#include "vfilter/toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vfilter/errors.hpp"

namespace vfilter::toml {

double Value::number() const {
    if (kind == Kind::Int) return static_cast<double>(as_int);
    if (kind == Kind::Float) return as_float;
    throw domain_error("toml: value is not numeric");
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw domain_error("config line " + std::to_string(line) + ": " + msg);
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool bare_key_ok(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

// Drops a trailing comment, respecting basic-string quoting.
std::string cut_comment(const std::string& s, std::size_t line) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') ++i;
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    if (in_str) fail(line, "unterminated string");
    return s;
}

Value parse_scalar(const std::string& tok, std::size_t line) {
    Value v;
    if (tok.empty()) fail(line, "empty value");
    if (tok.front() == '"') {
        if (tok.size() < 2 || tok.back() != '"') fail(line, "unterminated string");
        v.kind = Value::Kind::Str;
        for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
            char c = tok[i];
            if (c == '\\') {
                if (i + 2 >= tok.size()) fail(line, "dangling escape");
                char e = tok[++i];
                switch (e) {
                    case '"': v.as_str += '"'; break;
                    case '\\': v.as_str += '\\'; break;
                    case 'n': v.as_str += '\n'; break;
                    case 't': v.as_str += '\t'; break;
                    default: fail(line, "unsupported escape");
                }
            } else {
                v.as_str += c;
            }
        }
        return v;
    }
    if (tok == "true" || tok == "false") {
        v.kind = Value::Kind::Bool;
        v.as_bool = tok == "true";
        return v;
    }
    bool looks_float = tok.find_first_of(".eE") != std::string::npos || tok == "inf" ||
                       tok == "+inf" || tok == "-inf" || tok == "nan";
    const char* begin = tok.c_str();
    char* end = nullptr;
    if (!looks_float) {
        long long iv = std::strtoll(begin, &end, 10);
        if (end == begin + tok.size()) {
            v.kind = Value::Kind::Int;
            v.as_int = iv;
            return v;
        }
    }
    double dv = std::strtod(begin, &end);
    if (end != begin + tok.size()) fail(line, "cannot parse value '" + tok + "'");
    v.kind = Value::Kind::Float;
    v.as_float = dv;
    return v;
}

// Splits an array body on commas outside strings; nesting is rejected.
std::vector<std::string> split_items(const std::string& body, std::size_t line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_str = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (in_str) {
            cur += c;
            if (c == '\\' && i + 1 < body.size()) cur += body[++i];
            else if (c == '"') in_str = false;
        } else if (c == '"') {
            in_str = true;
            cur += c;
        } else if (c == '[' || c == ']') {
            fail(line, "nested arrays are not supported");
        } else if (c == ',') {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    std::string last = strip(cur);
    if (!last.empty()) out.push_back(last);
    for (const std::string& s : out)
        if (s.empty()) fail(line, "empty array element");
    return out;
}

}  // namespace

Document parse(const std::string& text) {
    Document doc;
    std::string table;
    doc[table];
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = strip(cut_comment(raw, line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed table header");
            table = strip(s.substr(1, s.size() - 2));
            if (!bare_key_ok(table)) fail(line, "malformed table name");
            doc[table];
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        std::string key = strip(s.substr(0, eq));
        std::string val = strip(s.substr(eq + 1));
        if (!bare_key_ok(key)) fail(line, "malformed key");
        if (val.empty()) fail(line, "missing value");
        if (doc[table].count(key)) fail(line, "duplicate key '" + key + "'");
        if (val.front() == '[') {
            if (val.back() != ']') fail(line, "unterminated array");
            Value arr;
            arr.kind = Value::Kind::Array;
            for (const std::string& item : split_items(val.substr(1, val.size() - 2), line))
                arr.items.push_back(parse_scalar(item, line));
            doc[table][key] = std::move(arr);
        } else {
            doc[table][key] = parse_scalar(val, line);
        }
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw domain_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const Value* find(const Document& doc, const std::string& table, const std::string& key) {
    auto t = doc.find(table);
    if (t == doc.end()) return nullptr;
    auto v = t->second.find(key);
    if (v == t->second.end()) return nullptr;
    return &v->second;
}

namespace {
[[noreturn]] void missing(const std::string& table, const std::string& key) {
    throw domain_error("config: missing required key " +
                       (table.empty() ? key : table + "." + key));
}
}  // namespace

double need_number(const Document& doc, const std::string& table, const std::string& key) {
    const Value* v = find(doc, table, key);
    if (!v) missing(table, key);
    return v->number();
}

double opt_number(const Document& doc, const std::string& table, const std::string& key,
                  double fallback) {
    const Value* v = find(doc, table, key);
    return v ? v->number() : fallback;
}

std::int64_t need_int(const Document& doc, const std::string& table, const std::string& key) {
    const Value* v = find(doc, table, key);
    if (!v) missing(table, key);
    if (v->kind != Value::Kind::Int) throw domain_error("config: " + key + " must be an integer");
    return v->as_int;
}

std::int64_t opt_int(const Document& doc, const std::string& table, const std::string& key,
                     std::int64_t fallback) {
    const Value* v = find(doc, table, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Int) throw domain_error("config: " + key + " must be an integer");
    return v->as_int;
}

std::string need_str(const Document& doc, const std::string& table, const std::string& key) {
    const Value* v = find(doc, table, key);
    if (!v) missing(table, key);
    if (v->kind != Value::Kind::Str) throw domain_error("config: " + key + " must be a string");
    return v->as_str;
}

std::string opt_str(const Document& doc, const std::string& table, const std::string& key,
                    const std::string& fallback) {
    const Value* v = find(doc, table, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Str) throw domain_error("config: " + key + " must be a string");
    return v->as_str;
}

bool opt_bool(const Document& doc, const std::string& table, const std::string& key,
              bool fallback) {
    const Value* v = find(doc, table, key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Bool) throw domain_error("config: " + key + " must be a bool");
    return v->as_bool;
}

std::vector<double> opt_numbers(const Document& doc, const std::string& table,
                                const std::string& key) {
    const Value* v = find(doc, table, key);
    std::vector<double> out;
    if (!v) return out;
    if (v->kind != Value::Kind::Array) throw domain_error("config: " + key + " must be an array");
    for (const Value& item : v->items) out.push_back(item.number());
    return out;
}

std::vector<std::int64_t> opt_ints(const Document& doc, const std::string& table,
                                   const std::string& key) {
    const Value* v = find(doc, table, key);
    std::vector<std::int64_t> out;
    if (!v) return out;
    if (v->kind != Value::Kind::Array) throw domain_error("config: " + key + " must be an array");
    for (const Value& item : v->items) {
        if (item.kind != Value::Kind::Int)
            throw domain_error("config: " + key + " must hold integers");
        out.push_back(item.as_int);
    }
    return out;
}

}  // namespace vfilter::toml
