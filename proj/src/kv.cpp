#include "ilpsim/kv.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ilpsim {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::parse_text(const std::string& text) {
    KvFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw KvError("line " + std::to_string(lineno) + ": expected `key = value`", lineno);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw KvError("line " + std::to_string(lineno) + ": empty key", lineno);
        if (kv.values_.count(key))
            throw KvError("line " + std::to_string(lineno) + ": duplicate key `" + key + "`",
                          lineno);
        kv.values_[key] = value;
        kv.lines_[key] = lineno;
    }
    return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw KvError("cannot open config file: " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

std::string KvFile::get_string(const std::string& key, const std::string& def) const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
}

long KvFile::get_long(const std::string& key, long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    char* end = nullptr;
    long v = std::strtol(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw KvError("line " + std::to_string(lines_.count(key) ? lines_.at(key) : 0) +
                          ": key `" + key + "`: not an integer: " + it->second,
                      lines_.count(key) ? lines_.at(key) : 0);
    return v;
}

std::uint64_t KvFile::get_u64(const std::string& key, std::uint64_t def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    char* end = nullptr;
    std::uint64_t v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw KvError("line " + std::to_string(lines_.count(key) ? lines_.at(key) : 0) +
                          ": key `" + key + "`: not an unsigned integer: " + it->second,
                      lines_.count(key) ? lines_.at(key) : 0);
    return v;
}

double KvFile::get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw KvError("key `" + key + "`: not a number: " + it->second,
                      lines_.count(key) ? lines_.at(key) : 0);
    return v;
}

bool KvFile::get_bool(const std::string& key, bool def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    const std::string& v = it->second;
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw KvError("key `" + key + "`: not a boolean: " + v,
                  lines_.count(key) ? lines_.at(key) : 0);
}

void KvFile::set(const std::string& key, const std::string& value) {
    values_[key] = value;
    lines_[key] = 0;
}

void KvFile::set(const std::string& key, long value) { set(key, std::to_string(value)); }
void KvFile::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
void KvFile::set(const std::string& key, bool value) {
    set(key, std::string(value ? "true" : "false"));
}

void KvFile::require_known(const std::set<std::string>& known) const {
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!known.count(key)) {
            int line = lines_.count(key) ? lines_.at(key) : 0;
            throw KvError("line " + std::to_string(line) + ": unknown key `" + key + "`", line);
        }
    }
}

std::string KvFile::to_text() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
    return out.str();
}

void KvFile::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw KvError("cannot write file: " + path, 0);
    out << to_text();
}

}  // namespace ilpsim
