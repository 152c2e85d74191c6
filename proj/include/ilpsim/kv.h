#ifndef ILPSIM_KV_H
#define ILPSIM_KV_H

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ilpsim {

// Error raised by the line-based `key = value` config format.
struct KvError : std::runtime_error {
    KvError(const std::string& what, int line) : std::runtime_error(what), line(line) {}
    int line;
};

// A parsed `key = value` file. Lines are `key = value`, blank, or `#` comments.
// Keys are unique; duplicate or malformed lines raise KvError with the line number.
class KvFile {
public:
    KvFile() = default;

    static KvFile parse_text(const std::string& text);
    static KvFile parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& def) const;
    long get_long(const std::string& key, long def) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
    double get_double(const std::string& key, double def) const;
    bool get_bool(const std::string& key, bool def) const;

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, long value);
    void set(const std::string& key, std::uint64_t value);
    void set(const std::string& key, bool value);

    // Rejects any key not in `known`; reports the offending key and its line.
    void require_known(const std::set<std::string>& known) const;

    // Serialization is sorted by key so output is byte-stable.
    std::string to_text() const;
    void write_file(const std::string& path) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;  // key -> source line, 0 if set programmatically
};

}  // namespace ilpsim

#endif
