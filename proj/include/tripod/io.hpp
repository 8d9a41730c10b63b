#ifndef TRIPOD_IO_HPP
#define TRIPOD_IO_HPP

// Text configuration ([section] + key = value) and deterministic CSV output.
// CSV numbers are printed with 9 significant digits, '.' decimal separator,
// comma delimiter and Unix newlines; every file starts with a header comment
// carrying the config hash and the unit conventions, so identical runs are
// bit-identical.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tripod/errors.hpp"

namespace tripod {

struct io_error : error {
    explicit io_error(const std::string& msg) : error(msg) {}
};

struct config_error : error {
    explicit config_error(const std::string& msg) : error(msg) {}
};

// Flat key-value store with "section.key" keys.
class Config {
  public:
    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    double get_number(const std::string& key, double fallback) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            while (pos < it->second.size() && std::isspace(static_cast<unsigned char>(it->second[pos]))) ++pos;
            if (pos != it->second.size())
                throw config_error("config: key '" + key + "' has a non-numeric value '" +
                                   it->second + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw config_error("config: key '" + key + "' has a non-numeric value '" +
                               it->second + "'");
        } catch (const std::out_of_range&) {
            throw config_error("config: key '" + key + "' is out of range");
        }
    }

    long get_integer(const std::string& key, long fallback) const {
        const double v = get_number(key, static_cast<double>(fallback));
        const long r = static_cast<long>(v);
        if (static_cast<double>(r) != v)
            throw config_error("config: key '" + key + "' must be an integer");
        return r;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

    // Canonical serialization (sorted key=value lines) used for hashing.
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : kv_) {
            out += k;
            out += '=';
            out += v;
            out += '\n';
        }
        return out;
    }

    std::uint64_t hash() const {  // FNV-1a 64
        std::uint64_t h = 1469598103934665603ull;
        for (const char c : canonical()) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return h;
    }

    static Config parse(std::istream& in, const std::string& origin = "<stream>") {
        Config cfg;
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash_pos = line.find('#');
            if (hash_pos != std::string::npos) line.erase(hash_pos);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            if (trimmed.front() == '[') {
                if (trimmed.back() != ']')
                    throw config_error(origin + ":" + std::to_string(lineno) +
                                       ": malformed section header");
                section = trim(trimmed.substr(1, trimmed.size() - 2));
                continue;
            }
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.set(section.empty() ? key : section + "." + key, value);
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file '" + path + "'");
        return parse(in, path);
    }

  private:
    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    std::map<std::string, std::string> kv_;
};

// 9 significant digits, locale-independent.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns,
              std::uint64_t config_hash,
              const std::string& units = "time=us, length=um, frequency=rad/us") {
        out_.open(path, std::ios::binary);  // binary: exactly \n everywhere
        if (!out_) throw io_error("cannot open output file '" + path + "'");
        char hash_buf[32];
        std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                      static_cast<unsigned long long>(config_hash));
        out_ << "# config_hash=" << hash_buf << "; units: " << units << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
        ncols_ = columns.size();
    }

    void row(const std::vector<double>& values) {
        if (values.size() != ncols_)
            throw io_error("csv row has wrong number of columns");
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_number(values[i]);
        out_ << "\n";
        if (!out_) throw io_error("csv write failed");
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  private:
    std::ofstream out_;
    std::size_t ncols_ = 0;
};

} // namespace tripod

#endif
