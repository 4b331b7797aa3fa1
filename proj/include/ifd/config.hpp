#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "ifd/common.hpp"

namespace ifd {

// Plain key=value run configuration. Flags parsed by the CLI override file
// entries; '#' starts a comment.
struct RunConfig {
    std::map<std::string, std::string> values;

    static RunConfig from_file(const std::string& path) {
        std::ifstream f(path);
        require(f.good(), Errc::io_error, "cannot open config: " + path);
        RunConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(f, line)) {
            ++lineno;
            const size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const size_t eq = line.find('=');
            if (eq == std::string::npos) {
                bool blank = true;
                for (char c : line)
                    if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
                require(blank, Errc::io_error,
                        path + ":" + std::to_string(lineno) + ": expected key=value");
                continue;
            }
            cfg.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { values[key] = value; }
    bool has(const std::string& key) const { return values.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }
    double get_double(const std::string& key, double fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : std::stod(it->second);
    }
    long get_int(const std::string& key, long fallback) const {
        const auto it = values.find(key);
        return it == values.end() ? fallback : std::stol(it->second);
    }

    static std::string trim(std::string s) {
        const auto notspace = [](unsigned char c) { return !std::isspace(c); };
        s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
        s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
        return s;
    }
};

inline std::string default_data_dir() {
    const char* env = std::getenv("IFD_DATA_DIR");
    return env ? std::string(env) : std::string(".");
}

}  // namespace ifd
