#pragma once

#include "mobisim/sim_time.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mobisim {

/// Every magnitude the matrix presets depend on, keyed `section.name`.
///
/// Compiled-in defaults match config/defaults.ini; a file or `key=value`
/// overrides replace individual entries. Unknown keys are rejected.
class Presets {
public:
    struct Entry {
        std::string key;
        std::string value;
        std::string doc;
    };

    Presets();

    void set(const std::string& key, const std::string& value);
    /// Parses `key=value`.
    void set_assignment(const std::string& assignment);
    void load_ini(std::istream& in);
    void write_ini(std::ostream& out) const;

    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    SimTime seconds(const std::string& key) const;
    SimTime millis(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;

    const std::vector<Entry>& entries() const { return entries_; }

private:
    Entry& find(const std::string& key);
    const Entry& find(const std::string& key) const;

    std::vector<Entry> entries_;
    std::map<std::string, std::size_t> index_;
};

}  // namespace mobisim
