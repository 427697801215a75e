#pragma once

// Line-oriented `section.key = value` run configuration. Every key has a
// registered default; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qles {

class RunConfig {
  public:
    /// All known keys with their defaults.
    RunConfig();

    /// Reads a config file; throws InputError listing every unknown key.
    void load_file(const std::filesystem::path& path);
    /// Parses text in the config format (`source` names it in messages).
    void load_text(const std::string& text, const std::string& source = "<text>");
    /// Applies one `key=value` override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool known(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    /// Comma-separated reals.
    std::vector<double> get_list(const std::string& key) const;
    /// A real, or `fallback` when the value is `auto`.
    double get_double_or(const std::string& key, double fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    static std::string help_text();

    std::string subcommand;

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace qles
