#include "phcav/config.hpp"

#include "phcav/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace phcav
{
namespace
{
std::string trim(std::string_view s)
{
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    auto b = std::find_if_not(s.begin(), s.end(), is_space);
    auto e = std::find_if_not(s.rbegin(), std::string_view::reverse_iterator(b), is_space).base();
    return std::string(b, e);
}

double parse_double(const std::string &text, const std::string &what)
{
    if (text == "inf" || text == "+inf")
    {
        return std::numeric_limits<double>::infinity();
    }
    double value = 0.0;
    const char *first = text.data();
    const char *last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
    {
        throw ConfigError("key '" + what + "': expected a number, got '" + text + "'");
    }
    return value;
}
} // namespace

std::string ConfigSection::qualified(std::string_view key) const
{
    if (name_.empty())
    {
        return std::string(key);
    }
    return name_ + "." + std::string(key);
}

bool ConfigSection::has(std::string_view key) const
{
    return values_.find(std::string(key)) != values_.end();
}

const std::string &ConfigSection::raw(std::string_view key) const
{
    auto it = values_.find(std::string(key));
    if (it == values_.end())
    {
        throw ConfigError("missing required key '" + qualified(key) + "'");
    }
    return it->second;
}

std::string ConfigSection::get_string(std::string_view key) const
{
    return raw(key);
}

std::string ConfigSection::get_string(std::string_view key, std::string_view fallback) const
{
    return has(key) ? raw(key) : std::string(fallback);
}

double ConfigSection::get_double(std::string_view key) const
{
    return parse_double(raw(key), qualified(key));
}

double ConfigSection::get_double(std::string_view key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

long ConfigSection::get_int(std::string_view key) const
{
    const std::string &text = raw(key);
    long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
    {
        throw ConfigError("key '" + qualified(key) + "': expected an integer, got '" + text + "'");
    }
    return value;
}

long ConfigSection::get_int(std::string_view key, long fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

bool ConfigSection::get_bool(std::string_view key, bool fallback) const
{
    if (!has(key))
    {
        return fallback;
    }
    const std::string &text = raw(key);
    if (text == "true" || text == "yes" || text == "1")
    {
        return true;
    }
    if (text == "false" || text == "no" || text == "0")
    {
        return false;
    }
    throw ConfigError("key '" + qualified(key) + "': expected true/false, got '" + text + "'");
}

void ConfigSection::require_known(const std::vector<std::string_view> &allowed) const
{
    for (const auto &[key, value] : values_)
    {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        {
            throw ConfigError("unknown key '" + qualified(key) + "' (line " +
                              std::to_string(lines_.at(key)) + ")");
        }
    }
}

void ConfigSection::set(const std::string &key, const std::string &value, int line)
{
    if (has(key))
    {
        throw ConfigError("duplicate key '" + qualified(key) + "' (line " + std::to_string(line) + ")");
    }
    values_[key] = value;
    lines_[key] = line;
}

Config Config::parse(std::string_view text, std::string source)
{
    Config cfg;
    cfg.text_ = std::string(text);
    cfg.source_ = std::move(source);
    cfg.sections_.emplace_back("", 0);

    std::istringstream in(cfg.text_);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos)
        {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty())
        {
            continue;
        }
        if (body.front() == '[')
        {
            if (body.back() != ']')
            {
                throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": malformed section header");
            }
            std::string name = trim(std::string_view(body).substr(1, body.size() - 2));
            const int index = static_cast<int>(std::count_if(cfg.sections_.begin(), cfg.sections_.end(),
                                                             [&](const ConfigSection &s) { return s.name() == name; }));
            cfg.sections_.emplace_back(std::move(name), index);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos)
        {
            throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty())
        {
            throw ConfigError(cfg.source_ + ":" + std::to_string(line_no) + ": empty key");
        }
        cfg.sections_.back().set(key, value, line_no);
    }
    return cfg;
}

Config Config::load(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    Config cfg = parse(buf.str(), path.string());
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return cfg;
}

const ConfigSection &Config::section(std::string_view name) const
{
    if (const ConfigSection *s = find(name))
    {
        return *s;
    }
    throw ConfigError("missing required section [" + std::string(name) + "]");
}

const ConfigSection *Config::find(std::string_view name) const
{
    for (const auto &s : sections_)
    {
        if (s.name() == name)
        {
            return &s;
        }
    }
    return nullptr;
}

std::vector<const ConfigSection *> Config::all(std::string_view name) const
{
    std::vector<const ConfigSection *> out;
    for (const auto &s : sections_)
    {
        if (s.name() == name)
        {
            out.push_back(&s);
        }
    }
    return out;
}

std::filesystem::path Config::resolve(const std::string &file) const
{
    std::filesystem::path p(file);
    if (p.is_absolute() || base_dir_.empty())
    {
        return p;
    }
    return base_dir_ / p;
}

void Config::require_sections(const std::vector<std::string_view> &allowed) const
{
    for (const auto &s : sections_)
    {
        if (s.name().empty() && s.values().empty())
        {
            continue;
        }
        if (std::find(allowed.begin(), allowed.end(), s.name()) == allowed.end())
        {
            throw ConfigError("unknown section [" + s.name() + "] in " + source_);
        }
    }
}

} // namespace phcav
