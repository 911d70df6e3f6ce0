#include "updown/io.hpp"

#include "updown/error.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#ifndef UPDOWN_VERSION
#define UPDOWN_VERSION "0.0.0"
#endif
#ifndef UPDOWN_GIT_DESCRIBE
#define UPDOWN_GIT_DESCRIBE "unknown"
#endif

namespace updown::io {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return parts;
        start = pos + 1;
    }
}

struct RangeParts {
    std::string_view start, end, step;
    bool has_step = false;
};

std::optional<RangeParts> split_range(std::string_view text) {
    const std::size_t dots = text.find("..");
    if (dots == std::string_view::npos) return std::nullopt;
    RangeParts r;
    r.start = text.substr(0, dots);
    std::string_view rest = text.substr(dots + 2);
    const std::size_t colon = rest.find(':');
    if (colon != std::string_view::npos) {
        r.end = rest.substr(0, colon);
        r.step = rest.substr(colon + 1);
        r.has_step = true;
    } else {
        r.end = rest;
    }
    return r;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::vector<Rational> parse_rational_grid(std::string_view text) {
    if (text.empty()) throw InvalidArgument("empty grid");
    std::vector<Rational> values;
    if (const auto r = split_range(text)) {
        if (!r->has_step) throw InvalidArgument("grid '" + std::string(text) + "' needs a step (start..end:step)");
        const Rational a = parse_rational(r->start);
        const Rational b = parse_rational(r->end);
        const Rational s = parse_rational(r->step);
        if (s <= 0) throw InvalidArgument("grid step must be positive");
        if (b < a) throw InvalidArgument("grid end precedes start");
        for (Rational v = a; v <= b; v += s) values.push_back(v);
        return values;
    }
    for (std::string_view part : split(text, ',')) values.push_back(parse_rational(part));
    return values;
}

std::vector<long> parse_integer_grid(std::string_view text) {
    std::vector<long> out;
    std::string with_step(text);
    if (const auto r = split_range(text); r && !r->has_step) with_step += ":1";
    for (const Rational& q : parse_rational_grid(with_step)) {
        if (q.get_den() != 1 || !q.get_num().fits_slong_p()) throw InvalidArgument("grid '" + std::string(text) + "' must contain integers");
        out.push_back(q.get_num().get_si());
    }
    return out;
}

std::vector<GridPoint> parse_real_grid(std::string_view text) {
    std::vector<GridPoint> out;
    const auto r = split_range(text);
    if (r && !r->has_step) {
        std::string_view end = r->end;
        long count = 50;
        if (const std::size_t star = end.find('*'); star != std::string_view::npos) {
            const Rational c = parse_rational_strict(end.substr(star + 1));
            if (c.get_den() != 1 || c < 2 || c > 100000) throw InvalidArgument("log-spaced point count must be an integer in [2, 100000]");
            count = c.get_num().get_si();
            end = end.substr(0, star);
        }
        const Rational a = parse_rational(r->start);
        const Rational b = parse_rational(end);
        if (a <= 0 || b <= a) throw InvalidArgument("log-spaced grid needs 0 < start < end");
        const double la = std::log(to_double(a));
        const double lb = std::log(to_double(b));
        for (long i = 0; i < count; ++i) {
            std::ostringstream v;
            v.precision(17);
            if (i == 0) {
                v << to_string(a);
            } else if (i == count - 1) {
                v << to_string(b);
            } else {
                v << std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(count - 1));
            }
            out.push_back({v.str(), v.str()});
        }
        return out;
    }
    for (const Rational& q : parse_rational_grid(text)) out.push_back({to_decimal_string(q), to_string(q)});
    return out;
}

std::string RunManifest::to_json(const std::filesystem::path& manifest_path) const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["master_seed"] = master_seed;
    j["tool_version"] = tool_version;
    j["outputs"] = nlohmann::ordered_json::array();
    const std::filesystem::path base = std::filesystem::absolute(manifest_path).parent_path();
    for (const auto& p : outputs) {
        j["outputs"].push_back(std::filesystem::absolute(p).lexically_relative(base).generic_string());
    }
    return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& manifest_path) const {
    write_file_atomic(manifest_path, to_json(manifest_path));
}

std::string tool_version() {
    return std::string(UPDOWN_VERSION) + "+" + UPDOWN_GIT_DESCRIBE;
}

}  // namespace updown::io
