#include "riskflow/cli/result.hpp"

#include <cmath>
#include <cstdio>
#include <map>

namespace riskflow::cli {

using nlohmann::json;

namespace {

void newline(std::string& out, int indent, int depth) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * depth), ' ');
}

void write(const json& j, std::string& out, int indent, int depth) {
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            std::map<std::string, const json*> sorted;
            for (auto it = j.begin(); it != j.end(); ++it) sorted.emplace(it.key(), &it.value());
            out += '{';
            bool first = true;
            for (const auto& [k, v] : sorted) {
                if (!first) out += ',';
                first = false;
                newline(out, indent, depth + 1);
                out += json(k).dump();
                out += indent < 0 ? ":" : ": ";
                write(*v, out, indent, depth + 1);
            }
            newline(out, indent, depth);
            out += '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                newline(out, indent, depth + 1);
                write(v, out, indent, depth + 1);
            }
            newline(out, indent, depth);
            out += ']';
            return;
        }
        case json::value_t::number_float: {
            const double d = j.get<double>();
            if (!std::isfinite(d)) {
                out += "null";
                return;
            }
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            out += buf;
            return;
        }
        default: out += j.dump();
    }
}

}  // namespace

std::string canonical_dump(const json& j, int indent) {
    std::string out;
    write(j, out, indent, 0);
    return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string determinism_hash(const json& result) {
    json copy = result;
    if (copy.is_object()) {
        copy.erase("timestamp");
        copy.erase("wall_time_s");
        copy.erase("determinism_hash");
        if (copy.contains("config") && copy["config"].contains("output")) copy["config"]["output"].erase("dir");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_dump(copy, -1))));
    return buf;
}

json metric(const Estimate& e, const std::string& reason) {
    if (!std::isfinite(e.mean)) return {{"value", nullptr}, {"reason", reason}, {"n", e.n}};
    return {{"value", e.mean}, {"se", e.se}, {"ci", {e.ci_low, e.ci_high}}, {"n", e.n}};
}

json metric(double value, const std::string& reason) {
    if (!std::isfinite(value)) return {{"value", nullptr}, {"reason", reason}};
    return {{"value", value}};
}

}  // namespace riskflow::cli
