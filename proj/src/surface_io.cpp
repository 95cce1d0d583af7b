#include "slhjb/surface_io.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slhjb {

using nlohmann::json;

namespace {

constexpr const char* kMagic = "slhjb-surface 1";

const char* interp_name(InterpKind k) {
    return k == InterpKind::linear ? "linear" : "pchip";
}
const char* stepper_name(StepperKind k) {
    return k == StepperKind::euler ? "euler" : "weak2";
}
const char* extrap_name(Extrapolation e) {
    switch (e) {
        case Extrapolation::clamp: return "clamp";
        case Extrapolation::linear: return "linear";
        case Extrapolation::payoff_asymptotic: return "payoff";
    }
    return "clamp";
}

InterpKind interp_from(const std::string& s) {
    if (s == "linear")
        return InterpKind::linear;
    if (s == "pchip")
        return InterpKind::pchip;
    throw Error(ErrorCode::io, "bad interp tag '" + s + "'");
}
StepperKind stepper_from(const std::string& s) {
    if (s == "euler")
        return StepperKind::euler;
    if (s == "weak2")
        return StepperKind::weak2;
    throw Error(ErrorCode::io, "bad stepper tag '" + s + "'");
}
Extrapolation extrap_from(const std::string& s) {
    if (s == "clamp")
        return Extrapolation::clamp;
    if (s == "linear")
        return Extrapolation::linear;
    if (s == "payoff")
        return Extrapolation::payoff_asymptotic;
    throw Error(ErrorCode::io, "bad extrapolation tag '" + s + "'");
}

void write_hex(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%a", v);
    os << buf;
}

}  // namespace

void save_surface(const std::string& path, const ValueSurface& surface,
                  const SurfaceHeader& header) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");

    json grid_j = json::array();
    for (int a = 0; a < surface.grid.dim(); ++a) {
        const auto& ax = surface.grid.axis(a);
        grid_j.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"J", ax.intervals}});
    }
    json hdr{{"model", header.model_name},
             {"fingerprint", header.fingerprint},
             {"gh_order", header.gh_order},
             {"interp", interp_name(header.interp)},
             {"stepper", stepper_name(header.stepper)},
             {"version", header.tool_version},
             {"grid", grid_j},
             {"extrapolation", extrap_name(surface.grid.extrapolation())},
             {"N", surface.mesh.steps},
             {"T", surface.mesh.horizon}};

    out << kMagic << '\n' << hdr.dump() << '\n';
    for (int n = 0; n < static_cast<int>(surface.values.size()); ++n) {
        if (!surface.has_values(n))
            continue;
        out << "V " << n;
        for (double v : surface.values[n]) {
            out << ' ';
            write_hex(out, v);
        }
        out << '\n';
    }
    for (int n = 0; n < static_cast<int>(surface.policy.size()); ++n) {
        if (!surface.has_policy(n))
            continue;
        out << "P " << n;
        for (std::int32_t p : surface.policy[n])
            out << ' ' << p;
        out << '\n';
    }
    if (!surface.slice_lipschitz.empty()) {
        out << "L";
        for (double v : surface.slice_lipschitz) {
            out << ' ';
            write_hex(out, v);
        }
        out << '\n';
    }
    if (!out)
        throw Error(ErrorCode::io, "write failure on '" + path + "'");
}

LoadedSurface load_surface(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::io, "cannot open surface file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw Error(ErrorCode::io, "not a surface file: '" + path + "'");
    if (!std::getline(in, line))
        throw Error(ErrorCode::io, "missing surface header");

    json hdr;
    try {
        hdr = json::parse(line);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::io, std::string("bad surface header: ") + e.what());
    }

    LoadedSurface out;
    out.header.model_name = hdr.value("model", "");
    out.header.fingerprint = hdr.value("fingerprint", "");
    out.header.gh_order = hdr.value("gh_order", 2);
    out.header.interp = interp_from(hdr.value("interp", "linear"));
    out.header.stepper = stepper_from(hdr.value("stepper", "euler"));
    out.header.tool_version = hdr.value("version", "");

    std::vector<GridAxis> axes;
    for (const auto& ax : hdr.at("grid"))
        axes.push_back({ax.at("lo").get<double>(), ax.at("hi").get<double>(),
                        ax.at("J").get<int>()});
    out.surface.grid = Grid(std::move(axes),
                            extrap_from(hdr.value("extrapolation", "clamp")));
    out.surface.mesh = TimeMesh(hdr.at("N").get<int>(), hdr.at("T").get<double>());
    out.surface.values.resize(out.surface.mesh.steps + 1);
    out.surface.policy.resize(out.surface.mesh.steps);

    const std::size_t nodes = out.surface.grid.node_count();
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "V" || tag == "P") {
            int n;
            ss >> n;
            if (n < 0 || n > out.surface.mesh.steps)
                throw Error(ErrorCode::io, "slice index out of range in surface file");
            if (tag == "V") {
                auto& dst = out.surface.values[n];
                dst.reserve(nodes);
                std::string tok;
                while (ss >> tok)
                    dst.push_back(std::strtod(tok.c_str(), nullptr));
                if (dst.size() != nodes)
                    throw Error(ErrorCode::io, "value slice size mismatch");
            } else {
                if (n >= out.surface.mesh.steps)
                    throw Error(ErrorCode::io, "policy slice index out of range");
                auto& dst = out.surface.policy[n];
                dst.reserve(nodes);
                std::int32_t v;
                while (ss >> v)
                    dst.push_back(v);
                if (dst.size() != nodes)
                    throw Error(ErrorCode::io, "policy slice size mismatch");
            }
        } else if (tag == "L") {
            std::string tok;
            while (ss >> tok)
                out.surface.slice_lipschitz.push_back(std::strtod(tok.c_str(), nullptr));
        } else {
            throw Error(ErrorCode::io, "unknown record '" + tag + "' in surface file");
        }
    }
    return out;
}

namespace {

void format_error(std::ostream& os, double v) {
    if (std::isfinite(v)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6e", v);
        os << buf;
    } else {
        os << '-';
    }
}

void format_order(std::ostream& os, double v) {
    if (std::isfinite(v)) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        os << buf;
    } else {
        os << '-';
    }
}

}  // namespace

std::string report_csv(const ConvergenceReport& report) {
    std::ostringstream os;
    os << "k,N,J";
    for (std::size_t i = 0; i < report.intervals.size(); ++i)
        os << ",error_" << i + 1 << ",order_" << i + 1;
    os << ",cpu_s\n";
    for (const auto& row : report.rows) {
        os << row.k << ',' << row.N << ',' << row.J;
        for (std::size_t i = 0; i < report.intervals.size(); ++i) {
            os << ',';
            format_error(os, i < row.errors.size() ? row.errors[i]
                                                   : std::nan(""));
            os << ',';
            format_order(os, i < row.orders.size() ? row.orders[i]
                                                   : std::nan(""));
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", row.cpu_seconds);
        os << ',' << buf << '\n';
    }
    return os.str();
}

std::string surface_csv(const ValueSurface& surface) {
    if (surface.grid.dim() != 1)
        throw Error(ErrorCode::configuration, "surface CSV dump expects a 1-D surface");
    if (!surface.has_values(0))
        throw Error(ErrorCode::configuration, "surface lacks slice 0 values");
    std::ostringstream os;
    os << "x,s,V,policy\n";
    const auto& ax = surface.grid.axis(0);
    for (int m = 0; m <= ax.intervals; ++m) {
        const double x = surface.grid.node_coord(0, m);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.17g", x, std::exp(x),
                      surface.values[0][m]);
        os << buf << ','
           << (surface.has_policy(0) ? surface.policy[0][m] : -1) << '\n';
    }
    return os.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << content;
    if (!out)
        throw Error(ErrorCode::io, "write failure on '" + path + "'");
}

}  // namespace

void emit_csv(const ConvergenceReport& report, const std::string& path) {
    write_file(path, report_csv(report));
}

void emit_csv(const ValueSurface& surface, const std::string& path) {
    write_file(path, surface_csv(surface));
}

}  // namespace slhjb
