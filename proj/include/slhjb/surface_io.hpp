#ifndef SLHJB_SURFACE_IO_HPP
#define SLHJB_SURFACE_IO_HPP

/// Value-surface persistence: a line-oriented text format with hexfloat
/// payloads so a save/load round trip reproduces every value bit-exactly.
/// Carries slice 0 (values and policy) plus the terminal slice, or every
/// recorded slice on request.

#include "slhjb/analytics.hpp"
#include "slhjb/solver.hpp"

#include <string>

namespace slhjb {

struct SurfaceHeader {
    std::string model_name;
    std::string fingerprint;  // model parameter digest
    int gh_order = 2;
    InterpKind interp = InterpKind::linear;
    StepperKind stepper = StepperKind::euler;
    std::string tool_version;
};

void save_surface(const std::string& path, const ValueSurface& surface,
                  const SurfaceHeader& header);

struct LoadedSurface {
    ValueSurface surface;
    SurfaceHeader header;
};

LoadedSurface load_surface(const std::string& path);

// CSV emission. Errors use scientific notation; unavailable entries render
// as '-'. The surface dump has columns (x, s, V, policy) over slice 0.
void emit_csv(const ConvergenceReport& report, const std::string& path);
void emit_csv(const ValueSurface& surface, const std::string& path);
std::string report_csv(const ConvergenceReport& report);
std::string surface_csv(const ValueSurface& surface);

}  // namespace slhjb

#endif  // SLHJB_SURFACE_IO_HPP
