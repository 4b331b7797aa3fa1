#pragma once

#include <stdexcept>
#include <string>

namespace ifd {

// Failure conditions surfaced by the pipeline. One enum across modules so
// callers can switch on the condition without catching per-module types.
enum class Errc {
    // ingest / container
    bad_magic,
    truncated_file,
    dimension_mismatch,
    length_mismatch,
    io_error,
    corrupt_container,
    // image pipeline
    empty_mask,
    empty_domain,
    empty_component,
    // meshing
    no_solid_pixels,
    no_pressure_interface,
    no_fixed_nodes,
    // fem
    inverted_element,
    newton_diverged,
    singular_system,
    simulation_failed,
    // descriptors
    empty_cloud,
    degenerate_cloud,
    degenerate_polygon,
    chord_failure,
    // diffusion / denoiser
    shape_mismatch,
    non_finite_state,
    non_finite_params,
    // trainer
    constant_component,
    non_finite_loss,
    descriptor_kind_mismatch,
    // experiments
    degenerate_data,
    kind_mismatch,
    no_successes,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::bad_magic: return "BadMagic";
        case Errc::truncated_file: return "TruncatedFile";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::length_mismatch: return "LengthMismatch";
        case Errc::io_error: return "IoError";
        case Errc::corrupt_container: return "CorruptContainer";
        case Errc::empty_mask: return "EmptyMask";
        case Errc::empty_domain: return "EmptyDomain";
        case Errc::empty_component: return "EmptyComponent";
        case Errc::no_solid_pixels: return "NoSolidPixels";
        case Errc::no_pressure_interface: return "NoPressureInterface";
        case Errc::no_fixed_nodes: return "NoFixedNodes";
        case Errc::inverted_element: return "InvertedElement";
        case Errc::newton_diverged: return "NewtonDiverged";
        case Errc::singular_system: return "SingularSystem";
        case Errc::simulation_failed: return "SimulationFailed";
        case Errc::empty_cloud: return "EmptyCloud";
        case Errc::degenerate_cloud: return "DegenerateCloud";
        case Errc::degenerate_polygon: return "DegeneratePolygon";
        case Errc::chord_failure: return "ChordFailure";
        case Errc::shape_mismatch: return "ShapeMismatch";
        case Errc::non_finite_state: return "NonFiniteState";
        case Errc::non_finite_params: return "NonFiniteParams";
        case Errc::constant_component: return "ConstantComponent";
        case Errc::non_finite_loss: return "NonFiniteLoss";
        case Errc::descriptor_kind_mismatch: return "DescriptorKindMismatch";
        case Errc::degenerate_data: return "DegenerateData";
        case Errc::kind_mismatch: return "KindMismatch";
        case Errc::no_successes: return "NoSuccesses";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace ifd
