#ifndef MDIQKD_DATASET_IO_HPP
#define MDIQKD_DATASET_IO_HPP

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdiqkd/counts.hpp"
#include "mdiqkd/keyrate.hpp"
#include "mdiqkd/protocol.hpp"
#include "mdiqkd/simulator.hpp"

namespace mdiqkd::io {

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// CSV schema:
// channel_label, attenuation_db, basis_pair, class_a, class_b, bell,
// coincidences, error_rate_percent, pairs_emitted, flux_a, flux_b
//
// Error rates are stored as percentages (mirroring the bundled tables) and
// converted on load: error_coincidences = round(rate x coincidences / 100)
// for integral counts, exact product otherwise.
CountsDataset load_dataset(const std::string& path);
CountsDataset read_dataset(std::istream& in, const std::string& origin);
void save_dataset(const CountsDataset& data, const std::string& path);
void write_dataset(const CountsDataset& data, std::ostream& out);

struct RatePoint {
    std::string label;
    double attenuation_db = 0.0;
    double rate_bits_per_s = 0.0;
};

// One row per channel point: attenuation_db, distance at 0.2 dB/km, rate.
void write_rate_curve(const std::vector<RatePoint>& points, std::ostream& out);

// JSON run configuration for the simulator and distillation defaults.
// Unknown keys are rejected.
struct RunConfig {
    ProtocolConfig protocol;
    sim::DetectorModel detector;
    sim::ChannelConfig channel;
    sim::SimOptions simulation;
    std::optional<double> overlap_jitter_ps;      // overlap_from block, if given
    std::optional<double> overlap_bandwidth_ghz;
    double overlap_fwhm_ps = 35.0;
    keyrate::DistillOptions distillation;

    // Resolves overlap_from into simulation.overlap (m = sqrt(2 V)).
    void resolve_overlap();
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& text, const std::string& origin);

std::string report_to_json(const keyrate::KeyRateReport& report);
void print_report(const keyrate::KeyRateReport& report, std::ostream& out);

// CLI entry point (subcommands distill, simulate, visibility, bounds).
// Returns 0 on success, 1 on data errors, 2 on usage errors.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace mdiqkd::io

#endif
