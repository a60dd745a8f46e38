#include "mdiqkd/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mdiqkd/optics.hpp"

namespace mdiqkd::io {

namespace {

constexpr const char* kHeader =
    "channel_label,attenuation_db,basis_pair,class_a,class_b,bell,coincidences,"
    "error_rate_percent,pairs_emitted,flux_a,flux_b";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& origin, int line,
                    const char* field) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw IoError(origin + ":" + std::to_string(line) + ": bad " + field + " '" + s + "'");
    return value;
}

// Shortest representation that round-trips.
std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

bool is_integral(double v) { return std::floor(v) == v && std::abs(v) < 1e15; }

}  // namespace

CountsDataset read_dataset(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(origin + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw IoError(origin + ":1: unexpected header (expected '" + kHeader + "')");

    CountsDataset data;
    int lineno = 1;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 11)
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected 11 fields, got " +
                          std::to_string(f.size()));
        CountsRecord rec;
        const double att = parse_double(f[1], origin, lineno, "attenuation_db");
        if (first) {
            data.channel_label = f[0];
            data.attenuation_db = att;
            first = false;
        } else if (f[0] != data.channel_label || att != data.attenuation_db) {
            throw IoError(origin + ":" + std::to_string(lineno) +
                          ": channel label/attenuation differ from the first record");
        }
        if (f[2] == "ZZ") {
            rec.basis = Basis::Z;
        } else if (f[2] == "XX") {
            rec.basis = Basis::X;
        } else {
            throw IoError(origin + ":" + std::to_string(lineno) + ": bad basis_pair '" + f[2] +
                          "'");
        }
        const auto ca = intensity_label_from_string(f[3]);
        const auto cb = intensity_label_from_string(f[4]);
        if (!ca || !cb)
            throw IoError(origin + ":" + std::to_string(lineno) + ": bad intensity class");
        rec.class_a = *ca;
        rec.class_b = *cb;
        if (f[5] == "singlet") {
            rec.bell = BellOutcome::Singlet;
        } else if (f[5] == "triplet") {
            rec.bell = BellOutcome::Triplet;
        } else if (f[5] == "merged") {
            rec.bell.reset();
        } else {
            throw IoError(origin + ":" + std::to_string(lineno) + ": bad bell label '" + f[5] +
                          "'");
        }
        rec.coincidences = parse_double(f[6], origin, lineno, "coincidences");
        const double rate = parse_double(f[7], origin, lineno, "error_rate_percent");
        if (rate < 0.0 || rate > 100.0)
            throw IoError(origin + ":" + std::to_string(lineno) + ": record " + f[2] + " " +
                          f[3] + "," + f[4] + " " + f[5] + ": error_rate_percent " + f[7] +
                          " outside [0,100]");
        const double raw_err = rate * rec.coincidences / 100.0;
        rec.error_coincidences = is_integral(rec.coincidences) ? std::round(raw_err) : raw_err;
        rec.pairs_emitted = parse_double(f[8], origin, lineno, "pairs_emitted");
        rec.flux_a = parse_double(f[9], origin, lineno, "flux_a");
        rec.flux_b = parse_double(f[10], origin, lineno, "flux_b");
        data.records.push_back(rec);
    }
    if (data.records.empty()) throw IoError(origin + ": no records");
    try {
        data.validate();
    } catch (const std::exception& e) {
        throw IoError(origin + ": " + e.what());
    }
    return data;
}

CountsDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    return read_dataset(in, path);
}

void write_dataset(const CountsDataset& data, std::ostream& out) {
    out << kHeader << "\n";
    for (const auto& r : data.records) {
        const double rate =
            r.coincidences > 0.0 ? 100.0 * r.error_coincidences / r.coincidences : 0.0;
        out << data.channel_label << ',' << format_double(data.attenuation_db) << ','
            << (r.basis == Basis::Z ? "ZZ" : "XX") << ',' << to_string(r.class_a) << ','
            << to_string(r.class_b) << ',' << (r.bell ? to_string(*r.bell) : "merged") << ','
            << format_double(r.coincidences) << ',' << format_double(rate) << ','
            << format_double(r.pairs_emitted) << ',' << format_double(r.flux_a) << ','
            << format_double(r.flux_b) << "\n";
    }
}

void save_dataset(const CountsDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    write_dataset(data, out);
}

void write_rate_curve(const std::vector<RatePoint>& points, std::ostream& out) {
    out << "attenuation_db,distance_km_at_0.2dB_per_km,rate_bits_s\n";
    for (const auto& p : points) {
        out << format_double(p.attenuation_db) << ',' << format_double(p.attenuation_db / 0.2)
            << ',' << format_double(p.rate_bits_per_s) << "\n";
    }
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw IoError(where + ": unknown key '" + key + "'");
    }
}

double get_num(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number())
        throw IoError(where + ": missing numeric '" + key + "'");
    return obj[key].get<double>();
}

}  // namespace

void RunConfig::resolve_overlap() {
    if (overlap_jitter_ps && overlap_bandwidth_ghz) {
        const double v = optics::mean_visibility(*overlap_jitter_ps, *overlap_bandwidth_ghz,
                                                 overlap_fwhm_ps);
        simulation.overlap = std::sqrt(2.0 * v);
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw IoError(origin + ": top level must be an object");
    reject_unknown(doc, {"protocol", "detector", "channel", "simulation", "distillation"},
                   origin);

    RunConfig cfg;
    if (doc.contains("protocol")) {
        const json& p = doc["protocol"];
        reject_unknown(p, {"fluxes", "fluxes_a", "fluxes_b", "p_s", "f_ec", "clock_hz"},
                       origin + ".protocol");
        auto read_fluxes = [&](const json& fx, std::array<double, 4>& out) {
            reject_unknown(fx, {"s", "u", "v", "w"}, origin + ".protocol.fluxes");
            out[0] = get_num(fx, "s", origin);
            out[1] = get_num(fx, "u", origin);
            out[2] = get_num(fx, "v", origin);
            out[3] = get_num(fx, "w", origin);
        };
        if (p.contains("fluxes")) {
            read_fluxes(p["fluxes"], cfg.protocol.flux_a);
            cfg.protocol.flux_b = cfg.protocol.flux_a;
        }
        if (p.contains("fluxes_a")) read_fluxes(p["fluxes_a"], cfg.protocol.flux_a);
        if (p.contains("fluxes_b")) read_fluxes(p["fluxes_b"], cfg.protocol.flux_b);
        if (p.contains("p_s")) cfg.protocol.p_s = get_num(p, "p_s", origin);
        if (p.contains("f_ec")) cfg.protocol.f_ec = get_num(p, "f_ec", origin);
        if (p.contains("clock_hz")) cfg.protocol.clock_hz = get_num(p, "clock_hz", origin);
    }
    if (doc.contains("detector")) {
        const json& d = doc["detector"];
        reject_unknown(d, {"preset", "efficiency", "dark_prob_per_gate", "afterpulse_prob"},
                       origin + ".detector");
        if (d.contains("preset")) {
            const std::string name = d["preset"].get<std::string>();
            if (name == "room_20C") {
                cfg.detector = sim::DetectorModel::preset(sim::TemperaturePreset::room_20C);
            } else if (name == "cold_0C") {
                cfg.detector = sim::DetectorModel::preset(sim::TemperaturePreset::cold_0C);
            } else {
                throw IoError(origin + ".detector: unknown preset '" + name + "'");
            }
        }
        if (d.contains("efficiency")) cfg.detector.efficiency = get_num(d, "efficiency", origin);
        if (d.contains("dark_prob_per_gate"))
            cfg.detector.dark_prob_per_gate = get_num(d, "dark_prob_per_gate", origin);
        if (d.contains("afterpulse_prob"))
            cfg.detector.afterpulse_prob = get_num(d, "afterpulse_prob", origin);
    }
    if (doc.contains("channel")) {
        const json& c = doc["channel"];
        reject_unknown(c, {"total_attenuation_db", "attenuation_db_a", "attenuation_db_b",
                           "label"},
                       origin + ".channel");
        if (c.contains("total_attenuation_db")) {
            cfg.channel = sim::ChannelConfig::total_db(
                get_num(c, "total_attenuation_db", origin));
        } else {
            cfg.channel.attenuation_db_a = get_num(c, "attenuation_db_a", origin);
            cfg.channel.attenuation_db_b = get_num(c, "attenuation_db_b", origin);
        }
        if (c.contains("label")) cfg.channel.label = c["label"].get<std::string>();
    }
    if (doc.contains("simulation")) {
        const json& s = doc["simulation"];
        reject_unknown(s, {"rounds", "duration_s", "seed", "mode", "overlap", "overlap_from"},
                       origin + ".simulation");
        if (s.contains("rounds")) cfg.simulation.rounds = s["rounds"].get<std::uint64_t>();
        if (s.contains("duration_s")) cfg.simulation.duration_s = get_num(s, "duration_s", origin);
        if (s.contains("seed")) cfg.simulation.seed = s["seed"].get<std::uint64_t>();
        if (s.contains("mode")) {
            const std::string mode = s["mode"].get<std::string>();
            if (mode == "expected") {
                cfg.simulation.mode = sim::SimMode::expected;
            } else if (mode == "monte_carlo") {
                cfg.simulation.mode = sim::SimMode::monte_carlo;
            } else {
                throw IoError(origin + ".simulation: unknown mode '" + mode + "'");
            }
        }
        if (s.contains("overlap")) cfg.simulation.overlap = get_num(s, "overlap", origin);
        if (s.contains("overlap_from")) {
            const json& o = s["overlap_from"];
            reject_unknown(o, {"jitter_ps", "bandwidth_ghz", "fwhm_ps"},
                           origin + ".simulation.overlap_from");
            cfg.overlap_jitter_ps = get_num(o, "jitter_ps", origin);
            cfg.overlap_bandwidth_ghz = get_num(o, "bandwidth_ghz", origin);
            if (o.contains("fwhm_ps")) cfg.overlap_fwhm_ps = get_num(o, "fwhm_ps", origin);
        }
    }
    if (doc.contains("distillation")) {
        const json& d = doc["distillation"];
        reject_unknown(d, {"k", "merge_bell", "finite_size"}, origin + ".distillation");
        if (d.contains("k")) cfg.distillation.K = d["k"].get<int>();
        if (d.contains("merge_bell")) cfg.distillation.merge_bell = d["merge_bell"].get<bool>();
        if (d.contains("finite_size")) {
            const json& fs = d["finite_size"];
            reject_unknown(fs, {"sigmas"}, origin + ".distillation.finite_size");
            cfg.distillation.policy = finitesize::FluctuationPolicy::fixed(
                fs.contains("sigmas") ? get_num(fs, "sigmas", origin) : 7.0);
        }
    }
    cfg.distillation.p_z = cfg.protocol.p_s;
    cfg.distillation.f_ec = cfg.protocol.f_ec;
    cfg.distillation.clock_hz = cfg.protocol.clock_hz;
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str(), path);
}

std::string report_to_json(const keyrate::KeyRateReport& report) {
    json doc;
    doc["channel_label"] = report.channel_label;
    doc["attenuation_db"] = report.attenuation_db;
    doc["mode"] = report.finite_size ? "finite-size" : "asymptotic";
    doc["merged_bell"] = report.merged;
    doc["k"] = report.K;
    doc["rate_total_bits_per_s"] = report.rate_total_bits_per_s;
    doc["states"] = json::array();
    for (const auto& s : report.states) {
        json st;
        st["label"] = s.label;
        st["y11_lower"] = s.bounds.y11_lower;
        st["e11_upper"] = s.bounds.e11_upper;
        st["sigmas_yield"] = s.bounds.sigmas_yield;
        st["sigmas_error"] = s.bounds.sigmas_error;
        st["failure_budget"] = s.bounds.failure_budget;
        st["dropped_error_rows"] = s.bounds.dropped_error_rows;
        st["q_zz_per_clock"] = s.q_zz_per_clock;
        st["e_zz"] = s.e_zz;
        st["single_photon_term"] = s.terms.single_photon_term;
        st["ec_term"] = s.terms.ec_term;
        st["rate_per_pulse"] = s.terms.rate_per_pulse;
        st["rate_bits_per_s"] = s.terms.rate_bits_per_s;
        if (!s.annotation.empty()) st["annotation"] = s.annotation;
        doc["states"].push_back(st);
    }
    return doc.dump(2);
}

void print_report(const keyrate::KeyRateReport& report, std::ostream& out) {
    out << "channel " << report.channel_label << " (" << report.attenuation_db << " dB), "
        << (report.finite_size ? "finite-size" : "asymptotic") << ", K=" << report.K
        << (report.merged ? ", merged Bell states" : "") << "\n";
    for (const auto& s : report.states) {
        out << "  " << s.label << ": y11 >= " << std::setprecision(6) << s.bounds.y11_lower
            << ", e11 <= " << s.bounds.e11_upper << " (sigmas " << s.bounds.sigmas_yield << "/"
            << s.bounds.sigmas_error << ")\n"
            << "    Q_zz=" << s.q_zz_per_clock << " E_zz=" << s.e_zz
            << "  single-photon term=" << s.terms.single_photon_term
            << "  EC term=" << s.terms.ec_term << "\n"
            << "    rate " << s.terms.rate_bits_per_s / 1e3 << " kbit/s";
        if (!s.annotation.empty()) out << "  [" << s.annotation << "]";
        out << "\n";
    }
    out << "  total " << report.rate_total_bits_per_s / 1e3 << " kbit/s\n";
}

}  // namespace mdiqkd::io
