#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "dsnav/errors.hpp"
#include "dsnav/scenario.hpp"

namespace dsnav {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

struct Line {
    int number;
    std::string key;
    std::string value;
};

struct Section {
    std::string kind;   // e.g. "scenario", "body"
    std::string label;  // e.g. "Venus" for [body Venus]
    int line;
    std::vector<Line> entries;
};

class Parser {
  public:
    Parser(std::string path) : path_(std::move(path)) {}

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(path_ + ":" + std::to_string(line) + ": " + msg);
    }

    double num(const Line& l) const {
        double v = 0.0;
        const std::string t = trim(l.value);
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            fail(l.number, "key '" + l.key + "': bad number '" + l.value + "'");
        return v;
    }

    long integer(const Line& l) const {
        long v = 0;
        const std::string t = trim(l.value);
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            fail(l.number, "key '" + l.key + "': bad integer '" + l.value + "'");
        return v;
    }

    std::vector<Section> parse() {
        std::ifstream in(path_);
        if (!in) throw IoError("cannot open config '" + path_ + "'");
        std::vector<Section> sections;
        std::string raw;
        int number = 0;
        while (std::getline(in, raw)) {
            ++number;
            const std::string line = trim(raw);
            if (line.empty() || line[0] == '#') continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail(number, "unterminated section header");
                const auto tokens = split_ws(line.substr(1, line.size() - 2));
                if (tokens.empty() || tokens.size() > 2) fail(number, "bad section header '" + line + "'");
                sections.push_back({tokens[0], tokens.size() == 2 ? tokens[1] : "", number, {}});
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) fail(number, "expected 'key = value', got '" + line + "'");
            if (sections.empty()) fail(number, "key outside any [section]");
            Line l{number, trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
            if (l.key.empty()) fail(number, "empty key");
            sections.back().entries.push_back(std::move(l));
        }
        return sections;
    }

    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

StateVector parse_state(const Parser& p, const Line& l) {
    const auto tokens = split_ws(l.value);
    if (tokens.size() != 6) p.fail(l.number, "key '" + l.key + "': want 6 numbers (rx ry rz vx vy vz)");
    double v[6];
    for (int i = 0; i < 6; ++i) {
        const auto [ptr, ec] = std::from_chars(tokens[i].data(), tokens[i].data() + tokens[i].size(), v[i]);
        if (ec != std::errc{} || ptr != tokens[i].data() + tokens[i].size())
            p.fail(l.number, "key '" + l.key + "': bad number '" + tokens[i] + "'");
    }
    return {{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
}

}  // namespace

const Body& ScenarioConfig::body(const std::string& id) const {
    for (const auto& b : bodies) {
        if (b.id == id) return b;
    }
    throw ConfigError("scenario '" + name + "': unknown body '" + id + "'");
}

TrackingSchedule ScenarioConfig::assemble_schedule() const {
    if (!has_schedule) throw ConfigError("scenario '" + name + "' has no [schedule] section");
    TrackingSchedule campaign =
        build_campaign_schedule(Epoch{nav_start_s}, schedule_beacons, window_s, slew_s, rate_hz, cycles);
    if (nav_start_s > 0.0) {
        TrackingSchedule full;
        full.segments.push_back({Epoch{0.0}, Epoch{nav_start_s}, SegmentKind::Coast, {}, 0.0});
        full.segments.insert(full.segments.end(), campaign.segments.begin(), campaign.segments.end());
        full.validate();
        return full;
    }
    return campaign;
}

FilterSettings ScenarioConfig::filter_settings() const {
    const std::size_t n = bodies.size();
    FilterSettings fs;
    fs.sigma_r_km = sigma_r_km;
    fs.sigma_v_km_s = sigma_v_km_s;
    fs.sigma_dt_s = sigma_dt_s > 0.0 ? sigma_dt_s : sigma_r_km / c;
    fs.step_coast_s = step_coast_s;
    fs.pos_bound_km = pos_bound_km;
    fs.vel_bound_km_s = vel_bound_km_s;
    fs.Q = Mat(6 + n, 6 + n);
    for (std::size_t i = 0; i < 6 + n; ++i) {
        if (q_ones) {
            for (std::size_t j = 0; j < 6 + n; ++j) fs.Q(i, j) = q_scale;
        } else {
            fs.Q(i, i) = q_scale;
        }
    }
    fs.R = Mat(2, 2);
    fs.R(0, 0) = fs.R(1, 1) = meas_sigma_rad * meas_sigma_rad;
    return fs;
}

EkfModel ScenarioConfig::ekf_model() const { return {bodies, thrust, mu, c, 0.05 * constants::au_km}; }

ScenarioConfig load_config(const std::string& path) {
    Parser parser(path);
    const std::vector<Section> sections = parser.parse();

    ScenarioConfig cfg;
    bool have_scenario = false;
    bool have_truth = false;
    double epoch0_abs = 0.0;

    // [scenario] must come first so body epochs can be made relative to it.
    for (const auto& sec : sections) {
        if (sec.kind != "scenario") continue;
        have_scenario = true;
        for (const auto& l : sec.entries) {
            if (l.key == "name") {
                cfg.name = l.value;
            } else if (l.key == "epoch0") {
                cfg.epoch0_iso = l.value;
                epoch0_abs = iso8601_to_seconds(l.value);
            } else if (l.key == "mu_sun_km3_s2") {
                cfg.mu = parser.num(l);
            } else if (l.key == "c_km_s") {
                cfg.c = parser.num(l);
            } else {
                parser.fail(l.number, "unknown key '" + l.key + "' in [scenario]");
            }
        }
    }
    if (!have_scenario) throw ConfigError(path + ": missing [scenario] section");
    if (cfg.name.empty()) throw ConfigError(path + ": [scenario] is missing 'name'");
    if (cfg.epoch0_iso.empty()) throw ConfigError(path + ": [scenario] is missing 'epoch0'");

    for (const auto& sec : sections) {
        if (sec.kind == "scenario") continue;
        if (sec.kind == "body") {
            if (sec.label.empty()) parser.fail(sec.line, "[body] needs a name: [body Earth]");
            Body b;
            b.id = sec.label;
            b.mu_central = cfg.mu;
            bool have_state = false;
            for (const auto& l : sec.entries) {
                if (l.key == "epoch") {
                    b.epoch0 = Epoch{iso8601_to_seconds(l.value) - epoch0_abs};
                } else if (l.key == "state") {
                    b.state0 = parse_state(parser, l);
                    have_state = true;
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [body " + sec.label + "]");
                }
            }
            if (!have_state) parser.fail(sec.line, "[body " + sec.label + "] is missing 'state'");
            for (const auto& existing : cfg.bodies) {
                if (existing.id == b.id) parser.fail(sec.line, "duplicate body '" + b.id + "'");
            }
            cfg.bodies.push_back(std::move(b));
        } else if (sec.kind == "truth") {
            for (const auto& l : sec.entries) {
                if (l.key == "state") {
                    cfg.truth_state0 = parse_state(parser, l);
                    have_truth = true;
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [truth]");
                }
            }
        } else if (sec.kind == "thrust") {
            for (const auto& l : sec.entries) {
                if (l.key != "arc") parser.fail(l.number, "unknown key '" + l.key + "' in [thrust]");
                const auto tokens = split_ws(l.value);
                if (tokens.size() != 5) parser.fail(l.number, "'arc' wants: t_start_s t_end_s ax ay az");
                double v[5];
                for (int i = 0; i < 5; ++i) {
                    const auto [ptr, ec] = std::from_chars(tokens[i].data(), tokens[i].data() + tokens[i].size(), v[i]);
                    if (ec != std::errc{} || ptr != tokens[i].data() + tokens[i].size())
                        parser.fail(l.number, "'arc': bad number '" + tokens[i] + "'");
                }
                cfg.thrust.arcs.push_back({Epoch{v[0]}, Epoch{v[1]}, {v[2], v[3], v[4]}});
            }
        } else if (sec.kind == "noise") {
            for (const auto& l : sec.entries) {
                if (l.key == "sigma_los_arcsec") {
                    cfg.noise.sigma_los_rad = parser.num(l) * constants::arcsec_to_rad;
                } else if (l.key == "seed") {
                    cfg.noise.seed = static_cast<std::uint64_t>(parser.integer(l));
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [noise]");
                }
            }
        } else if (sec.kind == "filter") {
            for (const auto& l : sec.entries) {
                if (l.key == "sigma_r_km") {
                    cfg.sigma_r_km = parser.num(l);
                } else if (l.key == "sigma_v_km_s") {
                    cfg.sigma_v_km_s = parser.num(l);
                } else if (l.key == "sigma_dt_s") {
                    cfg.sigma_dt_s = trim(l.value) == "auto" ? -1.0 : parser.num(l);
                } else if (l.key == "process_noise") {
                    const std::string v = trim(l.value);
                    if (v == "ones") {
                        cfg.q_ones = true;
                    } else if (v == "diag") {
                        cfg.q_ones = false;
                    } else {
                        parser.fail(l.number, "process_noise must be 'ones' or 'diag'");
                    }
                } else if (l.key == "process_noise_scale") {
                    cfg.q_scale = parser.num(l);
                } else if (l.key == "meas_sigma_arcsec") {
                    cfg.meas_sigma_rad = parser.num(l) * constants::arcsec_to_rad;
                } else if (l.key == "step_coast_s") {
                    cfg.step_coast_s = parser.num(l);
                } else if (l.key == "pos_bound_km") {
                    cfg.pos_bound_km = parser.num(l);
                } else if (l.key == "vel_bound_km_s") {
                    cfg.vel_bound_km_s = parser.num(l);
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [filter]");
                }
            }
        } else if (sec.kind == "schedule") {
            cfg.has_schedule = true;
            for (const auto& l : sec.entries) {
                if (l.key == "nav_start_s") {
                    cfg.nav_start_s = parser.num(l);
                } else if (l.key == "beacons") {
                    cfg.schedule_beacons = split_ws(l.value);
                } else if (l.key == "window_s") {
                    cfg.window_s = parser.num(l);
                } else if (l.key == "slew_s") {
                    cfg.slew_s = parser.num(l);
                } else if (l.key == "rate_hz") {
                    cfg.rate_hz = parser.num(l);
                } else if (l.key == "cycles") {
                    cfg.cycles = static_cast<int>(parser.integer(l));
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [schedule]");
                }
            }
        } else if (sec.kind == "posdet") {
            for (const auto& l : sec.entries) {
                if (l.key == "snapshot_epoch_s") {
                    cfg.posdet.snapshot_epoch = Epoch{parser.num(l)};
                } else if (l.key == "trials") {
                    cfg.posdet.trials = static_cast<int>(parser.integer(l));
                } else if (l.key == "pos_envelope_km") {
                    cfg.posdet.pos_envelope_km = parser.num(l);
                } else if (l.key == "dt_envelope_s") {
                    cfg.posdet.dt_envelope_s = parser.num(l);
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [posdet]");
                }
            }
        } else if (sec.kind == "output") {
            for (const auto& l : sec.entries) {
                if (l.key == "dir") {
                    cfg.out_dir = l.value;
                } else {
                    parser.fail(l.number, "unknown key '" + l.key + "' in [output]");
                }
            }
        } else {
            parser.fail(sec.line, "unknown section [" + sec.kind + "]");
        }
    }

    if (cfg.bodies.empty()) throw ConfigError(path + ": no [body <name>] sections");
    if (!have_truth) throw ConfigError(path + ": missing [truth] section with 'state'");
    if (cfg.out_dir.empty()) cfg.out_dir = "out/" + cfg.name;
    cfg.thrust.validate();
    for (const auto& id : cfg.schedule_beacons) cfg.body(id);  // referenced beacons must exist
    return cfg;
}

}  // namespace dsnav
