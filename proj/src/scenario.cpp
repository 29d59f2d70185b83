#include "dechist/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dechist::scenario {

std::string to_string(Kind kind) {
    switch (kind) {
        case Kind::two_state: return "two_state";
        case Kind::kernels: return "kernels";
        case Kind::qbm_fourier: return "qbm_fourier";
        case Kind::qbm_records: return "qbm_records";
        case Kind::info_count: return "info_count";
        case Kind::generic_histories: return "generic_histories";
    }
    return "?";
}

std::string to_string(OutputFormat format) {
    return format == OutputFormat::csv ? "csv" : "json";
}

qbm::OscillatorBath BathSection::bath() const {
    qbm::OscillatorBath b;
    b.modes = modes;
    b.temperature = temperature;
    b.hbar = hbar;
    return b;
}

qbm::SpectralDensity BathSection::density() const {
    if (kind == qbm::SpectralDensity::Kind::discrete) return qbm::SpectralDensity::discrete(bath());
    return qbm::SpectralDensity::ohmic(m_gamma, cutoff, temperature, hbar);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

namespace {

struct Entry {
    std::string key;
    std::string value;
    int line;
    int column;
};

struct Section {
    std::string name;
    int line;
    std::vector<Entry> entries;
};

std::string trimmed(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<Section> tokenize(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trimmed(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no,
                                 static_cast<int>(raw.size()));
            const std::string name = trimmed(line.substr(1, line.size() - 2));
            if (name.empty()) throw ParseError("empty section name", line_no, 1);
            sections.push_back(Section{name, line_no, {}});
            continue;
        }
        const std::size_t eq = raw.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line_no, 1);
        const std::string key = trimmed(raw.substr(0, eq));
        const std::string value = trimmed(raw.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no, 1);
        if (sections.empty())
            throw ParseError("key '" + key + "' outside any section", line_no, 1);
        const int column = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
        sections.back().entries.push_back(Entry{key, value, line_no, column});
    }
    return sections;
}

[[noreturn]] void fail_entry(const Entry& e, const std::string& message) {
    throw ParseError("key '" + e.key + "': " + message, e.line, e.column);
}

double parse_double(const Entry& e, const std::string& token) {
    const std::string t = trimmed(token);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        fail_entry(e, "expected a number, got '" + t + "'");
    return v;
}

double parse_double(const Entry& e) { return parse_double(e, e.value); }

std::int64_t parse_int(const Entry& e) {
    std::int64_t v = 0;
    const std::string t = trimmed(e.value);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        fail_entry(e, "expected an integer, got '" + t + "'");
    return v;
}

std::uint64_t parse_uint(const Entry& e) {
    std::uint64_t v = 0;
    const std::string t = trimmed(e.value);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size())
        fail_entry(e, "expected a nonnegative integer, got '" + t + "'");
    return v;
}

bool parse_bool(const Entry& e) {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail_entry(e, "expected true or false");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(value);
    while (std::getline(in, token, ',')) parts.push_back(trimmed(token));
    return parts;
}

std::vector<double> parse_double_list(const Entry& e) {
    std::vector<double> out;
    for (const std::string& token : split_list(e.value)) out.push_back(parse_double(e, token));
    return out;
}

/// Tracks which keys a section handler consumed so leftovers can be
/// reported with their location.
class SectionReader {
public:
    explicit SectionReader(const Section& section) : section_(section) {}

    const Entry* find(const std::string& key) {
        consumed_.insert(key);
        const Entry* found = nullptr;
        for (const Entry& e : section_.entries) {
            if (e.key != key) continue;
            if (found)
                throw ParseError("duplicate key '" + key + "' in section [" + section_.name + "]",
                                 e.line, e.column);
            found = &e;
        }
        return found;
    }

    const Entry& require(const std::string& key) {
        const Entry* e = find(key);
        if (!e)
            throw ValidationError("section [" + section_.name + "] (line " +
                                  std::to_string(section_.line) + "): missing required key '" +
                                  key + "'");
        return *e;
    }

    std::vector<const Entry*> all(const std::string& key) {
        consumed_.insert(key);
        std::vector<const Entry*> out;
        for (const Entry& e : section_.entries)
            if (e.key == key) out.push_back(&e);
        return out;
    }

    void finish() const {
        for (const Entry& e : section_.entries)
            if (!consumed_.count(e.key))
                throw ParseError("unknown key '" + e.key + "' in section [" + section_.name + "]",
                                 e.line, e.column);
    }

private:
    const Section& section_;
    std::set<std::string> consumed_;
};

Kind parse_kind(const Entry& e) {
    for (Kind k : {Kind::two_state, Kind::kernels, Kind::qbm_fourier, Kind::qbm_records,
                   Kind::info_count, Kind::generic_histories})
        if (e.value == to_string(k)) return k;
    fail_entry(e, "unknown scenario kind '" + e.value + "'");
}

twostate::Config read_two_state(const Section& section) {
    SectionReader r(section);
    twostate::Config c;
    c.grid_points = static_cast<int>(parse_int(r.require("grid_points")));
    c.box_length = parse_double(r.require("box_length"));
    c.mass = parse_double(r.require("mass"));
    c.t1 = parse_double(r.require("t1"));
    c.t_final = parse_double(r.require("t_final"));
    c.region_a = parse_double(r.require("region_a"));
    c.region_b = parse_double(r.require("region_b"));
    if (const Entry* e = r.find("lambda_over_hbar")) c.lambda_over_hbar = parse_double(*e);
    const Entry& weights = r.require("weights");
    const std::vector<double> w = parse_double_list(weights);
    if (w.size() != 2) fail_entry(weights, "expected two comma-separated weights");
    c.weight_a = w[0];
    c.weight_b = w[1];
    if (const Entry* e = r.find("final_bins")) c.final_bins = static_cast<int>(parse_int(*e));
    r.finish();
    try {
        c.validate();
    } catch (const std::invalid_argument& err) {
        throw ValidationError(std::string("section [two_state]: ") + err.what());
    }
    return c;
}

BathSection read_bath(const Section& section) {
    SectionReader r(section);
    BathSection b;
    const Entry& kind = r.require("kind");
    if (kind.value == "discrete") {
        b.kind = qbm::SpectralDensity::Kind::discrete;
        const auto mode_entries = r.all("mode");
        if (mode_entries.empty())
            throw ValidationError("section [bath]: discrete bath needs at least one 'mode'");
        for (const Entry* e : mode_entries) {
            const std::vector<double> triple = parse_double_list(*e);
            if (triple.size() != 3) fail_entry(*e, "expected 'mass, omega, coupling'");
            b.modes.push_back(qbm::BathMode{triple[0], triple[1], triple[2]});
        }
    } else if (kind.value == "ohmic") {
        b.kind = qbm::SpectralDensity::Kind::ohmic;
        b.m_gamma = parse_double(r.require("mgamma"));
        b.cutoff = parse_double(r.require("cutoff"));
    } else {
        fail_entry(kind, "expected 'discrete' or 'ohmic'");
    }
    if (const Entry* e = r.find("temperature")) b.temperature = parse_double(*e);
    if (const Entry* e = r.find("hbar")) b.hbar = parse_double(*e);
    r.finish();
    try {
        b.density();
    } catch (const std::invalid_argument& err) {
        throw ValidationError(std::string("section [bath]: ") + err.what());
    }
    return b;
}

KernelsSection read_kernels(const Section& section) {
    SectionReader r(section);
    KernelsSection k;
    k.s_max = parse_double(r.require("s_max"));
    k.samples = static_cast<int>(parse_int(r.require("samples")));
    r.finish();
    if (k.s_max <= 0.0 || k.samples < 2)
        throw ValidationError("section [kernels]: require s_max > 0 and samples >= 2");
    return k;
}

QbmSection read_qbm(const Section& section) {
    SectionReader r(section);
    QbmSection q;
    q.box_length = parse_double(r.require("box_length"));
    q.tau = parse_double(r.require("tau"));
    q.path_knots = static_cast<int>(parse_int(r.require("path_knots")));
    q.delta = parse_double(r.require("delta"));
    if (const Entry* e = r.find("window_lo")) q.window_lo = parse_double(*e);
    if (const Entry* e = r.find("window_hi")) q.window_hi = parse_double(*e);
    if (const Entry* e = r.find("threshold")) q.threshold = parse_double(*e);
    r.finish();
    if (q.box_length <= 0.0 || q.tau <= 0.0 || q.path_knots < 3 || q.delta <= 0.0 ||
        !(q.window_hi > q.window_lo) || q.threshold <= 0.0)
        throw ValidationError("section [qbm]: inconsistent parameters");
    return q;
}

InfoCountSection read_info_count(const Section& section) {
    SectionReader r(section);
    InfoCountSection s;
    s.box_length = parse_double(r.require("box_length"));
    s.tau = parse_double(r.require("tau"));
    s.temperatures = parse_double_list(r.require("temperatures"));
    r.finish();
    if (s.box_length <= 0.0 || s.tau <= 0.0 || s.temperatures.empty())
        throw ValidationError("section [info_count]: inconsistent parameters");
    for (double t : s.temperatures)
        if (t < 0.0) throw ValidationError("section [info_count]: negative temperature");
    return s;
}

GenericHistoriesSection read_generic(const Section& section) {
    SectionReader r(section);
    GenericHistoriesSection g;
    g.dim = static_cast<int>(parse_int(r.require("dim")));
    g.times = parse_double_list(r.require("times"));
    const Entry& alt = r.require("alternatives");
    for (const std::string& token : split_list(alt.value)) {
        Entry fake = alt;
        fake.value = token;
        g.alternatives.push_back(static_cast<int>(parse_int(fake)));
    }
    g.conserved = parse_bool(r.require("conserved"));
    const Entry& state = r.require("state");
    if (state.value == "mixed")
        g.mixed_state = true;
    else if (state.value == "pure")
        g.mixed_state = false;
    else
        fail_entry(state, "expected 'pure' or 'mixed'");
    r.finish();

    if (g.dim < 2) throw ValidationError("section [generic_histories]: dim must be >= 2");
    if (g.times.size() != g.alternatives.size() || g.times.empty())
        throw ValidationError("section [generic_histories]: times/alternatives length mismatch");
    for (std::size_t k = 1; k < g.times.size(); ++k)
        if (!(g.times[k] > g.times[k - 1]))
            throw ValidationError("section [generic_histories]: times must increase");
    for (int a : g.alternatives)
        if (a < 1 || a > g.dim)
            throw ValidationError("section [generic_histories]: alternatives out of range");
    return g;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    const std::vector<Section> sections = tokenize(text);

    const Section* scenario_section = nullptr;
    for (const Section& s : sections)
        if (s.name == "scenario") {
            if (scenario_section)
                throw ParseError("duplicate [scenario] section", s.line, 1);
            scenario_section = &s;
        }
    if (!scenario_section)
        throw ValidationError(origin + ": missing [scenario] section");

    Scenario out;
    {
        SectionReader r(*scenario_section);
        out.name = r.require("name").value;
        out.kind = parse_kind(r.require("kind"));
        if (const Entry* e = r.find("format")) {
            if (e->value == "csv")
                out.format = OutputFormat::csv;
            else if (e->value == "json")
                out.format = OutputFormat::json;
            else
                fail_entry(*e, "expected 'csv' or 'json'");
        }
        if (const Entry* e = r.find("seed")) out.seed = parse_uint(*e);
        if (const Entry* e = r.find("tolerance")) out.tolerance = parse_double(*e);
        r.finish();
    }
    if (out.name.empty()) throw ValidationError("scenario name must not be empty");

    for (const Section& s : sections) {
        if (&s == scenario_section) continue;
        const auto once = [&](const auto& slot) {
            if (slot) throw ParseError("duplicate section [" + s.name + "]", s.line, 1);
        };
        if (s.name == "two_state") {
            once(out.two_state);
            out.two_state = read_two_state(s);
        } else if (s.name == "bath") {
            once(out.bath);
            out.bath = read_bath(s);
        } else if (s.name == "kernels") {
            once(out.kernels);
            out.kernels = read_kernels(s);
        } else if (s.name == "qbm") {
            once(out.qbm);
            out.qbm = read_qbm(s);
        } else if (s.name == "info_count") {
            once(out.info_count);
            out.info_count = read_info_count(s);
        } else if (s.name == "generic_histories") {
            once(out.generic_histories);
            out.generic_histories = read_generic(s);
        } else {
            throw ParseError("unknown section [" + s.name + "]", s.line, 1);
        }
    }

    // Kind-specific completeness.
    auto need = [&](bool present, const char* section) {
        if (!present)
            throw ValidationError("scenario kind '" + to_string(out.kind) +
                                  "' requires section [" + section + "]");
    };
    switch (out.kind) {
        case Kind::two_state: need(out.two_state.has_value(), "two_state"); break;
        case Kind::kernels:
            need(out.bath.has_value(), "bath");
            need(out.kernels.has_value(), "kernels");
            break;
        case Kind::qbm_fourier:
        case Kind::qbm_records:
            need(out.bath.has_value(), "bath");
            need(out.qbm.has_value(), "qbm");
            if (out.bath->kind != qbm::SpectralDensity::Kind::discrete)
                throw ValidationError("qbm scenarios require a discrete bath");
            break;
        case Kind::info_count:
            need(out.bath.has_value(), "bath");
            need(out.info_count.has_value(), "info_count");
            if (out.bath->kind != qbm::SpectralDensity::Kind::discrete)
                throw ValidationError("info_count requires a discrete bath");
            break;
        case Kind::generic_histories:
            need(out.generic_histories.has_value(), "generic_histories");
            break;
    }
    return out;
}

Scenario parse_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario_text(buffer.str(), path.string());
}

std::string serialize(const Scenario& s) {
    std::ostringstream out;
    out << "[scenario]\n";
    out << "name = " << s.name << "\n";
    out << "kind = " << to_string(s.kind) << "\n";
    out << "format = " << to_string(s.format) << "\n";
    out << "seed = " << s.seed << "\n";
    if (s.tolerance) out << "tolerance = " << format_double(*s.tolerance) << "\n";

    if (s.two_state) {
        const twostate::Config& c = *s.two_state;
        out << "\n[two_state]\n";
        out << "grid_points = " << c.grid_points << "\n";
        out << "box_length = " << format_double(c.box_length) << "\n";
        out << "mass = " << format_double(c.mass) << "\n";
        out << "t1 = " << format_double(c.t1) << "\n";
        out << "t_final = " << format_double(c.t_final) << "\n";
        out << "region_a = " << format_double(c.region_a) << "\n";
        out << "region_b = " << format_double(c.region_b) << "\n";
        out << "lambda_over_hbar = " << format_double(c.lambda_over_hbar) << "\n";
        out << "weights = " << format_double(c.weight_a) << ", " << format_double(c.weight_b)
            << "\n";
        out << "final_bins = " << c.final_bins << "\n";
    }
    if (s.bath) {
        out << "\n[bath]\n";
        if (s.bath->kind == qbm::SpectralDensity::Kind::discrete) {
            out << "kind = discrete\n";
            for (const qbm::BathMode& m : s.bath->modes)
                out << "mode = " << format_double(m.mass) << ", " << format_double(m.omega)
                    << ", " << format_double(m.coupling) << "\n";
        } else {
            out << "kind = ohmic\n";
            out << "mgamma = " << format_double(s.bath->m_gamma) << "\n";
            out << "cutoff = " << format_double(s.bath->cutoff) << "\n";
        }
        out << "temperature = " << format_double(s.bath->temperature) << "\n";
        out << "hbar = " << format_double(s.bath->hbar) << "\n";
    }
    if (s.kernels) {
        out << "\n[kernels]\n";
        out << "s_max = " << format_double(s.kernels->s_max) << "\n";
        out << "samples = " << s.kernels->samples << "\n";
    }
    if (s.qbm) {
        out << "\n[qbm]\n";
        out << "box_length = " << format_double(s.qbm->box_length) << "\n";
        out << "tau = " << format_double(s.qbm->tau) << "\n";
        out << "path_knots = " << s.qbm->path_knots << "\n";
        out << "delta = " << format_double(s.qbm->delta) << "\n";
        out << "window_lo = " << format_double(s.qbm->window_lo) << "\n";
        out << "window_hi = " << format_double(s.qbm->window_hi) << "\n";
        out << "threshold = " << format_double(s.qbm->threshold) << "\n";
    }
    if (s.info_count) {
        out << "\n[info_count]\n";
        out << "box_length = " << format_double(s.info_count->box_length) << "\n";
        out << "tau = " << format_double(s.info_count->tau) << "\n";
        out << "temperatures = ";
        for (std::size_t i = 0; i < s.info_count->temperatures.size(); ++i) {
            if (i) out << ", ";
            out << format_double(s.info_count->temperatures[i]);
        }
        out << "\n";
    }
    if (s.generic_histories) {
        const GenericHistoriesSection& g = *s.generic_histories;
        out << "\n[generic_histories]\n";
        out << "dim = " << g.dim << "\n";
        out << "times = ";
        for (std::size_t i = 0; i < g.times.size(); ++i) {
            if (i) out << ", ";
            out << format_double(g.times[i]);
        }
        out << "\n";
        out << "alternatives = ";
        for (std::size_t i = 0; i < g.alternatives.size(); ++i) {
            if (i) out << ", ";
            out << g.alternatives[i];
        }
        out << "\n";
        out << "conserved = " << (g.conserved ? "true" : "false") << "\n";
        out << "state = " << (g.mixed_state ? "mixed" : "pure") << "\n";
    }
    return out.str();
}

}  // namespace dechist::scenario
