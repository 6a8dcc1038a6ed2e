#include "mbk/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mbk/error.hpp"
#include "mbk/random.hpp"

namespace mbk::io {

using json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view cell) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (begin != end && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::string shortest(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

Dataset parse_csv(std::string_view text, const IngestOptions& options, std::string_view source) {
    const std::string where(source);
    std::size_t dim = 0;
    std::vector<double> values;
    std::vector<std::size_t> line_of_row;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        const auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                          : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if (options.header && line_no == 1) continue;
        if (trim(line).empty()) continue;

        std::size_t cells = 0;
        std::size_t cell_start = 0;
        while (true) {
            const auto comma = line.find(',', cell_start);
            const auto cell = trim(line.substr(cell_start, comma == std::string_view::npos
                                                               ? std::string_view::npos
                                                               : comma - cell_start));
            ++cells;
            const auto value = parse_number(cell);
            if (!value) {
                throw IoError(where + ": line " + std::to_string(line_no) + ", column " +
                              std::to_string(cells) + ": not a number '" + std::string(cell) +
                              "'");
            }
            values.push_back(*value);
            if (comma == std::string_view::npos) break;
            cell_start = comma + 1;
        }
        if (dim == 0) dim = cells;
        if (cells != dim) {
            throw IoError(where + ": line " + std::to_string(line_no) + ": ragged row with " +
                          std::to_string(cells) + " values, expected " + std::to_string(dim));
        }
        line_of_row.push_back(line_no);
    }
    if (dim == 0) throw IoError(where + ": no data rows");

    const std::size_t n = values.size() / dim;
    if (options.normalize) {
        for (std::size_t l = 0; l < dim; ++l) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = 0; i < n; ++i) {
                lo = std::min(lo, values[i * dim + l]);
                hi = std::max(hi, values[i * dim + l]);
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < n; ++i) {
                double& v = values[i * dim + l];
                v = range > 0.0 ? (v - lo) / range : 0.5;
            }
        }
    } else {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0.0 || values[i] > 1.0) {
                throw IoError(where + ": line " + std::to_string(line_of_row[i / dim]) +
                              ": value " + shortest(values[i]) +
                              " outside [0,1]; use --normalize to rescale");
            }
        }
    }
    return Dataset(PointMatrix(dim, std::move(values)));
}

Dataset ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
    return parse_csv(read_text_file(path), options, path.string());
}

void write_points_csv(const std::filesystem::path& path, const PointMatrix& points) {
    std::string out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points[i];
        for (std::size_t l = 0; l < row.size(); ++l) {
            if (l) out += ',';
            out += format_double(row[l]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

GenSpec parse_gen_spec(std::string_view text) {
    GenSpec spec;
    const auto colon = text.find(':');
    const auto kind = trim(text.substr(0, colon));
    if (kind == "gaussian_mixture" || kind == "mixture") {
        spec.kind = GenSpec::Kind::GaussianMixture;
    } else if (kind == "uniform") {
        spec.kind = GenSpec::Kind::Uniform;
    } else {
        throw ContractViolation("unknown generator '" + std::string(kind) +
                                "' (expected gaussian_mixture or uniform)");
    }

    auto body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    while (!trim(body).empty()) {
        const auto comma = body.find(',');
        const auto item = body.substr(0, comma);
        body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) {
            throw ContractViolation("generator option '" + std::string(item) +
                                    "' is not key=value");
        }
        const auto key = trim(item.substr(0, eq));
        const auto value = trim(item.substr(eq + 1));
        const auto bad = [&] {
            return ContractViolation("bad value '" + std::string(value) + "' for generator key '" +
                                     std::string(key) + "'");
        };
        auto as_uint = [&]() -> std::uint64_t {
            std::uint64_t v = 0;
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc() || ptr != value.data() + value.size()) throw bad();
            return v;
        };
        if (key == "n") {
            spec.n = as_uint();
        } else if (key == "d") {
            spec.d = as_uint();
        } else if (key == "components") {
            spec.components = as_uint();
        } else if (key == "seed") {
            spec.seed = as_uint();
        } else if (key == "sigma") {
            const auto v = parse_number(value);
            if (!v) throw bad();
            spec.sigma = *v;
        } else {
            throw ContractViolation("unknown generator key '" + std::string(key) + "'");
        }
    }
    return spec;
}

std::string to_string(const GenSpec& spec) {
    if (spec.kind == GenSpec::Kind::Uniform) {
        return "uniform:n=" + std::to_string(spec.n) + ",d=" + std::to_string(spec.d) +
               ",seed=" + std::to_string(spec.seed);
    }
    return "gaussian_mixture:n=" + std::to_string(spec.n) + ",d=" + std::to_string(spec.d) +
           ",components=" + std::to_string(spec.components) + ",sigma=" + shortest(spec.sigma) +
           ",seed=" + std::to_string(spec.seed);
}

Dataset generate_synthetic(const GenSpec& spec) {
    detail::require(spec.n >= 1 && spec.d >= 1, "generator needs n >= 1 and d >= 1");
    RandomStream rng(spec.seed);
    PointMatrix points(spec.n, spec.d);

    if (spec.kind == GenSpec::Kind::Uniform) {
        for (std::size_t i = 0; i < spec.n; ++i) {
            for (double& v : points[i]) v = rng.uniform01();
        }
        return Dataset(std::move(points));
    }

    detail::require(spec.components >= 1, "mixture needs at least one component");
    detail::require(std::isfinite(spec.sigma) && spec.sigma >= 0.0,
                    "mixture spread must be non-negative");
    PointMatrix means(spec.components, spec.d);
    for (std::size_t c = 0; c < spec.components; ++c) {
        for (double& v : means[c]) v = 0.2 + 0.6 * rng.uniform01();
    }
    for (std::size_t i = 0; i < spec.n; ++i) {
        const auto mean = means[static_cast<std::size_t>(rng.uniform_index(spec.components))];
        auto p = points[i];
        for (std::size_t l = 0; l < spec.d; ++l) {
            p[l] = std::clamp(mean[l] + spec.sigma * rng.normal(), 0.0, 1.0);
        }
    }
    return Dataset(std::move(points));
}

Dataset load_dataset(const DataSource& source) {
    if (source.kind == DataSource::Kind::File) return ingest_csv(source.path, source.ingest);
    return generate_synthetic(source.gen);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

void emit(const json& j, std::string& out, std::size_t indent) {
    const std::string pad(indent + 2, ' ');
    switch (j.type()) {
        case json::value_t::number_float: out += format_double(j.get<double>()); return;
        case json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            const bool inline_items = std::all_of(j.begin(), j.end(), is_scalar);
            out += inline_items ? "[" : "[\n";
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += inline_items ? ", " : ",\n";
                first = false;
                if (!inline_items) out += pad;
                emit(item, out, indent + 2);
            }
            if (!inline_items) out += "\n" + std::string(indent, ' ');
            out += "]";
            return;
        }
        case json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += ",\n";
                first = false;
                out += pad + json(key).dump() + ": ";
                emit(value, out, indent + 2);
            }
            out += "\n" + std::string(indent, ' ') + "}";
            return;
        }
        default: out += j.dump(); return;
    }
}

std::string dump(const json& j) {
    std::string out;
    emit(j, out, 0);
    out += '\n';
    return out;
}

json points_to_json(const PointMatrix& points) {
    json rows = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        json row = json::array();
        for (double v : points[i]) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

json data_to_json(const DataSource& data) {
    json j;
    if (data.kind == DataSource::Kind::File) {
        j["kind"] = "file";
        j["path"] = data.path;
        j["normalize"] = data.ingest.normalize;
        j["header"] = data.ingest.header;
    } else {
        j["kind"] = "gen";
        j["spec"] = to_string(data.gen);
    }
    return j;
}

const json& field(const json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) {
        throw IoError(std::string("trace: missing field '") + name + "'");
    }
    return j.at(name);
}

PointMatrix points_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty()) throw IoError("trace: center list must be non-empty");
    PointMatrix out;
    for (const auto& row : rows) out.push_back(row.get<std::vector<double>>());
    return out;
}

DataSource data_from_json(const json& j) {
    DataSource data;
    const auto kind = field(j, "kind").get<std::string>();
    if (kind == "file") {
        data.kind = DataSource::Kind::File;
        data.path = field(j, "path").get<std::string>();
        data.ingest.normalize = field(j, "normalize").get<bool>();
        data.ingest.header = field(j, "header").get<bool>();
    } else if (kind == "gen") {
        data.kind = DataSource::Kind::Generated;
        data.gen = parse_gen_spec(field(j, "spec").get<std::string>());
    } else {
        throw IoError("trace: unknown data source kind '" + kind + "'");
    }
    return data;
}

}  // namespace

std::string serialize_trace(const RunTrace& trace, const std::optional<DataSource>& data) {
    const RunConfig& cfg = trace.config;
    json config;
    config["algorithm"] = to_string(cfg.algorithm);
    config["k"] = cfg.k;
    config["b"] = cfg.b;
    config["eps"] = cfg.stop.epsilon;
    config["rate"] = cfg.rate.to_string();
    config["stop"] = to_string(cfg.stop.kind);
    config["init"] = to_string(cfg.init);
    config["seed"] = cfg.seed;
    config["max_iter_cap"] = cfg.max_iter_cap;
    config["audit_global_cost"] = cfg.audit_global_cost;
    config["record_cbar"] = cfg.record_cbar;
    config["batch_mode"] = to_string(cfg.batch_mode);
    config["data"] = data ? data_to_json(*data) : json(nullptr);

    json iterations = json::array();
    for (const auto& rec : trace.iterations) {
        json it;
        it["i"] = rec.iteration;
        it["counts"] = rec.counts;
        it["alphas"] = rec.alphas;
        it["local_improvement"] = rec.local_improvement;
        it["movement"] = rec.movement;
        if (rec.global_cost) it["global_cost"] = *rec.global_cost;
        if (rec.cbar_distance) it["cbar_dist"] = *rec.cbar_distance;
        iterations.push_back(std::move(it));
    }

    json doc;
    doc["config"] = std::move(config);
    doc["init_centers"] = points_to_json(trace.initial_centers);
    doc["iterations"] = std::move(iterations);
    doc["final_centers"] = points_to_json(trace.final_centers);
    doc["reason"] = to_string(trace.reason);
    if (trace.final_global_cost) doc["final_global_cost"] = *trace.final_global_cost;
    return dump(doc);
}

TraceDocument parse_trace(std::string_view text) {
    try {
        const json doc = json::parse(text);
        TraceDocument out;
        RunTrace& trace = out.trace;
        RunConfig& cfg = trace.config;

        const json& config = field(doc, "config");
        cfg.algorithm = parse_algorithm(field(config, "algorithm").get<std::string>());
        cfg.k = field(config, "k").get<std::size_t>();
        cfg.b = field(config, "b").get<std::size_t>();
        const double eps = field(config, "eps").get<double>();
        cfg.rate = LearningRatePolicy::parse(field(config, "rate").get<std::string>());
        cfg.stop = parse_stopping_kind(field(config, "stop").get<std::string>()) ==
                           StoppingRule::Kind::BatchImprovement
                       ? StoppingRule::batch_improvement(eps)
                       : StoppingRule::center_movement(eps);
        cfg.init = parse_init_scheme(field(config, "init").get<std::string>());
        cfg.seed = field(config, "seed").get<std::uint64_t>();
        cfg.max_iter_cap = field(config, "max_iter_cap").get<std::size_t>();
        cfg.audit_global_cost = field(config, "audit_global_cost").get<bool>();
        cfg.record_cbar = field(config, "record_cbar").get<bool>();
        cfg.batch_mode = parse_batch_mode(field(config, "batch_mode").get<std::string>());
        if (const auto& data = field(config, "data"); !data.is_null()) {
            out.data = data_from_json(data);
        }

        trace.initial_centers = Centers(points_from_json(field(doc, "init_centers")));
        if (cfg.init == InitScheme::Explicit) cfg.initial_centers = trace.initial_centers;
        trace.final_centers = Centers(points_from_json(field(doc, "final_centers")));

        for (const auto& it : field(doc, "iterations")) {
            IterationRecord rec;
            rec.iteration = field(it, "i").get<std::size_t>();
            rec.counts = field(it, "counts").get<std::vector<std::size_t>>();
            rec.alphas = field(it, "alphas").get<std::vector<double>>();
            rec.local_improvement = field(it, "local_improvement").get<double>();
            rec.movement = field(it, "movement").get<double>();
            if (it.contains("global_cost")) rec.global_cost = it.at("global_cost").get<double>();
            if (it.contains("cbar_dist")) {
                rec.cbar_distance = it.at("cbar_dist").get<std::vector<double>>();
            }
            trace.iterations.push_back(std::move(rec));
        }
        trace.reason = parse_termination(field(doc, "reason").get<std::string>());
        if (doc.contains("final_global_cost")) {
            trace.final_global_cost = doc.at("final_global_cost").get<double>();
        }
        return out;
    } catch (const json::exception& e) {
        throw IoError(std::string("trace: malformed JSON: ") + e.what());
    }
}

TraceDocument read_trace_file(const std::filesystem::path& path) {
    try {
        return parse_trace(read_text_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string serialize_report(const AuditReport& report, const std::vector<std::string>& sources) {
    json checks = json::array();
    for (const auto& c : report.checks) {
        json j;
        j["name"] = c.name;
        j["total"] = c.total;
        j["violations"] = c.violations;
        j["violation_fraction"] = c.violation_fraction();
        j["budget"] = c.budget;
        j["passed"] = c.passed();
        j["worst_margin"] = c.worst_margin ? json(*c.worst_margin) : json(nullptr);
        if (c.worst_ratio) j["worst_ratio"] = *c.worst_ratio;
        json details = json::object();
        for (const auto& [key, value] : c.details) details[key] = value;
        j["details"] = std::move(details);
        checks.push_back(std::move(j));
    }
    json doc;
    doc["passed"] = report.passed();
    doc["sources"] = sources;
    doc["checks"] = std::move(checks);
    return dump(doc);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::pair<std::string, std::string>> parse_config(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                    : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const auto key = eq == std::string_view::npos ? std::string_view{} : trim(line.substr(0, eq));
        if (key.empty()) {
            throw IoError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        entries.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return entries;
}

}  // namespace mbk::io
