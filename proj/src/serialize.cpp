#include "igd/serialize.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include "igd/errors.hpp"

namespace igd {

namespace {

// ---------------------------------------------------------------- writing

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void append_scalar(std::string& out, const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: out += "null"; break;
        case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
        case Json::value_t::number_integer: out += std::to_string(j.get<std::int64_t>()); break;
        case Json::value_t::number_unsigned: out += std::to_string(j.get<std::uint64_t>()); break;
        case Json::value_t::number_float: {
            double v = j.get<double>();
            if (!std::isfinite(v)) throw std::domain_error("cannot serialize a non-finite number");
            // Canonicalize negative zero: "-0" parses back as the integer 0,
            // which would break byte-identical reserialization.
            if (v == 0.0) v = 0.0;
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out += buf;
            break;
        }
        case Json::value_t::string: append_escaped(out, j.get<std::string>()); break;
        default: throw std::domain_error("unexpected scalar type");
    }
}

bool all_scalars(const Json& arr) {
    for (const Json& e : arr) {
        if (e.is_object() || e.is_array()) return false;
    }
    return true;
}

void append_indent(std::string& out, int depth) { out.append(static_cast<std::size_t>(depth) * 2, ' '); }

void append_value(std::string& out, const Json& j, int depth);

// Scalar-only arrays stay on one line when short, otherwise wrap at eight
// elements per line.
void append_scalar_array(std::string& out, const Json& arr, int depth) {
    std::vector<std::string> parts;
    parts.reserve(arr.size());
    std::size_t total = 0;
    for (const Json& e : arr) {
        std::string s;
        append_scalar(s, e);
        total += s.size() + 2;
        parts.push_back(std::move(s));
    }
    if (total <= 100) {
        out += '[';
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) out += ", ";
            out += parts[i];
        }
        out += ']';
        return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i % 8 == 0) append_indent(out, depth + 1);
        out += parts[i];
        if (i + 1 < parts.size()) out += ',';
        out += (i % 8 == 7 || i + 1 == parts.size()) ? "\n" : " ";
    }
    append_indent(out, depth);
    out += ']';
}

void append_value(std::string& out, const Json& j, int depth) {
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t i = 0;
        for (const auto& item : j.items()) {
            append_indent(out, depth + 1);
            append_escaped(out, item.key());
            out += ": ";
            append_value(out, item.value(), depth + 1);
            if (++i < j.size()) out += ',';
            out += '\n';
        }
        append_indent(out, depth);
        out += '}';
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
        } else if (all_scalars(j)) {
            append_scalar_array(out, j, depth);
        } else {
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                append_indent(out, depth + 1);
                append_value(out, j[i], depth + 1);
                if (i + 1 < j.size()) out += ',';
                out += '\n';
            }
            append_indent(out, depth);
            out += ']';
        }
    } else {
        append_scalar(out, j);
    }
}

// ---------------------------------------------------------------- parsing

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

std::string index(const std::string& base, std::size_t i) {
    return (base.empty() ? std::string("value") : base) + "[" + std::to_string(i) + "]";
}

const Json& require(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(join(path, key), "missing required field");
    return *it;
}

const Json* find(const Json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void reject_unknown(const Json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) throw ParseError(join(path, item.key()), "unknown field");
    }
}

double as_double(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError(path, "expected a number");
    return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
        throw ParseError(path, "expected an integer");
    }
    const std::int64_t v = j.get<std::int64_t>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ParseError(path, "integer out of range");
    }
    return static_cast<int>(v);
}

std::uint64_t as_u64(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) {
        throw ParseError(path, "expected an integer");
    }
    if (j.is_number_integer() && j.get<std::int64_t>() < 0) {
        throw ParseError(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

bool as_bool(const Json& j, const std::string& path) {
    if (!j.is_boolean()) throw ParseError(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ParseError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_double_array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ParseError(path, "expected an array");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], index(path, i)));
    return out;
}

void check_header(const Json& j, const char* kind, const std::string& path) {
    if (!j.is_object()) throw ParseError(path, "expected an object document");
    if (as_int(require(j, "format_version", path), join(path, "format_version")) != 1) {
        throw ParseError(join(path, "format_version"), "unsupported format version");
    }
    const std::string k = as_string(require(j, "kind", path), join(path, "kind"));
    if (k != kind) {
        throw ParseError(join(path, "kind"),
                         "expected kind '" + std::string(kind) + "', found '" + k + "'");
    }
}

template <typename T>
void validate_as(const T& value, const std::string& path) {
    try {
        value.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, e.what());
    }
}

// ------------------------------------------------------ payload converters

Json range_to_json(const ValueRange& r) { return Json::array({r.lo, r.hi}); }

ValueRange range_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw ParseError(path, "expected an array of two numbers");
    return {as_double(j[0], index(path, 0)), as_double(j[1], index(path, 1))};
}

Json spec_fields_to_json(const SceneSpec& s) {
    Json j = Json::object();
    j["seed"] = s.seed;
    j["num_targets"] = s.num_targets;
    j["target_x"] = range_to_json(s.target_x);
    j["target_y"] = range_to_json(s.target_y);
    j["target_length"] = range_to_json(s.target_length);
    j["target_width"] = range_to_json(s.target_width);
    j["target_height"] = range_to_json(s.target_height);
    j["points_per_target"] = s.points_per_target;
    j["background_points"] = s.background_points;
    j["rig"] = Json{{"count", s.rig.count},
                    {"width", s.rig.width},
                    {"height", s.rig.height},
                    {"hfov_deg", s.rig.hfov_deg},
                    {"mount_height", s.rig.mount_height},
                    {"yaw_spread_deg", s.rig.yaw_spread_deg}};
    j["bins"] = Json{{"bins", s.bins.bins},
                     {"min_depth", s.bins.min_depth},
                     {"max_depth", s.bins.max_depth}};
    j["bev"] = Json{{"x_min", s.bev.x_min}, {"x_max", s.bev.x_max}, {"y_min", s.bev.y_min},
                    {"y_max", s.bev.y_max}, {"rows", s.bev.rows},   {"cols", s.bev.cols}};
    j["channels"] = s.channels;
    j["grid_side"] = s.grid_side;
    j["enlarge"] = s.enlarge;
    j["teacher_background_amplitude"] = s.teacher_background_amplitude;
    j["teacher_signature_amplitude"] = s.teacher_signature_amplitude;
    return j;
}

// Every field is optional and falls back to the built-in default, so config
// files may state only what they change.
SceneSpec spec_fields_from_json(const Json& j, const std::string& path) {
    SceneSpec s;
    reject_unknown(j,
                   {"seed", "num_targets", "target_x", "target_y", "target_length", "target_width",
                    "target_height", "points_per_target", "background_points", "rig", "bins", "bev",
                    "channels", "grid_side", "enlarge", "teacher_background_amplitude",
                    "teacher_signature_amplitude"},
                   path);
    if (const Json* v = find(j, "seed", path)) s.seed = as_u64(*v, join(path, "seed"));
    if (const Json* v = find(j, "num_targets", path)) s.num_targets = as_int(*v, join(path, "num_targets"));
    if (const Json* v = find(j, "target_x", path)) s.target_x = range_from_json(*v, join(path, "target_x"));
    if (const Json* v = find(j, "target_y", path)) s.target_y = range_from_json(*v, join(path, "target_y"));
    if (const Json* v = find(j, "target_length", path)) {
        s.target_length = range_from_json(*v, join(path, "target_length"));
    }
    if (const Json* v = find(j, "target_width", path)) {
        s.target_width = range_from_json(*v, join(path, "target_width"));
    }
    if (const Json* v = find(j, "target_height", path)) {
        s.target_height = range_from_json(*v, join(path, "target_height"));
    }
    if (const Json* v = find(j, "points_per_target", path)) {
        s.points_per_target = as_int(*v, join(path, "points_per_target"));
    }
    if (const Json* v = find(j, "background_points", path)) {
        s.background_points = as_int(*v, join(path, "background_points"));
    }
    if (const Json* v = find(j, "rig", path)) {
        const std::string p = join(path, "rig");
        reject_unknown(*v, {"count", "width", "height", "hfov_deg", "mount_height", "yaw_spread_deg"}, p);
        if (const Json* f = find(*v, "count", p)) s.rig.count = as_int(*f, join(p, "count"));
        if (const Json* f = find(*v, "width", p)) s.rig.width = as_int(*f, join(p, "width"));
        if (const Json* f = find(*v, "height", p)) s.rig.height = as_int(*f, join(p, "height"));
        if (const Json* f = find(*v, "hfov_deg", p)) s.rig.hfov_deg = as_double(*f, join(p, "hfov_deg"));
        if (const Json* f = find(*v, "mount_height", p)) {
            s.rig.mount_height = as_double(*f, join(p, "mount_height"));
        }
        if (const Json* f = find(*v, "yaw_spread_deg", p)) {
            s.rig.yaw_spread_deg = as_double(*f, join(p, "yaw_spread_deg"));
        }
    }
    if (const Json* v = find(j, "bins", path)) {
        const std::string p = join(path, "bins");
        reject_unknown(*v, {"bins", "min_depth", "max_depth"}, p);
        if (const Json* f = find(*v, "bins", p)) s.bins.bins = as_int(*f, join(p, "bins"));
        if (const Json* f = find(*v, "min_depth", p)) s.bins.min_depth = as_double(*f, join(p, "min_depth"));
        if (const Json* f = find(*v, "max_depth", p)) s.bins.max_depth = as_double(*f, join(p, "max_depth"));
    }
    if (const Json* v = find(j, "bev", path)) {
        const std::string p = join(path, "bev");
        reject_unknown(*v, {"x_min", "x_max", "y_min", "y_max", "rows", "cols"}, p);
        if (const Json* f = find(*v, "x_min", p)) s.bev.x_min = as_double(*f, join(p, "x_min"));
        if (const Json* f = find(*v, "x_max", p)) s.bev.x_max = as_double(*f, join(p, "x_max"));
        if (const Json* f = find(*v, "y_min", p)) s.bev.y_min = as_double(*f, join(p, "y_min"));
        if (const Json* f = find(*v, "y_max", p)) s.bev.y_max = as_double(*f, join(p, "y_max"));
        if (const Json* f = find(*v, "rows", p)) s.bev.rows = as_int(*f, join(p, "rows"));
        if (const Json* f = find(*v, "cols", p)) s.bev.cols = as_int(*f, join(p, "cols"));
    }
    if (const Json* v = find(j, "channels", path)) s.channels = as_int(*v, join(path, "channels"));
    if (const Json* v = find(j, "grid_side", path)) s.grid_side = as_int(*v, join(path, "grid_side"));
    if (const Json* v = find(j, "enlarge", path)) s.enlarge = as_double(*v, join(path, "enlarge"));
    if (const Json* v = find(j, "teacher_background_amplitude", path)) {
        s.teacher_background_amplitude = as_double(*v, join(path, "teacher_background_amplitude"));
    }
    if (const Json* v = find(j, "teacher_signature_amplitude", path)) {
        s.teacher_signature_amplitude = as_double(*v, join(path, "teacher_signature_amplitude"));
    }
    validate_as(s, path.empty() ? "scene spec" : path);
    return s;
}

Json grid_to_json(const BevFeatureGrid& g) {
    Json j = Json::object();
    j["channels"] = g.channels;
    j["spec"] = Json{{"x_min", g.spec.x_min}, {"x_max", g.spec.x_max}, {"y_min", g.spec.y_min},
                     {"y_max", g.spec.y_max}, {"rows", g.spec.rows},   {"cols", g.spec.cols}};
    j["values"] = g.values;
    return j;
}

BevFeatureGrid grid_from_json(const Json& j, const std::string& path) {
    reject_unknown(j, {"channels", "spec", "values"}, path);
    BevFeatureGrid g;
    g.channels = as_int(require(j, "channels", path), join(path, "channels"));
    const Json& sp = require(j, "spec", path);
    const std::string p = join(path, "spec");
    reject_unknown(sp, {"x_min", "x_max", "y_min", "y_max", "rows", "cols"}, p);
    g.spec.x_min = as_double(require(sp, "x_min", p), join(p, "x_min"));
    g.spec.x_max = as_double(require(sp, "x_max", p), join(p, "x_max"));
    g.spec.y_min = as_double(require(sp, "y_min", p), join(p, "y_min"));
    g.spec.y_max = as_double(require(sp, "y_max", p), join(p, "y_max"));
    g.spec.rows = as_int(require(sp, "rows", p), join(p, "rows"));
    g.spec.cols = as_int(require(sp, "cols", p), join(p, "cols"));
    g.values = as_double_array(require(j, "values", path), join(path, "values"));
    validate_as(g, path);
    return g;
}

Json probs_to_json(const CategoricalDepthMap& m) {
    Json j = Json::object();
    j["height"] = m.height;
    j["width"] = m.width;
    j["bins"] = m.bins;
    j["values"] = m.probs;
    return j;
}

CategoricalDepthMap probs_from_json(const Json& j, const std::string& path) {
    reject_unknown(j, {"height", "width", "bins", "values"}, path);
    CategoricalDepthMap m;
    m.height = as_int(require(j, "height", path), join(path, "height"));
    m.width = as_int(require(j, "width", path), join(path, "width"));
    m.bins = as_int(require(j, "bins", path), join(path, "bins"));
    m.probs = as_double_array(require(j, "values", path), join(path, "values"));
    validate_as(m, path);
    return m;
}

Json gt_depth_to_json(const GroundTruthDepthMap& m) {
    Json j = Json::object();
    j["height"] = m.height;
    j["width"] = m.width;
    j["depth"] = m.depth;
    Json valid = Json::array();
    for (const std::uint8_t v : m.valid) valid.push_back(v ? 1 : 0);
    j["valid"] = std::move(valid);
    return j;
}

GroundTruthDepthMap gt_depth_from_json(const Json& j, const std::string& path) {
    reject_unknown(j, {"height", "width", "depth", "valid"}, path);
    GroundTruthDepthMap m;
    m.height = as_int(require(j, "height", path), join(path, "height"));
    m.width = as_int(require(j, "width", path), join(path, "width"));
    m.depth = as_double_array(require(j, "depth", path), join(path, "depth"));
    const Json& valid = require(j, "valid", path);
    const std::string p = join(path, "valid");
    if (!valid.is_array()) throw ParseError(p, "expected an array");
    m.valid.reserve(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) {
        const int v = as_int(valid[i], index(p, i));
        if (v != 0 && v != 1) throw ParseError(index(p, i), "expected 0 or 1");
        m.valid.push_back(static_cast<std::uint8_t>(v));
    }
    validate_as(m, path);
    return m;
}

Json box_to_json(const Box3D& b) {
    Json j = Json::object();
    j["center"] = Json::array({b.center.x, b.center.y, b.center.z});
    j["length"] = b.length;
    j["width"] = b.width;
    j["height"] = b.height;
    j["yaw"] = b.yaw;
    return j;
}

Box3D box_from_json(const Json& j, const std::string& path) {
    reject_unknown(j, {"center", "length", "width", "height", "yaw"}, path);
    Box3D b;
    const std::vector<double> c =
        as_double_array(require(j, "center", path), join(path, "center"));
    if (c.size() != 3) throw ParseError(join(path, "center"), "expected an array of three numbers");
    b.center = {c[0], c[1], c[2]};
    b.length = as_double(require(j, "length", path), join(path, "length"));
    b.width = as_double(require(j, "width", path), join(path, "width"));
    b.height = as_double(require(j, "height", path), join(path, "height"));
    b.yaw = as_double(require(j, "yaw", path), join(path, "yaw"));
    validate_as(b, path);
    return b;
}

Json camera_to_json(const CameraModel& c) {
    Json j = Json::object();
    j["fx"] = c.fx;
    j["fy"] = c.fy;
    j["cx"] = c.cx;
    j["cy"] = c.cy;
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r) {
        rot.push_back(Json::array({c.rotation[r][0], c.rotation[r][1], c.rotation[r][2]}));
    }
    j["rotation"] = std::move(rot);
    j["translation"] = Json::array({c.translation[0], c.translation[1], c.translation[2]});
    j["width"] = c.width;
    j["height"] = c.height;
    return j;
}

CameraModel camera_from_json(const Json& j, const std::string& path) {
    reject_unknown(j, {"fx", "fy", "cx", "cy", "rotation", "translation", "width", "height"}, path);
    CameraModel c;
    c.fx = as_double(require(j, "fx", path), join(path, "fx"));
    c.fy = as_double(require(j, "fy", path), join(path, "fy"));
    c.cx = as_double(require(j, "cx", path), join(path, "cx"));
    c.cy = as_double(require(j, "cy", path), join(path, "cy"));
    const Json& rot = require(j, "rotation", path);
    const std::string rp = join(path, "rotation");
    if (!rot.is_array() || rot.size() != 3) throw ParseError(rp, "expected three rows");
    for (std::size_t r = 0; r < 3; ++r) {
        const std::vector<double> row = as_double_array(rot[r], index(rp, r));
        if (row.size() != 3) throw ParseError(index(rp, r), "expected three numbers");
        for (int k = 0; k < 3; ++k) c.rotation[r][k] = row[static_cast<std::size_t>(k)];
    }
    const std::vector<double> t =
        as_double_array(require(j, "translation", path), join(path, "translation"));
    if (t.size() != 3) throw ParseError(join(path, "translation"), "expected three numbers");
    for (int k = 0; k < 3; ++k) c.translation[k] = t[static_cast<std::size_t>(k)];
    c.width = as_int(require(j, "width", path), join(path, "width"));
    c.height = as_int(require(j, "height", path), join(path, "height"));
    validate_as(c, path);
    return c;
}

Json metrics_fields_to_json(const DepthMetricReport& r) {
    Json j = Json::object();
    j["rmse"] = r.rmse;
    j["rmse_log"] = r.rmse_log;
    j["abs_rel"] = r.abs_rel;
    j["sq_rel"] = r.sq_rel;
    j["log10"] = r.log10;
    j["silog"] = r.silog;
    j["delta1"] = r.delta1;
    j["delta2"] = r.delta2;
    j["delta3"] = r.delta3;
    j["n"] = r.n;
    return j;
}

Json report_fields_to_json(const LossReport& r) {
    Json j = Json::object();
    j["total"] = r.total;
    j["det"] = r.det;
    j["abs_depth"] = r.abs_depth;
    j["inner_depth"] = r.inner_depth;
    j["inter_channel"] = r.inter_channel;
    j["inter_keypoint"] = r.inter_keypoint;
    return j;
}

Json header(const char* kind) {
    Json j = Json::object();
    j["format_version"] = 1;
    j["kind"] = kind;
    return j;
}

}  // namespace

std::string to_text(const Json& doc) {
    std::string out;
    append_value(out, doc, 0);
    out += '\n';
    return out;
}

Json parse_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("", e.what());
    }
}

Json load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("", "cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("", path + ": " + e.what());
    }
}

void save_file(const std::string& path, const Json& doc) {
    const std::string text = to_text(doc);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed to write file: " + path);
}

Json to_json(const SceneSpec& spec) {
    Json j = header("scene-spec");
    j.update(spec_fields_to_json(spec));
    return j;
}

SceneSpec scene_spec_from_json(const Json& j) {
    check_header(j, "scene-spec", "");
    Json payload = j;
    payload.erase("format_version");
    payload.erase("kind");
    return spec_fields_from_json(payload, "");
}

Json to_json(const SceneDoc& doc) {
    Json j = header("scene");
    j["spec"] = spec_fields_to_json(doc.spec);
    Json boxes = Json::array();
    for (const Box3D& b : doc.scene.boxes) boxes.push_back(box_to_json(b));
    j["boxes"] = std::move(boxes);
    Json cloud = Json::array();
    for (const Vec3& p : doc.scene.cloud.points) cloud.push_back(Json::array({p.x, p.y, p.z}));
    j["cloud"] = std::move(cloud);
    Json cameras = Json::array();
    for (const CameraModel& c : doc.scene.cameras) cameras.push_back(camera_to_json(c));
    j["cameras"] = std::move(cameras);
    j["teacher_bev"] = grid_to_json(doc.scene.teacher_bev);
    Json gt = Json::array();
    for (const GroundTruthDepthMap& m : doc.scene.gt_depth) gt.push_back(gt_depth_to_json(m));
    j["gt_depth"] = std::move(gt);
    return j;
}

SceneDoc scene_doc_from_json(const Json& j) {
    check_header(j, "scene", "");
    reject_unknown(j, {"format_version", "kind", "spec", "boxes", "cloud", "cameras", "teacher_bev",
                       "gt_depth"},
                   "");
    SceneDoc doc;
    doc.spec = spec_fields_from_json(require(j, "spec", ""), "spec");
    const Json& boxes = require(j, "boxes", "");
    if (!boxes.is_array()) throw ParseError("boxes", "expected an array");
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        doc.scene.boxes.push_back(box_from_json(boxes[i], index("boxes", i)));
    }
    const Json& cloud = require(j, "cloud", "");
    if (!cloud.is_array()) throw ParseError("cloud", "expected an array");
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const std::vector<double> p = as_double_array(cloud[i], index("cloud", i));
        if (p.size() != 3) throw ParseError(index("cloud", i), "expected three numbers");
        doc.scene.cloud.points.push_back({p[0], p[1], p[2]});
    }
    const Json& cams = require(j, "cameras", "");
    if (!cams.is_array()) throw ParseError("cameras", "expected an array");
    for (std::size_t i = 0; i < cams.size(); ++i) {
        doc.scene.cameras.push_back(camera_from_json(cams[i], index("cameras", i)));
    }
    doc.scene.teacher_bev = grid_from_json(require(j, "teacher_bev", ""), "teacher_bev");
    const Json& gt = require(j, "gt_depth", "");
    if (!gt.is_array()) throw ParseError("gt_depth", "expected an array");
    for (std::size_t i = 0; i < gt.size(); ++i) {
        doc.scene.gt_depth.push_back(gt_depth_from_json(gt[i], index("gt_depth", i)));
    }
    validate_as(doc.scene, "scene");
    if (doc.scene.teacher_bev.channels != doc.spec.channels) {
        throw ParseError("teacher_bev.channels", "differs from spec.channels");
    }
    if (doc.scene.teacher_bev.spec.rows != doc.spec.bev.rows ||
        doc.scene.teacher_bev.spec.cols != doc.spec.bev.cols) {
        throw ParseError("teacher_bev.spec", "differs from spec.bev");
    }
    for (std::size_t i = 0; i < doc.scene.gt_depth.size(); ++i) {
        if (doc.scene.gt_depth[i].height != doc.scene.cameras[i].height ||
            doc.scene.gt_depth[i].width != doc.scene.cameras[i].width) {
            throw ParseError(index("gt_depth", i), "size differs from the camera image");
        }
    }
    return doc;
}

Json to_json(const StudentState& state) {
    Json j = header("student-state");
    Json probs = Json::array();
    for (const CategoricalDepthMap& m : state.probs) probs.push_back(probs_to_json(m));
    j["probs"] = std::move(probs);
    j["bev"] = grid_to_json(state.bev);
    return j;
}

StudentState student_state_from_json(const Json& j) {
    check_header(j, "student-state", "");
    reject_unknown(j, {"format_version", "kind", "probs", "bev"}, "");
    StudentState state;
    const Json& probs = require(j, "probs", "");
    if (!probs.is_array()) throw ParseError("probs", "expected an array");
    for (std::size_t i = 0; i < probs.size(); ++i) {
        state.probs.push_back(probs_from_json(probs[i], index("probs", i)));
    }
    state.bev = grid_from_json(require(j, "bev", ""), "bev");
    return state;
}

Json to_json(const LossWeights& weights) {
    Json j = Json::object();
    j["det"] = weights.w_det;
    j["abs"] = weights.w_abs_depth;
    j["inner"] = weights.w_inner_depth;
    j["ic"] = weights.w_ic;
    j["ik"] = weights.w_ik;
    return j;
}

LossWeights weights_from_json(const Json& j) {
    const std::string path = "weights";
    reject_unknown(j, {"det", "abs", "inner", "ic", "ik"}, path);
    LossWeights w;
    if (const Json* v = find(j, "det", path)) w.w_det = as_double(*v, join(path, "det"));
    if (const Json* v = find(j, "abs", path)) w.w_abs_depth = as_double(*v, join(path, "abs"));
    if (const Json* v = find(j, "inner", path)) w.w_inner_depth = as_double(*v, join(path, "inner"));
    if (const Json* v = find(j, "ic", path)) w.w_ic = as_double(*v, join(path, "ic"));
    if (const Json* v = find(j, "ik", path)) w.w_ik = as_double(*v, join(path, "ik"));
    try {
        w.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, e.what());
    }
    return w;
}

Json to_json(const FitConfig& config) {
    Json j = header("fit-config");
    j["steps"] = config.steps;
    j["learning_rate"] = config.learning_rate;
    j["weights"] = to_json(config.weights);
    j["seed"] = config.seed;
    j["record_every"] = config.record_every;
    j["simplex_projection"] = config.simplex_projection;
    j["init_mode"] = config.init_mode;
    j["init_noise_amplitude"] = config.init_noise_amplitude;
    j["normalize_keypoints"] = config.normalize_keypoints;
    j["grid_init_jitter"] = config.grid_init_jitter;
    return j;
}

FitConfig fit_config_from_json(const Json& j) {
    check_header(j, "fit-config", "");
    reject_unknown(j, {"format_version", "kind", "steps", "learning_rate", "weights", "seed",
                       "record_every", "simplex_projection", "init_mode", "init_noise_amplitude",
                       "normalize_keypoints", "grid_init_jitter"},
                   "");
    FitConfig c;
    if (const Json* v = find(j, "steps", "")) c.steps = as_int(*v, "steps");
    if (const Json* v = find(j, "learning_rate", "")) c.learning_rate = as_double(*v, "learning_rate");
    if (const Json* v = find(j, "weights", "")) c.weights = weights_from_json(*v);
    if (const Json* v = find(j, "seed", "")) c.seed = as_u64(*v, "seed");
    if (const Json* v = find(j, "record_every", "")) c.record_every = as_int(*v, "record_every");
    if (const Json* v = find(j, "simplex_projection", "")) {
        c.simplex_projection = as_string(*v, "simplex_projection");
        if (c.simplex_projection != "renormalize" && c.simplex_projection != "none") {
            throw ParseError("simplex_projection", "expected 'renormalize' or 'none'");
        }
    }
    if (const Json* v = find(j, "init_mode", "")) {
        c.init_mode = as_string(*v, "init_mode");
        try {
            parse_init_mode(c.init_mode);
        } catch (const std::domain_error& e) {
            throw ParseError("init_mode", e.what());
        }
    }
    if (const Json* v = find(j, "init_noise_amplitude", "")) {
        c.init_noise_amplitude = as_double(*v, "init_noise_amplitude");
    }
    if (const Json* v = find(j, "normalize_keypoints", "")) {
        c.normalize_keypoints = as_bool(*v, "normalize_keypoints");
    }
    if (const Json* v = find(j, "grid_init_jitter", "")) {
        c.grid_init_jitter = as_double(*v, "grid_init_jitter");
    }
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError("", e.what());
    }
    return c;
}

Json to_json(const LossReport& report) {
    Json j = header("loss-report");
    j.update(report_fields_to_json(report));
    return j;
}

Json to_json(const DepthMetricReport& report) {
    Json j = header("metric-report");
    j.update(metrics_fields_to_json(report));
    return j;
}

Json to_json(const FitTrace& trace) {
    Json j = header("fit-trace");
    j["diverged"] = trace.diverged;
    Json records = Json::array();
    for (const FitRecord& r : trace.records) {
        Json rec = Json::object();
        rec["step"] = r.step;
        rec.update(report_fields_to_json(r.report));
        records.push_back(std::move(rec));
    }
    j["records"] = std::move(records);
    j["initial_metrics"] = metrics_fields_to_json(trace.initial_metrics);
    j["final_metrics"] = metrics_fields_to_json(trace.final_metrics);
    j["initial_gram_mismatch"] = trace.initial_gram_mismatch;
    j["final_gram_mismatch"] = trace.final_gram_mismatch;
    return j;
}

Json to_json(const std::vector<GradCheckRow>& rows) {
    Json j = header("gradcheck-report");
    Json arr = Json::array();
    for (const GradCheckRow& r : rows) {
        Json row = Json::object();
        row["loss"] = to_string(r.kind);
        row["instances"] = r.instances;
        row["coords_per_instance"] = r.coords_per_instance;
        row["max_rel_error"] = r.max_rel_error;
        arr.push_back(std::move(row));
    }
    j["rows"] = std::move(arr);
    return j;
}

Json depth_list_to_json(const std::vector<double>& values) {
    Json j = header("depth-list");
    j["values"] = values;
    return j;
}

std::vector<double> depth_list_from_json(const Json& j) {
    check_header(j, "depth-list", "");
    reject_unknown(j, {"format_version", "kind", "values"}, "");
    return as_double_array(require(j, "values", ""), "values");
}

}  // namespace igd
