#include "vrmc/serialize.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "vrmc/errors.hpp"

namespace vrmc::io {
namespace {

Json nest(std::span<const double> flat, std::size_t outer, std::size_t inner) {
    Json out = Json::array();
    for (std::size_t i = 0; i < outer; ++i) {
        out.push_back(std::vector<double>(flat.begin() + i * inner, flat.begin() + (i + 1) * inner));
    }
    return out;
}

Json nest(std::span<const double> flat, std::size_t d0, std::size_t d1, std::size_t d2) {
    Json out = Json::array();
    for (std::size_t i = 0; i < d0; ++i) out.push_back(nest(flat.subspan(i * d1 * d2), d1, d2));
    return out;
}

/// Flattens a nested array whose extents must equal `dims`.
void flatten(const Json& j, std::span<const std::size_t> dims, std::vector<double>& out,
             const std::string& what) {
    if (dims.empty()) {
        if (!j.is_number()) throw ValidationError(what + ": expected a number");
        out.push_back(j.get<double>());
        return;
    }
    if (!j.is_array() || j.size() != dims[0]) {
        throw DimensionError(what + ": expected an array of length " + std::to_string(dims[0]));
    }
    for (const Json& x : j) flatten(x, dims.subspan(1), out, what);
}

std::vector<double> flat(const Json& j, std::initializer_list<std::size_t> dims,
                         const std::string& what) {
    std::vector<double> out;
    flatten(j, std::span<const std::size_t>(dims.begin(), dims.size()), out, what);
    return out;
}

std::size_t get_size(const Json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
        throw ValidationError(std::string("missing or invalid '") + key + "'");
    }
    return j.at(key).get<std::size_t>();
}

Shape shape_from_json(const Json& j) {
    return {get_size(j, "horizon"), get_size(j, "num_states"), get_size(j, "num_actions")};
}

void put_shape(Json& j, const Shape& shape) {
    j["horizon"] = shape.horizon;
    j["num_states"] = shape.num_states;
    j["num_actions"] = shape.num_actions;
}

Json table_json(const StateTable& t) { return nest(t.values(), t.horizon(), t.num_states()); }

Json table_json(const StateActionTable& t) {
    const Shape& s = t.shape();
    return nest(t.values(), s.horizon, s.num_states, s.num_actions);
}

std::size_t parse_index(std::string_view field, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError("dataset line " + std::to_string(line) + ": bad integer '" +
                              std::string(field) + "'");
    }
    return v;
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ValidationError("dataset line " + std::to_string(line) + ": bad number '" +
                              std::string(field) + "'");
    }
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

Json to_json(const TabularMDP& mdp) {
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    Json j;
    j["num_states"] = S;
    j["num_actions"] = A;
    j["horizon"] = mdp.horizon();
    j["reward"] = nest(mdp.rewards(), S, A);
    j["transition"] = nest(mdp.transitions(), S, A, S);
    j["initial"] = std::vector<double>(mdp.initial().begin(), mdp.initial().end());
    return j;
}

TabularMDP mdp_from_json(const Json& j) {
    const std::size_t S = get_size(j, "num_states");
    const std::size_t A = get_size(j, "num_actions");
    const std::size_t T = get_size(j, "horizon");
    return TabularMDP(S, A, T, flat(j.at("reward"), {S, A}, "reward"),
                      flat(j.at("transition"), {S, A, S}, "transition"),
                      flat(j.at("initial"), {S}, "initial"));
}

Json to_json(const TimedPolicy& policy) {
    const Shape& s = policy.shape();
    Json j;
    put_shape(j, s);
    j["probs"] = nest(policy.values(), s.horizon, s.num_states, s.num_actions);
    return j;
}

TimedPolicy policy_from_json(const Json& j) {
    const Shape s = shape_from_json(j);
    return TimedPolicy(s, flat(j.at("probs"), {s.horizon, s.num_states, s.num_actions}, "probs"));
}

Json to_json(const LinearModel& model) {
    Json j;
    j["feature_kind"] = std::string(to_string(model.features.kind()));
    put_shape(j, model.features.shape());
    j["dims"] = model.features.dims();
    j["weights"] = model.weights;
    return j;
}

LinearModel model_from_json(const Json& j) {
    const FeatureMap map(feature_kind_from_string(j.at("feature_kind").get<std::string>()),
                         shape_from_json(j));
    if (get_size(j, "dims") != map.dims()) throw DimensionError("model dims do not match shape");
    return LinearModel(map, flat(j.at("weights"), {map.dims()}, "weights"));
}

Json to_json(const TrainConfig& c) {
    return Json{{"lr_r", c.lr_r},
                {"lr_q", c.lr_q},
                {"lr_q_hat", c.lr_q_hat},
                {"batch_size", c.batch_size},
                {"steps", c.steps},
                {"train_fraction", c.train_fraction},
                {"seed", c.seed},
                {"floor", c.floor}};
}

TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    c.lr_r = j.value("lr_r", c.lr_r);
    c.lr_q = j.value("lr_q", c.lr_q);
    c.lr_q_hat = j.value("lr_q_hat", c.lr_q_hat);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.steps = j.value("steps", c.steps);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.seed = j.value("seed", c.seed);
    c.floor = j.value("floor", c.floor);
    validate(c);
    return c;
}

Json to_json(const dp::ValueTables& t) {
    return Json{{"v", table_json(t.v)},
                {"q", table_json(t.q)},
                {"nu", table_json(t.nu)},
                {"r_tilde", table_json(t.r_tilde)},
                {"q_tilde", table_json(t.q_tilde)},
                {"r_hat", table_json(t.r_hat)},
                {"q_hat", table_json(t.q_hat)},
                {"u", table_json(t.u)},
                {"w_var", table_json(t.w_var)},
                {"c_cost", table_json(t.c_cost)},
                {"epsilon", table_json(t.epsilon)}};
}

void write_dataset_csv(std::ostream& out, const OfflineDataset& data, bool with_next) {
    out << (with_next ? "t,s,a,r,s_next,a_next\n" : "t,s,a,r,s_next\n");
    for (const OfflineTuple& x : data) {
        out << x.t << ',' << x.s << ',' << x.a << ',' << format_double(x.r) << ',' << x.s_next;
        if (with_next) {
            out << ',';
            if (x.a_next) out << *x.a_next;
        }
        out << '\n';
    }
}

OfflineDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dataset is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool with_next = false;
    if (line == "t,s,a,r,s_next,a_next") {
        with_next = true;
    } else if (line != "t,s,a,r,s_next") {
        throw ValidationError("unexpected dataset header '" + line + "'");
    }
    OfflineDataset data;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != (with_next ? 6u : 5u)) {
            throw ValidationError("dataset line " + std::to_string(line_no) +
                                  ": wrong number of fields");
        }
        OfflineTuple x;
        x.t = parse_index(fields[0], line_no);
        x.s = parse_index(fields[1], line_no);
        x.a = parse_index(fields[2], line_no);
        x.r = parse_double(fields[3], line_no);
        x.s_next = parse_index(fields[4], line_no);
        if (with_next && !fields[5].empty()) x.a_next = parse_index(fields[5], line_no);
        data.push_back(x);
    }
    return data;
}

void write_adaptive_log_csv(std::ostream& out, std::span<const EpisodeRecord> log) {
    out << "episode,arm,G,neg_G_sq,J_so_far\n";
    for (const EpisodeRecord& e : log) {
        out << e.episode << ',' << to_string(e.arm) << ',' << format_double(e.g) << ','
            << format_double(e.neg_g_sq) << ',' << format_double(e.j_so_far) << '\n';
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << contents;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

Json read_json_file(const std::filesystem::path& path) {
    try {
        return Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
    write_file(path, j.dump(2) + "\n");
}

} // namespace vrmc::io
