#include "io.hpp"

#include "tractdyn/error.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace tractdyn::io {

namespace {

const Json &field(const Json &j, const char *name) {
    if (!j.is_object() || !j.contains(name)) {
        throw ValidationError(std::string("missing field '") + name + "'");
    }
    return j.at(name);
}

std::string label_of(const Json &j) {
    if (!j.is_string()) {
        throw ValidationError("labels must be strings, got " + j.dump());
    }
    return j.get<std::string>();
}

template <class T> T unsigned_of(const Json &j, const char *what) {
    if (!j.is_number_unsigned()) {
        throw ValidationError(std::string(what) + " must be a nonnegative integer");
    }
    return j.get<T>();
}

std::map<std::string, std::size_t> label_index(const std::vector<std::string> &labels) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        index.emplace(labels[i], i);
    }
    return index;
}

std::size_t lookup(const std::map<std::string, std::size_t> &index, const std::string &label) {
    const auto it = index.find(label);
    if (it == index.end()) {
        throw ValidationError("unknown label '" + label + "'");
    }
    return it->second;
}

Json labels_json(const std::vector<std::string> &labels, const std::vector<std::size_t> &members) {
    Json out = Json::array();
    for (std::size_t m : members) {
        out.push_back(labels[m]);
    }
    return out;
}

Json interval_json(const simplicial::Interval &i) {
    return Json::array({format_rational(i.lo), format_rational(i.hi)});
}

double as_double(const Json &j) {
    if (j.is_number()) {
        return j.get<double>();
    }
    return rational_from_json(j).get_d();
}

} // namespace

Json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_atomic(const std::filesystem::path &path, const std::string &content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write '" + tmp.string() + "'");
        }
        out << content;
        if (!out) {
            throw ValidationError("write to '" + tmp.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string dump(const Json &j) { return j.dump(2) + "\n"; }

Rational rational_from_json(const Json &j) {
    if (j.is_string()) {
        return parse_rational(j.get<std::string>());
    }
    if (j.is_number_integer()) {
        return Rational(std::to_string(j.get<long long>()));
    }
    throw ValidationError("expected a rational \"p/q\", got " + j.dump());
}

FiniteRelation relation_from_json(const Json &j) {
    const Json &elements = field(j, "elements");
    const Json &edges = field(j, "edges");
    if (!elements.is_array() || !edges.is_array()) {
        throw ValidationError("relation needs arrays 'elements' and 'edges'");
    }
    std::vector<std::string> labels;
    for (const auto &e : elements) {
        labels.push_back(label_of(e));
    }
    FiniteRelation check(labels, {});
    const auto index = label_index(labels);
    std::vector<Edge> list;
    for (const auto &e : edges) {
        if (!e.is_array() || e.size() != 2) {
            throw ValidationError("each edge must be a pair of labels");
        }
        list.emplace_back(lookup(index, label_of(e[0])), lookup(index, label_of(e[1])));
    }
    return FiniteRelation(std::move(labels), std::move(list));
}

StochasticCover cover_from_json(const Json &j) {
    FiniteRelation relation = relation_from_json(field(j, "relation"));
    const Json &rows = field(j, "matrix");
    const auto n = static_cast<Eigen::Index>(relation.size());
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) {
        throw ValidationError("matrix must have one row per element");
    }
    Eigen::MatrixXd matrix(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const Json &row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ValidationError("matrix row " + std::to_string(r) + " has the wrong length");
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            matrix(r, c) = as_double(row[static_cast<std::size_t>(c)]);
        }
    }
    return validate_cover(std::move(relation), std::move(matrix));
}

TwoAlphabetModel model_from_json(const Json &j) {
    std::vector<std::string> star, base;
    for (const auto &e : field(j, "Kstar")) {
        star.push_back(label_of(e));
    }
    for (const auto &e : field(j, "K")) {
        base.push_back(label_of(e));
    }
    const auto star_index = label_index(star);
    const auto base_index = label_index(base);
    auto map_of = [&](const char *name) {
        const Json &m = field(j, name);
        if (!m.is_object()) {
            throw ValidationError(std::string("'") + name + "' must map K* labels to K labels");
        }
        std::vector<std::size_t> out(star.size(), 0);
        std::vector<char> seen(star.size(), 0);
        for (const auto &[key, value] : m.items()) {
            const auto s = lookup(star_index, key);
            out[s] = lookup(base_index, label_of(value));
            seen[s] = 1;
        }
        for (std::size_t s = 0; s < star.size(); ++s) {
            if (!seen[s]) {
                throw ValidationError(std::string("'") + name + "' has no value for '" + star[s] + "'");
            }
        }
        return out;
    };
    std::vector<std::size_t> J = map_of("J");
    std::vector<std::size_t> gamma = map_of("gamma");

    const Json &nu = field(j, "nu");
    if (!nu.is_object()) {
        throw ValidationError("'nu' must map K* labels to weights");
    }
    bool exact = true;
    for (const auto &[key, value] : nu.items()) {
        exact = exact && (value.is_string() || value.is_number_integer());
    }
    std::vector<std::optional<Json>> values(star.size());
    for (const auto &[key, value] : nu.items()) {
        values[lookup(star_index, key)] = value;
    }
    for (std::size_t s = 0; s < star.size(); ++s) {
        if (!values[s]) {
            throw ValidationError("'nu' has no value for '" + star[s] + "'");
        }
    }
    if (exact) {
        std::vector<Rational> weights;
        for (const auto &v : values) {
            weights.push_back(rational_from_json(*v));
        }
        return build_model(std::move(star), std::move(base), std::move(J), std::move(gamma), std::move(weights));
    }
    std::vector<double> weights;
    for (const auto &v : values) {
        weights.push_back(as_double(*v));
    }
    return build_model(std::move(star), std::move(base), std::move(J), std::move(gamma), std::move(weights));
}

shiftlike::SlidingBlockCode code_from_json(const Json &j) {
    shiftlike::SlidingBlockCode code;
    code.N = unsigned_of<unsigned>(field(j, "N"), "N");
    code.m = unsigned_of<unsigned>(field(j, "m"), "m");
    for (const auto &v : field(j, "phi")) {
        code.phi.push_back(unsigned_of<shiftlike::Symbol>(v, "phi entry"));
    }
    shiftlike::validate_code(code);
    return code;
}

shiftlike::ShiftLikeSystem gamma_table_from_json(const Json &j) {
    std::vector<std::uint64_t> gamma;
    for (const auto &v : field(j, "gamma")) {
        gamma.push_back(unsigned_of<std::uint64_t>(v, "gamma entry"));
    }
    return shiftlike::ShiftLikeSystem(unsigned_of<unsigned>(field(j, "N"), "N"),
                                      unsigned_of<unsigned>(field(j, "n"), "n"),
                                      unsigned_of<unsigned>(field(j, "k"), "k"), std::move(gamma));
}

simplicial::IntervalComplex complex_from_json(const Json &j) {
    const Json &list = j.is_array() ? j : field(j, "vertices");
    if (!list.is_array()) {
        throw ValidationError("complex vertices must be an array");
    }
    std::vector<Rational> vertices;
    for (const auto &v : list) {
        vertices.push_back(rational_from_json(v));
    }
    return simplicial::IntervalComplex(std::move(vertices));
}

simplicial::VertexMap vertex_map_from_json(const Json &j) {
    simplicial::VertexMap map{complex_from_json(field(j, "K")), complex_from_json(field(j, "Kstar")), {}};
    simplicial::check_subdivision(map.K, map.Kstar);
    const Json &vmap = field(j, "vmap");
    if (!vmap.is_object()) {
        throw ValidationError("'vmap' must map K* vertices to K vertices");
    }
    std::map<Rational, Rational> values;
    for (const auto &[key, value] : vmap.items()) {
        const Rational x = parse_rational(key);
        if (!map.Kstar.vertex_index(x)) {
            throw ValidationError("vmap key " + key + " is not a K* vertex");
        }
        if (!values.emplace(x, rational_from_json(value)).second) {
            throw ValidationError("vmap lists vertex " + key + " twice");
        }
    }
    for (const auto &w : map.Kstar.vertices()) {
        const auto it = values.find(w);
        if (it == values.end()) {
            throw ValidationError("vmap has no image for K* vertex " + format_rational(w));
        }
        const auto v = map.K.vertex_index(it->second);
        if (!v) {
            throw ValidationError("vmap image " + format_rational(it->second) + " is not a K vertex");
        }
        map.image.push_back(*v);
    }
    return map;
}

Rational SampledMap::operator()(const Rational &x) const {
    auto it = std::lower_bound(samples.begin(), samples.end(), x,
                               [](const auto &s, const Rational &v) { return s.first < v; });
    if (it == samples.end()) {
        throw ValidationError("f is not sampled at " + format_rational(x));
    }
    if (it->first == x) {
        return it->second;
    }
    if (it == samples.begin()) {
        throw ValidationError("f is not sampled at " + format_rational(x));
    }
    const auto &[x1, y1] = *it;
    const auto &[x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

SampledMap sampled_map_from_json(const Json &j) {
    SampledMap f{complex_from_json(field(j, "complex")), {}, rational_from_json(field(j, "lipschitz"))};
    for (const auto &pair : field(j, "samples")) {
        if (!pair.is_array() || pair.size() != 2) {
            throw ValidationError("each sample must be a pair [x, f(x)]");
        }
        f.samples.emplace_back(rational_from_json(pair[0]), rational_from_json(pair[1]));
    }
    for (std::size_t i = 1; i < f.samples.size(); ++i) {
        if (!(f.samples[i - 1].first < f.samples[i].first)) {
            throw ValidationError("sample abscissae must be strictly increasing");
        }
    }
    if (f.samples.empty() || f.samples.front().first != f.K.hull().lo || f.samples.back().first != f.K.hull().hi) {
        throw ValidationError("samples must start and end at the endpoints of the complex");
    }
    return f;
}

Json relation_to_json(const FiniteRelation &relation) {
    Json edges = Json::array();
    for (const auto &[a, b] : relation.edges()) {
        edges.push_back(Json::array({relation.label(a), relation.label(b)}));
    }
    return Json{{"elements", relation.elements()}, {"edges", edges}};
}

Json gamma_table_to_json(const shiftlike::ShiftLikeSystem &system) {
    return Json{{"N", system.N()}, {"n", system.n()}, {"k", system.k()}, {"gamma", system.gamma()}};
}

Json system_to_json(const simplicial::SimplicialSystem1D &system) {
    auto vertices = [](const simplicial::IntervalComplex &c) {
        Json out = Json::array();
        for (const auto &v : c.vertices()) {
            out.push_back(format_rational(v));
        }
        return Json{{"vertices", out}};
    };
    Json vmap = Json::object();
    for (std::size_t i = 0; i < system.Kstar().vertex_count(); ++i) {
        vmap[format_rational(system.Kstar().vertex(i))] = format_rational(system.K().vertex(system.vertex_image()[i]));
    }
    return Json{{"K", vertices(system.K())}, {"Kstar", vertices(system.Kstar())}, {"vmap", vmap}};
}

Json decomposition_to_json(const FiniteRelation &relation, const BasicSetDecomposition &decomposition) {
    const auto &labels = relation.elements();
    Json basic = Json::array();
    Json terminal = Json::array();
    for (std::size_t c = 0; c < decomposition.classes.size(); ++c) {
        basic.push_back(labels_json(labels, decomposition.classes[c]));
        if (decomposition.terminal[c]) {
            terminal.push_back(labels_json(labels, decomposition.classes[c]));
        }
    }
    Json order = Json::array();
    for (const auto &[a, b] : decomposition.order) {
        order.push_back(Json::array({a, b}));
    }
    return Json{{"elements", labels},
                {"basic_sets", basic},
                {"terminal", terminal},
                {"transient", labels_json(labels, decomposition.transient)},
                {"order", order}};
}

Json trac_to_json(const TracStatus &t1, const TracStatus &t2, const TracStatus &t3, const TracStatus &t4) {
    Json out = Json::object();
    const TracStatus *all[] = {&t1, &t2, &t3, &t4};
    for (int i = 0; i < 4; ++i) {
        out["TRAC" + std::to_string(i + 1)] = Json{{"satisfied", all[i]->satisfied}, {"detail", all[i]->detail}};
    }
    return out;
}

Json subshift_report_to_json(const SubshiftReport &report) {
    const auto &labels = report.relation.elements();
    Json basic = Json::array();
    Json terminal = Json::array();
    Json visible = Json::array();
    for (const auto &c : report.classes) {
        basic.push_back(labels_json(labels, c.members));
        if (c.terminal) {
            terminal.push_back(labels_json(labels, c.members));
        }
        if (c.visible) {
            visible.push_back(labels_json(labels, c.members));
        }
    }
    Json order = Json::array();
    for (const auto &[a, b] : report.order) {
        order.push_back(Json::array({a, b}));
    }
    Json stationary = Json::array();
    for (std::size_t t = 0; t < report.terminal_classes.size(); ++t) {
        Json dist = Json::object();
        for (std::size_t s : report.stationary[t].support()) {
            dist[labels[s]] = report.stationary[t][s];
        }
        stationary.push_back(Json{{"class", labels_json(labels, report.classes[report.terminal_classes[t]].members)},
                                  {"distribution", dist}});
    }
    Json background = Json::object();
    for (std::size_t s = 0; s < labels.size(); ++s) {
        background[labels[s]] = report.background[s];
    }
    return Json{{"elements", labels},
                {"basic_sets", basic},
                {"terminal", terminal},
                {"visible", visible},
                {"transient", labels_json(labels, report.transient)},
                {"order", order},
                {"background", background},
                {"stationary", stationary},
                {"decay", Json{{"n", report.decay.n}, {"rho", report.decay.rho}}},
                {"trac", trac_to_json(report.trac1, report.trac2, report.trac3, report.trac4)}};
}

Json genericity_to_json(const GenericityReport &report, const FiniteRelation &relation,
                        const BasicSetDecomposition &decomposition) {
    Json out{{"T", report.path_length},
             {"L", report.word_length_cap},
             {"entered", report.entered_class
                             ? labels_json(relation.elements(), decomposition.classes[*report.entered_class])
                             : Json()},
             {"entry_time", report.entry_time},
             {"max_dev", report.max_deviation},
             {"threshold", report.threshold},
             {"pass", report.pass}};
    if (!report.note.empty()) {
        out["note"] = report.note;
    }
    return out;
}

Json correspondence_to_json(const TwoAlphabetModel &model, const Correspondence &correspondence) {
    Json pairs = Json::array();
    for (const auto &p : correspondence.pairs) {
        pairs.push_back(Json{{"star", labels_json(model.star_labels(), correspondence.star.classes[p.star_class])},
                             {"base", labels_json(model.base_labels(), correspondence.base.classes[p.base_class])},
                             {"terminal", p.terminal}});
    }
    return Json{{"G", relation_to_json(correspondence.relations.base)},
                {"Gstar", relation_to_json(correspondence.relations.star)},
                {"pairs", pairs}};
}

Json shiftlike_report_to_json(const shiftlike::ShiftLikeReport &report) {
    const auto &model = report.model;
    const auto &corr = report.correspondence;
    Json terminal = Json::array();
    Json stationary = Json::array();
    Json measures = Json::array();
    for (const auto &t : report.terminals) {
        const auto &members = corr.base.classes[t.base_class];
        terminal.push_back(labels_json(model.base_labels(), members));
        Json dist = Json::object();
        for (std::size_t s : members) {
            dist[model.base_labels()[s]] = format_rational(t.stationary[s]);
        }
        stationary.push_back(Json{{"class", labels_json(model.base_labels(), members)},
                                  {"distribution", dist},
                                  {"identity", t.stationary_identity}});
        Json weights = Json::object();
        for (const auto &w : t.measure) {
            weights[w.word] = format_rational(w.weight);
        }
        measures.push_back(Json{{"class", labels_json(model.base_labels(), members)},
                                {"weights", weights},
                                {"support_cylinders", t.support_cylinders}});
    }
    Json basic = Json::array();
    for (const auto &p : corr.pairs) {
        basic.push_back(Json{{"star", labels_json(model.star_labels(), corr.star.classes[p.star_class])},
                             {"base", labels_json(model.base_labels(), corr.base.classes[p.base_class])},
                             {"terminal", p.terminal}});
    }
    return Json{{"N", report.N},
                {"n", report.n},
                {"k", report.k},
                {"nu", format_rational(report.model.nu_exact(0))},
                {"basic_sets", basic},
                {"terminal", terminal},
                {"transient", labels_json(model.star_labels(), corr.star.transient)},
                {"stationary", stationary},
                {"measures", measures},
                {"trac", trac_to_json(report.trac1, report.trac2, report.trac3, report.trac4)}};
}

Json pl_report_to_json(const simplicial::PLReport &report) {
    const auto &model = report.model;
    const auto &corr = report.correspondence;
    const auto &labels = model.base_labels();
    Json decomposition = decomposition_to_json(corr.relations.base, corr.base);
    Json background = Json::object();
    for (std::size_t s = 0; s < labels.size(); ++s) {
        background[labels[s]] = format_rational(report.background[s]);
    }
    Json stationary = Json::array();
    Json measures = Json::array();
    for (const auto &t : report.terminals) {
        const auto &members = corr.base.classes[t.base_class];
        Json dist = Json::object();
        for (std::size_t s : members) {
            dist[labels[s]] = format_rational(t.stationary[s]);
        }
        stationary.push_back(Json{{"class", labels_json(labels, members)},
                                  {"distribution", dist},
                                  {"identity", t.stationary_identity}});
        Json support = Json::array();
        for (const auto &i : t.support) {
            support.push_back(interval_json(i));
        }
        Json density = Json::array();
        for (const auto &piece : t.density) {
            density.push_back(Json{{"interval", interval_json(piece.interval)},
                                   {"weight", format_rational(piece.weight)},
                                   {"density", format_rational(piece.density)}});
        }
        measures.push_back(Json{{"class", labels_json(labels, members)}, {"support", support}, {"density", density}});
    }
    Json flags = Json::array();
    for (const auto &f : report.flags) {
        Json related = Json::array();
        for (std::size_t r : f.related) {
            related.push_back(labels_json(labels, corr.base.classes[r]));
        }
        flags.push_back(Json{{"class", labels_json(labels, corr.base.classes[f.base_class])},
                             {"kind", simplicial::flag_name(f.kind)},
                             {"related", related},
                             {"detail", f.detail}});
    }
    Json nu = Json::object();
    for (std::size_t s = 0; s < model.star_size(); ++s) {
        nu[model.star_labels()[s]] = format_rational(model.nu_exact(s));
    }
    return Json{{"system", system_to_json(report.system)},
                {"theta", format_rational(report.theta)},
                {"G", relation_to_json(corr.relations.base)},
                {"nu", nu},
                {"basic_sets", decomposition["basic_sets"]},
                {"terminal", decomposition["terminal"]},
                {"transient", decomposition["transient"]},
                {"order", decomposition["order"]},
                {"background", background},
                {"stationary", stationary},
                {"decay", Json{{"n", report.decay.n}, {"rho", report.decay.rho}}},
                {"measures", measures},
                {"flags", flags},
                {"trac", trac_to_json(report.trac1, report.trac2, report.trac3, report.trac4)}};
}

Json birkhoff_to_json(const simplicial::BirkhoffExperiment &experiment) {
    Json bins = Json::array();
    for (std::size_t b = 0; b < experiment.bins.size(); ++b) {
        bins.push_back(Json{{"interval", interval_json(experiment.bins[b])},
                            {"empirical", experiment.empirical[b]},
                            {"expected", experiment.expected[b]}});
    }
    return Json{{"T", experiment.segments},
                {"depth", experiment.depth},
                {"bins", bins},
                {"max_dev", experiment.max_deviation},
                {"threshold", experiment.threshold},
                {"pass", experiment.pass}};
}

std::string pl_report_svg(const simplicial::PLReport &report) {
    const auto &system = report.system;
    const double lo = system.K().hull().lo.get_d();
    const double hi = system.K().hull().hi.get_d();
    const double size = 400.0, pad = 20.0;
    auto sx = [&](double x) { return pad + (x - lo) / (hi - lo) * size; };
    auto sy = [&](double y) { return pad + size - (y - lo) / (hi - lo) * size; };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };

    std::ostringstream svg;
    const std::string total = num(size + 2 * pad);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total
        << "\" viewBox=\"0 0 " << total << " " << total << "\">\n";
    svg << "<rect x=\"" << num(pad) << "\" y=\"" << num(pad) << "\" width=\"" << num(size) << "\" height=\""
        << num(size) << "\" fill=\"white\" stroke=\"black\"/>\n";
    const char *shades[] = {"#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc", "#fc9272"};
    for (std::size_t t = 0; t < report.terminals.size(); ++t) {
        for (const auto &i : report.terminals[t].support) {
            const double a = i.lo.get_d(), b = i.hi.get_d();
            svg << "<rect x=\"" << num(sx(a)) << "\" y=\"" << num(sy(b)) << "\" width=\"" << num(sx(b) - sx(a))
                << "\" height=\"" << num(sy(a) - sy(b)) << "\" fill=\"" << shades[t % 5]
                << "\" fill-opacity=\"0.5\"/>\n";
        }
    }
    for (const auto &v : system.K().vertices()) {
        const double x = v.get_d();
        svg << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << num(pad) << "\" x2=\"" << num(sx(x)) << "\" y2=\""
            << num(pad + size) << "\" stroke=\"#cccccc\"/>\n";
    }
    svg << "<line x1=\"" << num(sx(lo)) << "\" y1=\"" << num(sy(lo)) << "\" x2=\"" << num(sx(hi)) << "\" y2=\""
        << num(sy(hi)) << "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < system.Kstar().vertex_count(); ++i) {
        const double x = system.Kstar().vertex(i).get_d();
        const double y = system.K().vertex(system.vertex_image()[i]).get_d();
        svg << (i ? " " : "") << num(sx(x)) << "," << num(sy(y));
    }
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

} // namespace tractdyn::io
