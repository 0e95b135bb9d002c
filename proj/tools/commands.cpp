#include "commands.hpp"

#include "io.hpp"
#include "tractdyn/error.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace tractdyn::cli {

namespace {

struct RunConfig {
    std::string input;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t simulate = 0;
    int depth = -1;
    int words = 2;
    std::string format = "json";
    // command specific
    std::string start;
    std::string gamma_table;
    unsigned n = 1;
    std::string table_out;
    std::string prefix;
    std::string function;
    std::string system_out;
    std::string svg_out;
    bool repair = false;
};

void emit(const RunConfig &config, const std::string &content, std::ostream &out) {
    if (config.out.empty()) {
        out << content;
    } else {
        io::write_atomic(config.out, content);
    }
}

void require_format(const RunConfig &config, std::initializer_list<const char *> allowed) {
    for (const char *f : allowed) {
        if (config.format == f) {
            return;
        }
    }
    throw ValidationError("--format " + config.format + " is not available for this command");
}

std::string csv_rational(const Rational &r) { return format_rational(r); }

void relation_analyze(const RunConfig &config, std::ostream &out) {
    require_format(config, {"json", "csv"});
    const FiniteRelation relation = io::relation_from_json(io::read_json(config.input));
    const BasicSetDecomposition decomposition = basic_sets(relation);
    if (config.format == "csv") {
        std::ostringstream csv;
        csv << "class,element,terminal\n";
        for (std::size_t c = 0; c < decomposition.classes.size(); ++c) {
            for (std::size_t x : decomposition.classes[c]) {
                csv << c << "," << relation.label(x) << "," << (decomposition.terminal[c] ? "true" : "false") << "\n";
            }
        }
        emit(config, csv.str(), out);
        return;
    }
    emit(config, io::dump(io::decomposition_to_json(relation, decomposition)), out);
}

void enumerate_words(const FiniteRelation &relation, std::vector<std::size_t> &word, int max_length,
                     const std::function<void(const std::vector<std::size_t> &)> &visit) {
    visit(word);
    if (static_cast<int>(word.size()) == max_length) {
        return;
    }
    for (std::size_t t : relation.successors(word.back())) {
        word.push_back(t);
        enumerate_words(relation, word, max_length, visit);
        word.pop_back();
    }
}

void subshift_report(const RunConfig &config, std::ostream &out) {
    require_format(config, {"json", "csv"});
    if (config.words < 1) {
        throw ValidationError("--words must be positive");
    }
    const StochasticCover cover = io::cover_from_json(io::read_json(config.input));
    const Distribution background = Distribution::uniform(cover.size());
    const SubshiftReport report = tractability_report_subshift(cover, background);
    const BasicSetDecomposition decomposition = basic_sets(cover.relation());

    if (config.format == "csv") {
        std::ostringstream csv;
        csv.precision(17);
        csv << "class,word,measure\n";
        for (std::size_t c : decomposition.terminal_classes()) {
            const MarkovMeasureSpec spec = ergodic_measure_spec(cover, decomposition, c);
            for (std::size_t s : decomposition.classes[c]) {
                std::vector<std::size_t> word{s};
                enumerate_words(cover.relation(), word, config.words, [&](const std::vector<std::size_t> &w) {
                    csv << c << ",";
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        csv << (i ? " " : "") << cover.relation().label(w[i]);
                    }
                    csv << "," << cylinder_measure(spec, w) << "\n";
                });
            }
        }
        emit(config, csv.str(), out);
        return;
    }

    io::Json json = io::subshift_report_to_json(report);
    if (config.simulate > 0) {
        Distribution initial = background;
        if (!config.start.empty()) {
            initial = Distribution::point_mass(cover.size(), cover.relation().index_of(config.start));
        }
        const auto path = sample_path({cover, initial}, config.simulate, config.seed);
        const GenericityReport g = genericity_check(cover, decomposition, path, config.words);
        json["genericity"] = io::genericity_to_json(g, cover.relation(), decomposition);
        json["genericity"]["seed"] = config.seed;
    }
    emit(config, io::dump(json), out);
}

void model_analyze(const RunConfig &config, std::ostream &out) {
    require_format(config, {"json"});
    const TwoAlphabetModel model = io::model_from_json(io::read_json(config.input));
    const Correspondence corr = basic_set_correspondence(model);
    io::Json json{{"correspondence", io::correspondence_to_json(model, corr)}};
    io::Json terminals = io::Json::array();
    const InducedCovers covers = induced_covers(model);
    for (std::size_t p = 0; p < corr.pairs.size(); ++p) {
        const auto &pair = corr.pairs[p];
        if (!pair.terminal) {
            continue;
        }
        const auto &members = corr.base.classes[pair.base_class];
        io::Json entry = io::Json::object();
        io::Json v = io::Json::object();
        io::Json lifted = io::Json::object();
        if (model.has_exact_nu()) {
            const auto vb = exact_stationary_distribution(induced_base_cover_exact(model), members);
            const auto vstar = lift_stationary_exact(model, vb);
            for (std::size_t s : members) {
                v[model.base_labels()[s]] = format_rational(vb[s]);
            }
            for (std::size_t s = 0; s < model.star_size(); ++s) {
                if (vstar[s] != 0) {
                    lifted[model.star_labels()[s]] = format_rational(vstar[s]);
                }
            }
            entry["identity"] = stationary_identity_holds(model, corr, p, vb);
        } else {
            const Distribution vb = stationary_distribution(covers.base, members);
            const Distribution vstar = lift_stationary(model, vb);
            for (std::size_t s : vb.support()) {
                v[model.base_labels()[s]] = vb[s];
            }
            for (std::size_t s : vstar.support()) {
                lifted[model.star_labels()[s]] = vstar[s];
            }
            entry["residual"] = stationary_residual(covers.star, vstar);
        }
        entry["class"] = io::Json::array();
        for (std::size_t s : members) {
            entry["class"].push_back(model.base_labels()[s]);
        }
        entry["stationary"] = v;
        entry["lifted"] = lifted;
        terminals.push_back(entry);
    }
    json["terminal"] = terminals;
    emit(config, io::dump(json), out);
}

shiftlike::Word parse_word(unsigned N, const std::string &text) {
    std::vector<shiftlike::Symbol> symbols;
    if (text.find('.') != std::string::npos || N > 10) {
        std::stringstream in(text);
        std::string part;
        while (std::getline(in, part, '.')) {
            try {
                symbols.push_back(static_cast<shiftlike::Symbol>(std::stoul(part)));
            } catch (const std::exception &) {
                throw ValidationError("--prefix: bad symbol '" + part + "'");
            }
        }
    } else {
        for (char c : text) {
            if (c < '0' || c > '9') {
                throw ValidationError(std::string("--prefix: bad symbol '") + c + "'");
            }
            symbols.push_back(static_cast<shiftlike::Symbol>(c - '0'));
        }
    }
    return shiftlike::Word(N, std::move(symbols));
}

void blockmap_approx(const RunConfig &config, std::ostream &out) {
    require_format(config, {"json", "csv"});
    if (config.input.empty() == config.gamma_table.empty()) {
        throw ValidationError("give exactly one of --input (sliding block code) or --gamma (gamma table)");
    }
    std::optional<shiftlike::SlidingBlockCode> code;
    std::optional<shiftlike::ShiftLikeSystem> system;
    if (!config.input.empty()) {
        code = io::code_from_json(io::read_json(config.input));
        system = shiftlike::derive_gamma(*code, config.n);
    } else {
        system = io::gamma_table_from_json(io::read_json(config.gamma_table));
    }
    if (!config.table_out.empty()) {
        io::write_atomic(config.table_out, io::dump(io::gamma_table_to_json(*system)));
    }

    if (config.format == "csv") {
        if (!code || config.prefix.empty() || config.depth < 0) {
            throw ValidationError("the shadowing trace needs --input, --prefix and --depth");
        }
        const auto x = parse_word(code->N, config.prefix);
        const auto depth = static_cast<std::size_t>(config.depth);
        const auto y = shiftlike::shadow_Q(*code, *system, x, depth);
        const auto fx = shiftlike::code_R(*code, system->n(), x, depth);
        const auto gy = shiftlike::code_R(*system, y, depth);
        std::ostringstream csv;
        csv << "j,f_word,g_word,match\n";
        for (std::size_t j = 0; j <= depth; ++j) {
            csv << j << "," << fx[j].label() << "," << gy[j].label() << "," << (fx[j] == gy[j] ? "true" : "false")
                << "\n";
        }
        emit(config, csv.str(), out);
        return;
    }
    io::Json json = io::shiftlike_report_to_json(shiftlike::tractability_report_shiftlike(*system));
    if (code) {
        json["derived_from"] = {{"N", code->N}, {"m", code->m}, {"n", config.n}};
    }
    emit(config, io::dump(json), out);
}

void plmap_approx(const RunConfig &config, std::ostream &out) {
    require_format(config, {"json", "csv", "svg"});
    if (config.input.empty() == config.function.empty()) {
        throw ValidationError("give exactly one of --input (system file) or --function (sampled map)");
    }
    std::optional<simplicial::SimplicialSystem1D> system;
    io::Json notes = io::Json::object();
    if (!config.input.empty()) {
        const simplicial::VertexMap map = io::vertex_map_from_json(io::read_json(config.input));
        if (!simplicial::degenerate_edges(map).empty() && config.repair) {
            system = simplicial::nondegenerate_repair(map);
            notes["repaired"] = true;
            notes["repair_bound"] = "sup |g - g1| <= mesh(K) = " + format_rational(map.K.mesh()) +
                                    ", within 4 mesh(K) = " + format_rational(4 * map.K.mesh());
        } else {
            system = simplicial::build_system(map);
        }
    } else {
        const io::SampledMap f = io::sampled_map_from_json(io::read_json(config.function));
        simplicial::RoundoffResult r = simplicial::roundoff(f, f.lipschitz, f.K);
        if (r.repaired && !config.repair) {
            throw ValidationError("the roundoff is degenerate; rerun with --repair");
        }
        notes["roundoff_level"] = r.dyadic_level;
        notes["repaired"] = r.repaired;
        notes["bound"] = "sup |f - g| <= " + format_rational((r.repaired ? 3 : 2) * f.K.mesh()) +
                         (r.repaired ? " (2 mesh(K) roundoff + mesh(K) repair, within 4 mesh(K))" : " = 2 mesh(K)");
        system = std::move(r.system);
    }
    if (!config.system_out.empty()) {
        io::write_atomic(config.system_out, io::dump(io::system_to_json(*system)));
    }

    const simplicial::PLReport report = simplicial::tractability_report_pl(*system);
    if (!config.svg_out.empty()) {
        io::write_atomic(config.svg_out, io::pl_report_svg(report));
    }
    if (config.format == "svg") {
        emit(config, io::pl_report_svg(report), out);
        return;
    }
    if (config.format == "csv") {
        std::ostringstream csv;
        csv << "class,lo,hi,weight,density\n";
        for (std::size_t t = 0; t < report.terminals.size(); ++t) {
            for (const auto &piece : report.terminals[t].density) {
                csv << t << "," << csv_rational(piece.interval.lo) << "," << csv_rational(piece.interval.hi) << ","
                    << csv_rational(piece.weight) << "," << csv_rational(piece.density) << "\n";
            }
        }
        emit(config, csv.str(), out);
        return;
    }

    io::Json json = io::pl_report_to_json(report);
    if (!notes.empty()) {
        json["approximation"] = notes;
    }
    if (config.simulate > 0) {
        const int depth = config.depth < 0 ? 40 : config.depth;
        io::Json experiments = io::Json::array();
        for (std::size_t t = 0; t < report.terminals.size(); ++t) {
            experiments.push_back(
                io::birkhoff_to_json(simplicial::birkhoff_decoding(report, t, config.simulate, depth, config.seed)));
        }
        json["birkhoff"] = experiments;
    }
    emit(config, io::dump(json), out);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Tractable structure of finitely described dynamical systems"};
    app.name("tractdyn");
    app.require_subcommand(1);
    RunConfig config;

    auto common = [&](CLI::App *sub) {
        sub->add_option("--out", config.out, "Output file (default: standard output)");
        sub->add_option("--format", config.format, "Output format")->check(CLI::IsMember({"json", "csv", "svg"}));
    };

    auto *relation = app.add_subcommand("relation-analyze", "Basic sets, terminal classes and transient elements");
    relation->add_option("--input", config.input, "Relation file {elements, edges}")->required();
    common(relation);

    auto *subshift = app.add_subcommand("subshift-report", "Tractability report for the subshift of a cover");
    subshift->add_option("--input", config.input, "Cover file {relation, matrix}; matrix[j][i] is i -> j")->required();
    subshift->add_option("--simulate", config.simulate, "Sample a path of this length and test genericity");
    subshift->add_option("--words", config.words, "Longest cylinder word checked")->check(CLI::PositiveNumber);
    subshift->add_option("--seed", config.seed, "Sampling seed");
    subshift->add_option("--start", config.start, "Start the sampled path at this element");
    common(subshift);

    auto *model = app.add_subcommand("model-analyze", "Basic-set correspondence of a two-alphabet model");
    model->add_option("--input", config.input, "Model file {Kstar, K, J, gamma, nu}")->required();
    common(model);

    auto *blockmap = app.add_subcommand("blockmap-approx", "Shift-like approximation of a sliding block code");
    blockmap->add_option("--input", config.input, "Code file {N, m, phi}");
    blockmap->add_option("--gamma", config.gamma_table, "Gamma table file {N, n, k, gamma} instead of a code");
    blockmap->add_option("--n", config.n, "Word length n")->check(CLI::PositiveNumber);
    blockmap->add_option("--table", config.table_out, "Write the gamma table here");
    blockmap->add_option("--prefix", config.prefix, "Prefix of x for the shadowing trace (--format csv)");
    blockmap->add_option("--depth", config.depth, "Shadowing depth p");
    blockmap->add_option("--seed", config.seed, "Unused; accepted for uniformity");
    common(blockmap);

    auto *plmap = app.add_subcommand("plmap-approx", "Simplicial interval map: build or round off, then report");
    plmap->add_option("--input", config.input, "System file {K, Kstar, vmap}");
    plmap->add_option("--function", config.function, "Sampled map {complex, samples, lipschitz}");
    plmap->add_flag("--repair", config.repair, "Repair degenerate vertex maps");
    plmap->add_option("--system", config.system_out, "Write the resulting system here");
    plmap->add_option("--svg", config.svg_out, "Write a plot of g here");
    plmap->add_option("--simulate", config.simulate, "Birkhoff decoding experiment with this many segments");
    plmap->add_option("--depth", config.depth, "Decoding depth (default 40)");
    plmap->add_option("--seed", config.seed, "Sampling seed");
    common(plmap);

    std::vector<const char *> argv{"tractdyn"};
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kValidation;
    }

    try {
        if (relation->parsed()) {
            relation_analyze(config, out);
        } else if (subshift->parsed()) {
            subshift_report(config, out);
        } else if (model->parsed()) {
            model_analyze(config, out);
        } else if (blockmap->parsed()) {
            blockmap_approx(config, out);
        } else if (plmap->parsed()) {
            plmap_approx(config, out);
        }
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ResourceCapError &e) {
        err << "error: " << e.what() << "\n";
        return kResourceCap;
    } catch (const NumericalError &e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception &e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kSuccess;
}

} // namespace tractdyn::cli
