#ifndef TRACTDYN_TOOLS_IO_HPP
#define TRACTDYN_TOOLS_IO_HPP

#include "tractdyn/markov.hpp"
#include "tractdyn/relation.hpp"
#include "tractdyn/shiftlike.hpp"
#include "tractdyn/simplicial1d.hpp"
#include "tractdyn/two_alphabet.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace tractdyn::io {

using Json = nlohmann::ordered_json;

/// Parses a JSON file; malformed input throws ValidationError.
Json read_json(const std::filesystem::path &path);

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path &path, const std::string &content);

std::string dump(const Json &j);

Rational rational_from_json(const Json &j);

// Inputs. Every loader throws ValidationError on a malformed document.
FiniteRelation relation_from_json(const Json &j);
StochasticCover cover_from_json(const Json &j);
TwoAlphabetModel model_from_json(const Json &j);
shiftlike::SlidingBlockCode code_from_json(const Json &j);
shiftlike::ShiftLikeSystem gamma_table_from_json(const Json &j);
simplicial::IntervalComplex complex_from_json(const Json &j);
/// {K, Kstar, vmap}; the vertex map is returned unvalidated for non-degeneracy.
simplicial::VertexMap vertex_map_from_json(const Json &j);

/// {complex, samples: [[x, y], ...], lipschitz}: f is the linear
/// interpolation of the samples, which must span the complex.
struct SampledMap {
    simplicial::IntervalComplex K;
    std::vector<std::pair<Rational, Rational>> samples;
    Rational lipschitz;

    Rational operator()(const Rational &x) const;
};
SampledMap sampled_map_from_json(const Json &j);

// Outputs.
Json relation_to_json(const FiniteRelation &relation);
Json gamma_table_to_json(const shiftlike::ShiftLikeSystem &system);
Json system_to_json(const simplicial::SimplicialSystem1D &system);

Json decomposition_to_json(const FiniteRelation &relation, const BasicSetDecomposition &decomposition);
Json subshift_report_to_json(const SubshiftReport &report);
Json genericity_to_json(const GenericityReport &report, const FiniteRelation &relation,
                        const BasicSetDecomposition &decomposition);
Json correspondence_to_json(const TwoAlphabetModel &model, const Correspondence &correspondence);
Json shiftlike_report_to_json(const shiftlike::ShiftLikeReport &report);
Json pl_report_to_json(const simplicial::PLReport &report);
Json birkhoff_to_json(const simplicial::BirkhoffExperiment &experiment);
Json trac_to_json(const TracStatus &t1, const TracStatus &t2, const TracStatus &t3, const TracStatus &t4);

/// Graph of g with the supports of the terminal measures shaded.
std::string pl_report_svg(const simplicial::PLReport &report);

} // namespace tractdyn::io

#endif
