// Thin pybind11 layer. Structured values cross the boundary as JSON text; the
// Python package converts to and from dicts/lists.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toolrm/cli.hpp"
#include "toolrm/codec.hpp"
#include "toolrm/error.hpp"
#include "toolrm/evalsuite.hpp"
#include "toolrm/features.hpp"
#include "toolrm/gateway.hpp"
#include "toolrm/matcher.hpp"
#include "toolrm/obfuscator.hpp"
#include "toolrm/parse.hpp"
#include "toolrm/prompt.hpp"
#include "toolrm/trainer.hpp"

namespace py = pybind11;
using namespace toolrm;

namespace {

ScoringContext context_of(const std::string& tools, const std::string& messages) {
  return make_context(catalog_from_json(Json::parse(tools)), conversation_from_json(Json::parse(messages)));
}

// Strings are raw model text; arrays are already-structured call lists.
ParsedCandidate candidate_of(const std::string& candidate) {
  const Json j = Json::parse(candidate);
  if (j.is_string()) return parse_tool_calls(j.get<std::string>());
  return sequence_from_json(j);
}

}  // namespace

PYBIND11_MODULE(_toolrm, m) {
  m.doc() = "Native core of the toolrm package";

  // Translators run most-recent first, so the base class goes first.
  py::register_exception<Error>(m, "ToolrmError", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  m.attr("feature_names") = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());

  m.def("parse_tool_calls", [](const std::string& text) { return candidate_to_json(parse_tool_calls(text)).dump(); });

  m.def("match", [](const std::string& tools, const std::string& gold, const std::string& candidate) {
    const auto catalog = catalog_from_json(Json::parse(tools));
    const auto v = match_sequence(candidate_of(candidate), gold_from_json(Json::parse(gold)), catalog);
    Json j{{"correct", v.correct}};
    if (!v.correct) {
      j["error"] = std::string(to_string(v.error));
      j["detail"] = v.detail;
    }
    return j.dump();
  });

  m.def("featurize", [](const std::string& tools, const std::string& messages, const std::string& candidate) {
    return featurize(context_of(tools, messages), candidate_of(candidate));
  });

  m.def("bt_probability", &bt_probability, py::arg("r_pos"), py::arg("r_neg"));
  m.def("pair_loss", &pair_loss, py::arg("r_pos"), py::arg("r_neg"), py::arg("centering") = 0.0);

  m.def("score", [](const std::string& descriptor, const std::string& tools, const std::string& messages,
                    const std::string& candidate) {
    const auto backend = make_backend(descriptor);
    const auto ctx = context_of(tools, messages);
    const auto cand = candidate_of(candidate);
    py::gil_scoped_release release;
    return score(backend, ctx, cand);
  });

  m.def("render_reward_prompt", [](const std::string& tools, const std::string& messages,
                                   const std::string& candidate) {
    return render_reward_prompt(context_of(tools, messages), candidate_of(candidate));
  });

  m.def("obfuscation_map", [](const std::string& tools, std::uint64_t seed, bool shuffle_tools) {
    const auto catalog = catalog_from_json(Json::parse(tools));
    return map_to_json(build_map(catalog, seed, {}, ObfuscationOptions{shuffle_tools})).dump();
  });

  m.def("obfuscate_tools", [](const std::string& tools, const std::string& map, bool invert) {
    auto mm = map_from_json(Json::parse(map));
    if (invert) mm = invert_map(mm);
    return catalog_to_json(apply_map(catalog_from_json(Json::parse(tools)), mm)).dump();
  });

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); });

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = 0;
    {
      py::gil_scoped_release release;
      code = run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
