#pragma once

#include <json.hpp>

#include "nlpre/eval.hpp"

namespace nlpre {
using Json = nlohmann::ordered_json;
}

namespace nlpre::eval {

// Fractions in [0,1] at full precision; counts included when present.
Json to_json(const MetricScore& score);
Json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const Json& j);

Json to_json(const MetricSet& set);
MetricSet metric_set_from_json(const Json& j);

}  // namespace nlpre::eval
