#pragma once

#include <string>

#include "dbp/model.hpp"

namespace dbp {

/// Model file schema (JSON):
///   {"variant": "sdcbp", "rates": [...], "laws": [LAW, ...]}
///   {"variant": "vdcbp", "class1": n, "class2": m, "rates": [...], "laws": [...]}
///   {"variant": "tcvdbp", "mixed": M, "exclusive": E, "theta": x, "lambdaV": x,
///    "typeChangeMixed": [[...]], "typeChangeExclusive": [[...]], "shareLaws": [...]}
///   {"variant": "social", "targetPost": 1|2, "social": {"eta1", "eta2", "deltaAtt",
///    "theta", "lambdaV", "meanFriends", "readProbs", "levelProbs", "p", "N"}}
/// LAW is {"atoms": [{"counts": [...], "prob": x}, ...]} or
/// {"marginals": [[[count, prob], ...] per offspring type]} for independent counts.
/// An optional "types" field is checked against the law widths.
///
/// Structural problems (bad JSON, missing fields, wrong shapes) throw
/// ModelError; semantic invariants are left to validate().
Model parse_model(const std::string& text);
Model load_model_file(const std::string& path);

std::string model_to_json(const Model& model);

}  // namespace dbp
