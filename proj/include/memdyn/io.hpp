#pragma once

// Serialization: JSON with 17 significant digits and the CSV layouts used by
// the command-line tool.

#include "memdyn/certify.hpp"
#include "memdyn/measure.hpp"
#include "memdyn/memory.hpp"
#include "memdyn/ndde.hpp"
#include "memdyn/telegraph.hpp"

#include <json.hpp>

#include <string>

namespace memdyn {

using Json = nlohmann::ordered_json;

/// %.17g, which round-trips every finite double.
std::string format_double(double v);

/// JSON text with every floating-point number printed by format_double.
/// Non-finite numbers become null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const DissipativityCertificate& c);
Json to_json(const BmValidation& v);
Json to_json(const FalsifyReport& r);
Json to_json(const MemoryKernel& k);
Json to_json(const InvarianceReport& r);

std::string trajectory_csv(const Trajectory& tr);
std::string diagnostics_csv(const MemoryDiagnostics& d);
std::string field_csv(const std::vector<FieldSample>& f);
/// One row per snapshot node: snapshot,theta,x1..xn
std::string snapshots_csv(const EmpiricalMeasure& mu);

void write_file(const std::string& path, const std::string& content);

}  // namespace memdyn
