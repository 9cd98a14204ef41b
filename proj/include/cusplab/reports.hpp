#pragma once

// JSON views of the module reports. Non-finite numbers become the strings
// "inf", "-inf" and "nan" so that documents stay valid JSON.

#include "json.hpp"

#include "cusplab/barriers.hpp"
#include "cusplab/diffusion.hpp"
#include "cusplab/growth.hpp"
#include "cusplab/limits.hpp"
#include "cusplab/potentials.hpp"
#include "cusplab/regularity.hpp"

namespace cusplab {

nlohmann::json json_number(double x);
// Inverse of json_number; accepts plain numbers too.
double number_from_json(const nlohmann::json& j);

nlohmann::json to_json(const growth::Classification& c);
nlohmann::json to_json(const limits::LimitEstimate& e);
nlohmann::json to_json(const Estimate& e);
nlohmann::json to_json(const RegularityVerdict& v);
nlohmann::json to_json(const DiniVerdict& v);
nlohmann::json to_json(const OmegaDiniReport& r);
nlohmann::json to_json(const BlowupReport& r);
nlohmann::json to_json(const HypothesisCheck& h);
nlohmann::json to_json(const BarrierReport& r);
nlohmann::json to_json(const SuperharmonicReport& r);
nlohmann::json to_json(const WitnessReport& r);
nlohmann::json to_json(const RatioReport& r);
nlohmann::json to_json(const MeasureEstimate& m);
nlohmann::json to_json(const ProbeReport& r);

}  // namespace cusplab
