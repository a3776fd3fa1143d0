#pragma once

#include <string>
#include <string_view>

#include "oodzoo/sim.hpp"
#include "oodzoo/synth.hpp"

namespace oodzoo {

// Strict JSON readers: unknown keys raise ConfigError, missing keys keep defaults.
IdUniformSimConfig id_uniform_config_from_json(std::string_view text);
MixtureSimConfig mixture_config_from_json(std::string_view text);
SynthBenchConfig synth_config_from_json(std::string_view text);

std::string synth_config_to_json(const SynthBenchConfig& config);

// Results echo their config (including the seed); numbers use six significant digits.
std::string id_uniform_result_json(const IdUniformResult& result);
std::string id_uniform_result_csv(const IdUniformResult& result);
std::string id_uniform_result_text(const IdUniformResult& result);
std::string power_stats_json(const MixtureSimConfig& config, const PowerStats& stats);

}  // namespace oodzoo
