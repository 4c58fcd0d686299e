#pragma once

#include <ostream>

#include "run_config.hpp"

namespace kadlab::cli {

int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_model(const RunConfig& config, std::ostream& out);
int cmd_bounds(const RunConfig& config, std::ostream& out);
int cmd_compare(const RunConfig& config, std::ostream& out);
int cmd_bitgain(const RunConfig& config, std::ostream& out);

}  // namespace kadlab::cli
