#pragma once

#include <iosfwd>
#include <string>

#include "dinerdash/config.hpp"
#include "dinerdash/env.hpp"

namespace dinerdash {

// Reply lines of the stdio protocol. Exposed so callers can compare a served
// session against in-process stepping byte for byte.
std::string reset_reply(const StateVec& state);
std::string step_reply(const StepResult& result);
std::string spec_reply();
std::string error_reply(const std::string& message);

// Newline-delimited JSON loop over one environment:
//   {"cmd":"reset","seed":n}   -> {"state":[...]}
//   {"cmd":"step","action":k}  -> {"state":[...],"reward":r,"done":b,"info":{...}}
//   {"cmd":"spec"}             -> {"n_actions":57,"state_dim":40}
//   {"cmd":"close"}            -> no reply, returns
// Bad requests get {"error":"..."} and the loop keeps going. Returns the
// number of requests handled; end of input behaves like close.
int serve_env(const EnvConfig& config, std::istream& in, std::ostream& out);

}  // namespace dinerdash
