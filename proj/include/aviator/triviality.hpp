#pragma once

#include <string>
#include <string_view>

#include "aviator/token.hpp"

namespace aviator {

struct TrivialityResult {
    bool trivial = false;
    // identical | whitespace | comments when trivial; substantive otherwise
    std::string reason;
};

// True iff the two texts yield identical (kind, text) token streams once
// whitespace and comment tokens are dropped.
TrivialityResult is_trivial_change(std::string_view benign, std::string_view candidate,
                                   Dialect dialect = Dialect::Cpp);

}  // namespace aviator
