#include "mcpower/spending.hpp"

// Header-only logic; this TU anchors the module in the library.
namespace mcpower {}
