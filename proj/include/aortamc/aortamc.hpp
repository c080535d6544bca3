#pragma once

#include "aortamc/errors.hpp"
#include "aortamc/lexer.hpp"
#include "aortamc/term.hpp"
#include "aortamc/aorta.hpp"
#include "aortamc/apl.hpp"
#include "aortamc/runtime.hpp"
#include "aortamc/psl.hpp"
#include "aortamc/buchi.hpp"
#include "aortamc/checker.hpp"
#include "aortamc/config.hpp"
#include "aortamc/cli.hpp"
