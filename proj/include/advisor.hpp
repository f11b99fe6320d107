#pragma once

#include "advisor/catalog.hpp"
#include "advisor/config.hpp"
#include "advisor/dialogue.hpp"
#include "advisor/grammar.hpp"
#include "advisor/messages.hpp"
#include "advisor/query.hpp"
#include "advisor/service.hpp"
#include "advisor/simulator.hpp"
#include "advisor/speech_acts.hpp"
#include "advisor/stats.hpp"
#include "advisor/store.hpp"
#include "advisor/synthetic.hpp"
#include "advisor/user_model.hpp"
