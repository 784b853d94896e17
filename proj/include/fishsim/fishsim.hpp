#pragma once

// Convenience umbrella: pulls in the whole library.

#include "fishsim/cli.hpp"
#include "fishsim/config.hpp"
#include "fishsim/controller.hpp"
#include "fishsim/drivetrain.hpp"
#include "fishsim/dynamics.hpp"
#include "fishsim/errors.hpp"
#include "fishsim/geometry.hpp"
#include "fishsim/hydrodynamics.hpp"
#include "fishsim/io.hpp"
#include "fishsim/kinematics.hpp"
#include "fishsim/optimizer.hpp"
#include "fishsim/skeleton.hpp"
#include "fishsim/tasks.hpp"
