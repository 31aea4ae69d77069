#pragma once

#include "mtax/gmm/divergence.hpp"
#include "mtax/gmm/em.hpp"
#include "mtax/gmm/io.hpp"
#include "mtax/gmm/mixture.hpp"
#include "mtax/gmm/sampling.hpp"
