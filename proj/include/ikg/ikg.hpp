#pragma once

#include "ikg/error.hpp"
#include "ikg/evaluation.hpp"
#include "ikg/ikg_gen.hpp"
#include "ikg/io.hpp"
#include "ikg/kg2e.hpp"
#include "ikg/model_io.hpp"
#include "ikg/namespaces.hpp"
#include "ikg/pipeline.hpp"
#include "ikg/workflow.hpp"
#include "ikg/rdf.hpp"
#include "ikg/rdf_io.hpp"
#include "ikg/training.hpp"
