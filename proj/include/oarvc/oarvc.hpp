#ifndef OARVC_OARVC_HPP
#define OARVC_OARVC_HPP

// Umbrella header for the OAR video communication library.

#include "oarvc/bitio.hpp"
#include "oarvc/channel.hpp"
#include "oarvc/image.hpp"
#include "oarvc/ingest.hpp"
#include "oarvc/ldpc.hpp"
#include "oarvc/metrics.hpp"
#include "oarvc/modulation.hpp"
#include "oarvc/oar.hpp"
#include "oarvc/pipeline.hpp"
#include "oarvc/reconstruct.hpp"
#include "oarvc/render.hpp"
#include "oarvc/report.hpp"
#include "oarvc/rng.hpp"
#include "oarvc/semantic_graph.hpp"
#include "oarvc/source_codec.hpp"
#include "oarvc/tensor.hpp"

#endif  // OARVC_OARVC_HPP
