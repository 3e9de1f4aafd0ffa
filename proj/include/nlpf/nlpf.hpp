#ifndef NLPF_NLPF_HPP
#define NLPF_NLPF_HPP

#include "nlpf/alignment.hpp"
#include "nlpf/io.hpp"
#include "nlpf/kdtree.hpp"
#include "nlpf/metrics.hpp"
#include "nlpf/parallel.hpp"
#include "nlpf/patch.hpp"
#include "nlpf/pipeline.hpp"
#include "nlpf/point_cloud.hpp"
#include "nlpf/rpca.hpp"
#include "nlpf/similarity.hpp"

#endif
