#ifndef UAD_UAD_HPP
#define UAD_UAD_HPP

#include "uad/core/error.hpp"
#include "uad/core/grid.hpp"
#include "uad/core/linalg.hpp"
#include "uad/core/log.hpp"
#include "uad/core/seed.hpp"

#include "uad/geom/camera.hpp"
#include "uad/geom/kdtree.hpp"
#include "uad/geom/point_cloud.hpp"
#include "uad/geom/raster.hpp"

#include "uad/fusion/fusion.hpp"

#include "uad/regions/agreement.hpp"
#include "uad/regions/kmeans.hpp"
#include "uad/regions/labels.hpp"
#include "uad/regions/mean_shift.hpp"
#include "uad/regions/overlay.hpp"
#include "uad/regions/pca.hpp"
#include "uad/regions/propose.hpp"

#include "uad/io/base64.hpp"
#include "uad/io/container.hpp"
#include "uad/io/fs.hpp"
#include "uad/io/heatmap.hpp"
#include "uad/io/manifest.hpp"
#include "uad/io/observation.hpp"
#include "uad/io/png.hpp"
#include "uad/io/tensor_file.hpp"

#include "uad/annotate/dataset.hpp"
#include "uad/annotate/embeddings.hpp"
#include "uad/annotate/postprocess.hpp"
#include "uad/annotate/similarity.hpp"
#include "uad/annotate/vlm.hpp"

#include "uad/decoder/adam.hpp"
#include "uad/decoder/checkpoint.hpp"
#include "uad/decoder/film.hpp"
#include "uad/decoder/train.hpp"

#include "uad/metrics/baselines.hpp"
#include "uad/metrics/report.hpp"
#include "uad/metrics/saliency.hpp"
#include "uad/metrics/votes.hpp"

#include "uad/synth/synthgen.hpp"

#endif  // UAD_UAD_HPP
