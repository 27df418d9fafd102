// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "voxelmesh/arch.hpp"
#include "voxelmesh/attention.hpp"
#include "voxelmesh/camera.hpp"
#include "voxelmesh/encoder.hpp"
#include "voxelmesh/enhance.hpp"
#include "voxelmesh/eval.hpp"
#include "voxelmesh/fixtures.hpp"
#include "voxelmesh/heads.hpp"
#include "voxelmesh/image.hpp"
#include "voxelmesh/image_io.hpp"
#include "voxelmesh/loss.hpp"
#include "voxelmesh/math.hpp"
#include "voxelmesh/mesh.hpp"
#include "voxelmesh/mesh_to_sdf.hpp"
#include "voxelmesh/nn.hpp"
#include "voxelmesh/pipeline.hpp"
#include "voxelmesh/render.hpp"
#include "voxelmesh/sparse_former.hpp"
#include "voxelmesh/spatial.hpp"
#include "voxelmesh/surface_nets.hpp"
#include "voxelmesh/threading.hpp"
#include "voxelmesh/toml_lite.hpp"
#include "voxelmesh/viewset_io.hpp"
#include "voxelmesh/volume.hpp"
#include "voxelmesh/voxelformer.hpp"
#include "voxelmesh/weights.hpp"
