// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "voxelmesh/math.hpp"

namespace voxelmesh {

/// Compact median-split kd-tree over a fixed point set. Points are
/// reordered internally; query results carry the original indices.
class KdTree {
public:
    KdTree() = default;

    explicit KdTree(std::vector<Vec3f> points) : points_(std::move(points)) {
        if (points_.empty()) throw Error("KdTree: empty point set");
        indices_.resize(points_.size());
        for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = static_cast<int>(i);
        nodes_.reserve(points_.size());
        root_ = build(0, static_cast<int>(points_.size()));
    }

    std::size_t size() const { return points_.size(); }
    const Vec3f& point(int original_index) const { return points_[original_index]; }

    struct Hit {
        int index = -1;       // index into the original point vector
        float distance2 = 0;  // squared distance
    };

    Hit nearest(const Vec3f& q) const {
        Hit best;
        best.distance2 = std::numeric_limits<float>::max();
        search(root_, q, best);
        return best;
    }

private:
    struct Node {
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into indices_
        int axis = 0;
        float split = 0;
    };

    static constexpr int kLeafSize = 8;

    int build(int begin, int end) {
        Node node;
        node.begin = begin;
        node.end = end;
        if (end - begin > kLeafSize) {
            Vec3f lo{std::numeric_limits<float>::max(), std::numeric_limits<float>::max(),
                     std::numeric_limits<float>::max()};
            Vec3f hi = lo * -1.0f;
            for (int i = begin; i < end; ++i) {
                const Vec3f& p = points_[indices_[i]];
                lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
                hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
            }
            Vec3f ext = hi - lo;
            node.axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
            int mid = (begin + end) / 2;
            std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                             indices_.begin() + end, [&](int a, int b) {
                                 return component(points_[a], node.axis) <
                                        component(points_[b], node.axis);
                             });
            node.split = component(points_[indices_[mid]], node.axis);
            int id = static_cast<int>(nodes_.size());
            nodes_.push_back(node);
            int l = build(begin, mid);
            int r = build(mid, end);
            nodes_[id].left = l;
            nodes_[id].right = r;
            return id;
        }
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        return id;
    }

    static float component(const Vec3f& v, int axis) {
        return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
    }

    void search(int id, const Vec3f& q, Hit& best) const {
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                float d2 = norm2(points_[indices_[i]] - q);
                if (d2 < best.distance2) {
                    best.distance2 = d2;
                    best.index = indices_[i];
                }
            }
            return;
        }
        float diff = component(q, node.axis) - node.split;
        int near = diff < 0 ? node.left : node.right;
        int far = diff < 0 ? node.right : node.left;
        search(near, q, best);
        if (diff * diff < best.distance2) search(far, q, best);
    }

    std::vector<Vec3f> points_;
    std::vector<int> indices_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace voxelmesh
