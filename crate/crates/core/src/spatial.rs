//! Exact nearest-neighbor queries over a fixed point set.
//!
//! Ties are resolved toward the lowest point index, both in the k-d tree and
//! in the brute-force path used for small sets, so results are identical
//! regardless of which path serves a query.

use crate::geometry::Point3;

/// Below this many points queries scan linearly.
pub const BRUTE_FORCE_BELOW: usize = 512;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Exact nearest-neighbor index: a k-d tree, or a flat scan for small inputs.
#[derive(Debug, Clone)]
pub struct NearestNeighbors {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// `a` precedes `b` when it is closer, or equally close with a lower index.
#[inline]
fn better(d2a: f64, ia: usize, d2b: f64, ib: usize) -> bool {
    d2a < d2b || (d2a == d2b && ia < ib)
}

impl NearestNeighbors {
    pub fn new(points: &[Point3]) -> Self {
        let mut tree = NearestNeighbors {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if points.len() >= BRUTE_FORCE_BELOW {
            let mut order = std::mem::take(&mut tree.order);
            tree.build(&mut order, 0);
            tree.order = order;
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    fn build(&mut self, order: &mut [usize], offset: usize) -> usize {
        let id = self.nodes.len();
        if order.len() <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: offset,
                end: offset + order.len(),
            });
            return id;
        }
        let mut lo = Point3::repeat(f64::INFINITY);
        let mut hi = Point3::repeat(f64::NEG_INFINITY);
        for &i in order.iter() {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        let axis = (hi - lo).imax();
        let mid = order.len() / 2;
        let points = &self.points;
        order.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
        let value = self.points[order[mid]][axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let (left_part, right_part) = order.split_at_mut(mid);
        let left = self.build(left_part, offset);
        let right = self.build(right_part, offset + mid);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Index and squared distance of the point nearest to `q`.
    pub fn nearest(&self, q: &Point3) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        if self.nodes.is_empty() {
            for (i, p) in self.points.iter().enumerate() {
                let d2 = (p - q).norm_squared();
                if better(d2, i, best.1, best.0) {
                    best = (i, d2);
                }
            }
        } else {
            self.nearest_rec(0, q, &mut best);
        }
        best
    }

    fn nearest_rec(&self, node: usize, q: &Point3, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = (self.points[i] - q).norm_squared();
                    if better(d2, i, best.1, best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.nearest_rec(near, q, best);
                // equality keeps equidistant candidates reachable for tie breaking
                if diff * diff <= best.1 {
                    self.nearest_rec(far, q, best);
                }
            }
        }
    }

    /// The `k` nearest points to `q` as `(index, squared distance)`, closest
    /// first. Returns fewer when the set is smaller than `k`.
    pub fn k_nearest(&self, q: &Point3, k: usize) -> Vec<(usize, f64)> {
        let mut heap: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        if k == 0 {
            return heap;
        }
        if self.nodes.is_empty() {
            for (i, p) in self.points.iter().enumerate() {
                push_candidate(&mut heap, k, i, (p - q).norm_squared());
            }
        } else {
            self.k_nearest_rec(0, q, k, &mut heap);
        }
        heap
    }

    fn k_nearest_rec(&self, node: usize, q: &Point3, k: usize, heap: &mut Vec<(usize, f64)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    push_candidate(heap, k, i, (self.points[i] - q).norm_squared());
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.k_nearest_rec(near, q, k, heap);
                if heap.len() < k || diff * diff <= heap[heap.len() - 1].1 {
                    self.k_nearest_rec(far, q, k, heap);
                }
            }
        }
    }
}

/// Inserts into a sorted candidate list capped at `k` entries.
fn push_candidate(list: &mut Vec<(usize, f64)>, k: usize, i: usize, d2: f64) {
    if list.len() == k {
        let (wi, wd) = list[k - 1];
        if !better(d2, i, wd, wi) {
            return;
        }
        list.pop();
    }
    let pos = list.partition_point(|&(j, dj)| better(dj, j, d2, i));
    list.insert(pos, (i, d2));
}
