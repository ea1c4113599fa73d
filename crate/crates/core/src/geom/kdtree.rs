use super::Vec3;

/// Static 3-d tree answering exact nearest-neighbor queries. Among points
/// at the same squared distance the smallest key wins, which reproduces a
/// linear scan in key order.
#[derive(Debug)]
pub(crate) struct KdTree {
    points: Vec<(Vec3, usize)>,
    nodes: Vec<Node>,
}

#[derive(Debug)]
struct Node {
    start: usize,
    end: usize,
    axis: usize,
    split: f64,
    children: Option<(usize, usize)>,
}

const LEAF: usize = 8;

impl KdTree {
    pub(crate) fn new(points: Vec<(Vec3, usize)>) -> Self {
        let mut tree = Self {
            points,
            nodes: Vec::new(),
        };
        if !tree.points.is_empty() {
            let n = tree.points.len();
            tree.build(0, n);
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node {
            start,
            end,
            axis: 0,
            split: 0.0,
            children: None,
        });
        if end - start <= LEAF {
            return idx;
        }
        let slice = &mut self.points[start..end];
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for (p, _) in slice.iter() {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        let axis = (hi - lo).imax();
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
        let split = slice[mid].0[axis];
        let left = self.build(start, start + mid);
        let right = self.build(start + mid, end);
        let node = &mut self.nodes[idx];
        node.axis = axis;
        node.split = split;
        node.children = Some((left, right));
        idx
    }

    /// `(key, point, squared distance)` of the nearest point.
    pub(crate) fn nearest(&self, q: &Vec3) -> Option<(usize, Vec3, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX, Vec3::zeros());
        self.search(0, q, &mut best);
        Some((best.1, best.2, best.0))
    }

    fn search(&self, i: usize, q: &Vec3, best: &mut (f64, usize, Vec3)) {
        let node = &self.nodes[i];
        match node.children {
            None => {
                for (p, key) in &self.points[node.start..node.end] {
                    let d2 = (q - p).norm_squared();
                    if d2 < best.0 || (d2 == best.0 && *key < best.1) {
                        *best = (d2, *key, *p);
                    }
                }
            }
            Some((left, right)) => {
                // Left holds coordinates <= split, right holds >= split.
                let diff = q[node.axis] - node.split;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // Equal-distance points on the far side can still win the
                // key tie-break, so only strictly farther planes are pruned.
                if diff * diff <= best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}
