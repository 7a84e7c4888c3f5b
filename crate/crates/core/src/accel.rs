//! Bounding volume hierarchy over arbitrary primitives.
//!
//! The tree only stores boxes and primitive indices; callers supply the
//! exact intersection routine at query time, so the same structure serves
//! spheres, triangles, and mixed scenes.

use crate::error::{Error, Result};
use crate::math::{Ray, Vec3};

pub const MAX_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!(min.iter().zip(max.iter()).all(|(a, b)| a <= b));
        Self { min, max }
    }

    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        points
            .into_iter()
            .fold(Self::empty(), |b, p| b.grow_point(p))
    }

    pub fn grow_point(&self, p: &Vec3) -> Self {
        Self {
            min: self.min.inf(p),
            max: self.max.sup(p),
        }
    }

    pub fn union(&self, o: &Aabb) -> Self {
        Self {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.min[k] && o.max[k] <= self.max[k])
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    /// Slab test. Returns the entry distance clipped to the ray interval.
    pub fn hit(&self, ray: &Ray, inv_dir: &Vec3) -> Option<f64> {
        let mut t0 = ray.t_min;
        let mut t1 = ray.t_max;
        for k in 0..3 {
            let mut ta = (self.min[k] - ray.origin[k]) * inv_dir[k];
            let mut tb = (self.max[k] - ray.origin[k]) * inv_dir[k];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            // NaN from 0 * inf (origin on a slab with a parallel ray) keeps the
            // current bound via max/min semantics.
            t0 = if ta > t0 { ta } else { t0 };
            t1 = if tb < t1 { tb } else { t1 };
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Interior {
        left: usize,
        right: usize,
    },
    /// Range into [`Bvh::primitive_order`].
    Leaf {
        start: usize,
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvhNode {
    pub bounds: Aabb,
    pub kind: NodeKind,
}

/// Flattened binary tree; node 0 is the root.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<BvhNode>,
    order: Vec<usize>,
}

/// Closest hit found by [`Bvh::first_hit`], plus traversal counters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traversal<H> {
    pub hit: Option<(usize, H)>,
    pub primitive_tests: usize,
    pub nodes_visited: usize,
}

impl Bvh {
    /// Median split on the longest axis of the centroid bounds.
    pub fn build(bounds: &[Aabb]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::EmptyScene);
        }
        let centroids: Vec<Vec3> = bounds.iter().map(Aabb::centroid).collect();
        let mut order: Vec<usize> = (0..bounds.len()).collect();
        let mut nodes = Vec::with_capacity(2 * bounds.len() / MAX_LEAF_SIZE + 1);
        nodes.push(BvhNode {
            bounds: Aabb::empty(),
            kind: NodeKind::Leaf { start: 0, count: 0 },
        });
        // (node index, start, end)
        let mut stack = vec![(0usize, 0usize, bounds.len())];
        while let Some((node, start, end)) = stack.pop() {
            let slice = &mut order[start..end];
            let node_bounds = slice
                .iter()
                .fold(Aabb::empty(), |b, &i| b.union(&bounds[i]));
            if slice.len() <= MAX_LEAF_SIZE {
                nodes[node] = BvhNode {
                    bounds: node_bounds,
                    kind: NodeKind::Leaf {
                        start,
                        count: end - start,
                    },
                };
                continue;
            }
            let cb = Aabb::from_points(slice.iter().map(|&i| &centroids[i]));
            let axis = cb.longest_axis();
            let mid = slice.len() / 2;
            slice.select_nth_unstable_by(mid, |&a, &b| {
                centroids[a][axis]
                    .total_cmp(&centroids[b][axis])
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            let right = left + 1;
            let placeholder = BvhNode {
                bounds: Aabb::empty(),
                kind: NodeKind::Leaf { start: 0, count: 0 },
            };
            nodes.push(placeholder);
            nodes.push(placeholder);
            nodes[node] = BvhNode {
                bounds: node_bounds,
                kind: NodeKind::Interior { left, right },
            };
            stack.push((right, start + mid, end));
            stack.push((left, start, start + mid));
        }
        Ok(Self { nodes, order })
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn primitive_order(&self) -> &[usize] {
        &self.order
    }

    pub fn root_bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 1usize)];
        while let Some((n, d)) = stack.pop() {
            best = best.max(d);
            if let NodeKind::Interior { left, right } = self.nodes[n].kind {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        best
    }

    /// Closest hit along `ray`. `intersect(id, ray)` returns the hit distance
    /// and payload for primitive `id`. Equal distances resolve to the
    /// smaller primitive id.
    pub fn first_hit<H>(
        &self,
        ray: &Ray,
        mut intersect: impl FnMut(usize, &Ray) -> Option<(f64, H)>,
    ) -> Traversal<H> {
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut best: Option<(usize, f64, H)> = None;
        let mut tests = 0;
        let mut visited = 0;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        if self.nodes[0].bounds.hit(ray, &inv).is_some() {
            stack.push(0);
        }
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if let Some((_, bt, _)) = &best {
                // Queued before the current best was found.
                if node.bounds.hit(ray, &inv).is_none_or(|t| t > *bt) {
                    continue;
                }
            }
            visited += 1;
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &id in &self.order[start..start + count] {
                        tests += 1;
                        if let Some((t, payload)) = intersect(id, ray) {
                            let better = match &best {
                                None => true,
                                Some((bid, bt, _)) => t < *bt || (t == *bt && id < *bid),
                            };
                            if better {
                                best = Some((id, t, payload));
                            }
                        }
                    }
                }
                NodeKind::Interior { left, right } => {
                    let limit = best.as_ref().map_or(f64::INFINITY, |b| b.1);
                    let tl = self.nodes[left]
                        .bounds
                        .hit(ray, &inv)
                        .filter(|&t| t <= limit);
                    let tr = self.nodes[right]
                        .bounds
                        .hit(ray, &inv)
                        .filter(|&t| t <= limit);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            // Visit the nearer child first.
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        Traversal {
            hit: best.map(|(id, _, h)| (id, h)),
            primitive_tests: tests,
            nodes_visited: visited,
        }
    }

    /// Whether any primitive is hit inside the ray interval.
    pub fn any_hit(&self, ray: &Ray, mut intersect: impl FnMut(usize, &Ray) -> bool) -> bool {
        let inv = ray.direction.map(|d| 1.0 / d);
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.bounds.hit(ray, &inv).is_none() {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    if self.order[start..start + count]
                        .iter()
                        .any(|&id| intersect(id, ray))
                    {
                        return true;
                    }
                }
                NodeKind::Interior { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ray_sphere_intersect, ray_triangle_intersect, Sphere, Triangle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sphere_box(s: &Sphere) -> Aabb {
        Aabb::new(
            s.center - Vec3::repeat(s.radius),
            s.center + Vec3::repeat(s.radius),
        )
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(Bvh::build(&[]), Err(Error::EmptyScene)));
    }

    #[test]
    fn single_primitive_is_one_leaf() {
        let b = Aabb::new(Vec3::zeros(), Vec3::repeat(1.0));
        let bvh = Bvh::build(&[b]).unwrap();
        assert_eq!(bvh.nodes().len(), 1);
        assert_eq!(bvh.root_bounds(), b);
        assert!(matches!(
            bvh.nodes()[0].kind,
            NodeKind::Leaf { count: 1, .. }
        ));
    }

    #[test]
    fn two_disjoint_spheres_split_into_two_leaves() {
        let a = Sphere::new(Vec3::new(-5.0, 0.0, 0.0), 1.0, 0).unwrap();
        let b = Sphere::new(Vec3::new(5.0, 0.0, 0.0), 1.0, 0).unwrap();
        let boxes = [sphere_box(&a), sphere_box(&b)];
        // Leaves hold up to four primitives; force a split with five copies.
        let bvh = Bvh::build(&boxes).unwrap();
        assert_eq!(bvh.root_bounds(), boxes[0].union(&boxes[1]));
        let many: Vec<Aabb> = (0..10).map(|i| boxes[i % 2]).collect();
        let bvh = Bvh::build(&many).unwrap();
        let NodeKind::Interior { left, right } = bvh.nodes()[0].kind else {
            panic!("root should be interior");
        };
        assert_eq!(bvh.nodes()[0].bounds, boxes[0].union(&boxes[1]));
        assert!(bvh.nodes()[left].bounds.max.x < bvh.nodes()[right].bounds.min.x);
    }

    #[test]
    fn miss_root_does_no_work() {
        let boxes = vec![Aabb::new(Vec3::zeros(), Vec3::repeat(1.0)); 9];
        let bvh = Bvh::build(&boxes).unwrap();
        let ray = Ray::new(Vec3::new(10.0, 10.0, 10.0), Vec3::x());
        let tr = bvh.first_hit(&ray, |_, _| Some((1.0, ())));
        assert!(tr.hit.is_none());
        assert_eq!(tr.primitive_tests, 0);
    }

    #[test]
    fn equal_t_prefers_lower_id() {
        let tri = Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::y(), 0).unwrap();
        let tris = vec![tri; 7];
        let boxes: Vec<Aabb> = tris
            .iter()
            .map(|t| Aabb::from_points(&t.vertices))
            .collect();
        let bvh = Bvh::build(&boxes).unwrap();
        let ray = Ray::new(Vec3::new(0.2, 0.2, 1.0), -Vec3::z());
        let tr = bvh.first_hit(&ray, |id, r| {
            ray_triangle_intersect(r, &tris[id]).map(|h| (h.t, h))
        });
        assert_eq!(tr.hit.unwrap().0, 0);
    }

    #[test]
    fn structure_invariants_and_balance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 10_000;
        let tris: Vec<Triangle> = (0..n)
            .map(|_| {
                let c = Vec3::new(
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                    rng.random_range(-50.0..50.0),
                );
                let a = c + Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let b = c + Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let d = c + Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                Triangle {
                    vertices: [a, b, d],
                    normals: None,
                    uvs: None,
                    material: 0,
                    texture: None,
                }
            })
            .collect();
        let boxes: Vec<Aabb> = tris
            .iter()
            .map(|t| Aabb::from_points(&t.vertices))
            .collect();
        let bvh = Bvh::build(&boxes).unwrap();
        assert!(bvh.depth() as f64 <= 2.0 * (n as f64).log2() + 8.0);

        let mut seen = vec![0usize; n];
        for node in bvh.nodes() {
            match node.kind {
                NodeKind::Interior { left, right } => {
                    assert!(node.bounds.contains(&bvh.nodes()[left].bounds));
                    assert!(node.bounds.contains(&bvh.nodes()[right].bounds));
                }
                NodeKind::Leaf { start, count } => {
                    assert!((1..=MAX_LEAF_SIZE).contains(&count));
                    for &id in &bvh.primitive_order()[start..start + count] {
                        assert!(node.bounds.contains(&boxes[id]));
                        seen[id] += 1;
                    }
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn sphere_scene_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spheres: Vec<Sphere> = (0..200)
            .map(|_| {
                Sphere::new(
                    Vec3::new(
                        rng.random_range(-20.0..20.0),
                        rng.random_range(-20.0..20.0),
                        rng.random_range(-20.0..20.0),
                    ),
                    rng.random_range(0.2..2.0),
                    0,
                )
                .unwrap()
            })
            .collect();
        let boxes: Vec<Aabb> = spheres.iter().map(sphere_box).collect();
        let bvh = Bvh::build(&boxes).unwrap();
        for _ in 0..500 {
            let o = Vec3::new(
                rng.random_range(-30.0..30.0),
                rng.random_range(-30.0..30.0),
                rng.random_range(-30.0..30.0),
            );
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let ray = Ray::new(o, d);
            let fast = bvh
                .first_hit(&ray, |id, r| {
                    ray_sphere_intersect(r, &spheres[id]).map(|h| (h.t, ()))
                })
                .hit
                .map(|(id, _)| id);
            let mut slow: Option<(usize, f64)> = None;
            for (id, s) in spheres.iter().enumerate() {
                if let Some(h) = ray_sphere_intersect(&ray, s) {
                    if slow.is_none_or(|(_, t)| h.t < t) {
                        slow = Some((id, h.t));
                    }
                }
            }
            assert_eq!(fast, slow.map(|s| s.0));
            let any = bvh.any_hit(&ray, |id, r| {
                ray_sphere_intersect(r, &spheres[id]).is_some()
            });
            assert_eq!(any, slow.is_some());
        }
    }
}
