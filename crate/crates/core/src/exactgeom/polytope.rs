//! Rational polytopes with dual V-/H-representations.
//!
//! Lower-dimensional polytopes are legal values: their H-representation
//! carries the affine hull as pairs of opposite halfspaces, their volume is 0
//! and their inradius is 0. All representations are normalized (vertices
//! lex-sorted, facet normals primitive integer vectors) so that equal
//! polytopes compare equal structurally.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use super::linalg::{det, nullspace, primitive, rref, solve_square};
use super::lp::{self, Constraint, LpResult};
use super::{dot, is_zero_vec, unit, vadd, vneg, vsub, zeros, Vector};
use crate::error::{Error, Result};
use crate::scalar::Rational;

#[derive(Clone, Debug)]
pub struct Polytope {
    /// Extreme points, lexicographically sorted.
    pub vertices: Vec<Vector>,
    /// Irredundant halfspaces ⟨a,x⟩ ≤ b; affine-hull equalities appear as
    /// opposite pairs when dim < ambient.
    pub halfspaces: Vec<(Vector, Rational)>,
    /// Dimension of the affine hull.
    pub dim: usize,
    pub ambient: usize,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}
impl Eq for Polytope {}

/// Extreme points of a full-dimensional point cloud (Clarkson's algorithm:
/// separation LPs are sized by the running hull, not the whole cloud).
fn extreme_points(points: &[Vector], dim: usize) -> Vec<Vector> {
    if dim == 0 {
        return vec![points[0].clone()];
    }
    let one = Rational::one();
    let mut hull: Vec<Vector> = Vec::new();
    let mut hull_set: BTreeSet<Vector> = BTreeSet::new();
    for p in points {
        if hull_set.contains(p) {
            continue;
        }
        loop {
            // find a with ⟨a, p⟩ > ⟨a, e⟩ for all confirmed e; cap |a|, t
            let mut cs: Vec<Constraint> = Vec::with_capacity(hull.len() + 2 * dim + 1);
            for e in &hull {
                let mut row = vsub(e, p);
                row.push(one.clone());
                cs.push((row, Rational::zero()));
            }
            for i in 0..dim {
                let mut e = zeros(dim + 1);
                e[i] = one.clone();
                cs.push((e.clone(), one.clone()));
                cs.push((vneg(&e), one.clone()));
            }
            let mut t_cap = zeros(dim + 1);
            t_cap[dim] = one.clone();
            cs.push((t_cap, one.clone()));
            let mut obj = zeros(dim + 1);
            obj[dim] = one.clone();
            let (opt, sol) = match lp::maximize(&obj, &cs) {
                LpResult::Optimal { value, point } => (value, point),
                other => unreachable!("separation LP must be solvable: {other:?}"),
            };
            if !opt.is_positive() {
                break; // p lies in the hull of confirmed extremes
            }
            let a = &sol[..dim];
            // lex-max maximizer of ⟨a,·⟩ over the cloud is a genuine vertex
            let best = points
                .iter()
                .max_by(|x, y| dot(a, x).cmp(&dot(a, y)).then_with(|| x.cmp(y)))
                .unwrap();
            let is_p = best == p;
            if hull_set.insert(best.clone()) {
                hull.push(best.clone());
            }
            if is_p {
                break;
            }
        }
    }
    hull
}

/// Facets of a full-dimensional polytope given its extreme points: brute
/// force over d-subsets, oriented outward, normals primitive.
fn facets_fulldim(verts: &[Vector], dim: usize) -> Vec<(Vector, Rational)> {
    let mut out: BTreeSet<(Vector, Rational)> = BTreeSet::new();
    if dim == 0 {
        return vec![];
    }
    for subset in verts.iter().combinations(dim) {
        let diffs: Vec<Vector> = subset[1..].iter().map(|v| vsub(v, subset[0])).collect();
        let ns = nullspace(&diffs, dim);
        if ns.len() != 1 {
            continue;
        }
        let n = primitive(&ns[0]);
        let b = dot(&n, subset[0]);
        let mut above = false;
        let mut below = false;
        for v in verts {
            match dot(&n, v).cmp(&b) {
                std::cmp::Ordering::Greater => above = true,
                std::cmp::Ordering::Less => below = true,
                _ => {}
            }
        }
        match (above, below) {
            (false, true) => {
                out.insert((n, b));
            }
            (true, false) => {
                out.insert((vneg(&n), -b));
            }
            (false, false) | (true, true) => {}
        }
    }
    out.into_iter().collect()
}

struct Reduction {
    /// pivot coordinates: projection onto them is injective on the affine hull
    pivots: Vec<usize>,
    /// normals of the affine hull (equality constraints), primitive
    eq_normals: Vec<Vector>,
    base: Vector,
}

fn affine_reduction(points: &[Vector], ambient: usize) -> Reduction {
    let base = points[0].clone();
    let diffs: Vec<Vector> = points[1..].iter().map(|p| vsub(p, &base)).collect();
    let mut m = diffs.clone();
    let pivots = rref(&mut m);
    let eq_normals = nullspace(&diffs, ambient)
        .iter()
        .map(|n| primitive(n))
        .collect();
    Reduction {
        pivots,
        eq_normals,
        base,
    }
}

impl Reduction {
    fn project(&self, x: &[Rational]) -> Vector {
        self.pivots.iter().map(|&j| x[j].clone()).collect()
    }
    fn lift_normal(&self, a: &[Rational], ambient: usize) -> Vector {
        let mut n = zeros(ambient);
        for (l, &j) in self.pivots.iter().enumerate() {
            n[j] = a[l].clone();
        }
        n
    }
}

/// Convex hull of a nonempty rational point set.
pub fn hull(points: &[Vector]) -> Result<Polytope> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let ambient = points[0].len();
    for p in points {
        if p.len() != ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient,
                got: p.len(),
            });
        }
    }
    let mut pts: Vec<Vector> = points.to_vec();
    pts.sort();
    pts.dedup();
    let red = affine_reduction(&pts, ambient);
    let dim = red.pivots.len();
    let reduced: Vec<Vector> = pts.iter().map(|p| red.project(p)).collect();
    let ext_reduced = extreme_points(&reduced, dim);
    // lift extremes back: pivot projection is injective on the affine hull
    let ext_set: BTreeSet<&Vector> = ext_reduced.iter().collect();
    let mut vertices: Vec<Vector> = pts
        .iter()
        .zip(&reduced)
        .filter(|(_, r)| ext_set.contains(r))
        .map(|(p, _)| p.clone())
        .collect();
    vertices.sort();
    vertices.dedup();

    let mut halfspaces: Vec<(Vector, Rational)> = Vec::new();
    for n in &red.eq_normals {
        let b = dot(n, &red.base);
        halfspaces.push((n.clone(), b.clone()));
        halfspaces.push((vneg(n), -b));
    }
    for (a, b) in facets_fulldim(&ext_reduced, dim) {
        halfspaces.push((red.lift_normal(&a, ambient), b));
    }
    halfspaces.sort();
    halfspaces.dedup();
    Ok(Polytope {
        vertices,
        halfspaces,
        dim,
        ambient,
    })
}

/// Intersection of halfspaces as a polytope. `Ok(None)` when empty,
/// `Err(Unbounded)` when the region is not bounded.
pub fn from_halfspaces(ambient: usize, halfspaces: &[Constraint]) -> Result<Option<Polytope>> {
    if lp::feasible_point(ambient, halfspaces).is_none() {
        return Ok(None);
    }
    for i in 0..ambient {
        let e = unit(ambient, i);
        for obj in [e.clone(), vneg(&e)] {
            if let LpResult::Unbounded { .. } = lp::maximize(&obj, halfspaces) {
                return Err(Error::Unbounded);
            }
        }
    }
    let mut candidates: BTreeSet<Vector> = BTreeSet::new();
    if ambient == 0 {
        candidates.insert(vec![]);
    }
    for subset in halfspaces.iter().combinations(ambient) {
        let a: Vec<Vector> = subset.iter().map(|(n, _)| n.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|(_, o)| o.clone()).collect();
        if let Some(x) = solve_square(&a, &b) {
            if halfspaces.iter().all(|(n, o)| dot(n, &x) <= *o) {
                candidates.insert(x);
            }
        }
    }
    let pts: Vec<Vector> = candidates.into_iter().collect();
    Ok(Some(hull(&pts)?))
}

impl Polytope {
    pub fn point(x: Vector) -> Self {
        hull(std::slice::from_ref(&x)).unwrap()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.ambient && self.halfspaces.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    pub fn is_fulldim(&self) -> bool {
        self.dim == self.ambient
    }

    pub fn translate(&self, t: &[Rational]) -> Polytope {
        let pts: Vec<Vector> = self.vertices.iter().map(|v| vadd(v, t)).collect();
        hull(&pts).unwrap()
    }

    pub fn scale(&self, s: &Rational) -> Polytope {
        let pts: Vec<Vector> = self
            .vertices
            .iter()
            .map(|v| super::vscale(v, s))
            .collect();
        hull(&pts).unwrap()
    }

    /// max over the polytope of ⟨u, x⟩.
    pub fn support(&self, u: &[Rational]) -> Rational {
        self.vertices
            .iter()
            .map(|v| dot(u, v))
            .max()
            .expect("polytope has a vertex")
    }

    /// Length of the projection to the direction u.
    pub fn width_along(&self, u: &[Rational]) -> Result<Rational> {
        if is_zero_vec(u) {
            return Err(Error::ZeroDirection);
        }
        Ok(self.support(u) + self.support(&vneg(u)))
    }

    /// Exact Lebesgue volume; 0 for lower-dimensional polytopes.
    pub fn volume(&self) -> Rational {
        if self.dim < self.ambient {
            return Rational::zero();
        }
        let d = self.ambient;
        if d == 0 {
            return Rational::one();
        }
        let mut total = Rational::zero();
        let dfact: Rational = (1..=d as i64)
            .map(|k| Rational::from_integer(k.into()))
            .product();
        for simplex in triangulate(&self.vertices) {
            let rows: Vec<Vector> = simplex[1..].iter().map(|v| vsub(v, &simplex[0])).collect();
            total += det(&rows).abs() / &dfact;
        }
        total
    }
}

/// Triangulates the convex hull of a point set into simplices whose vertices
/// are input points; each simplex has (affine dim + 1) points.
pub fn triangulate(points: &[Vector]) -> Vec<Vec<Vector>> {
    let ambient = points[0].len();
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let red = affine_reduction(&pts, ambient);
    let dim = red.pivots.len();
    if dim == 0 {
        return vec![vec![pts[0].clone()]];
    }
    let reduced: Vec<Vector> = pts.iter().map(|p| red.project(p)).collect();
    let ext = extreme_points(&reduced, dim);
    let mut pairs: Vec<(Vector, Vector)> = pts
        .iter()
        .zip(&reduced)
        .filter(|(_, r)| ext.contains(r))
        .map(|(p, r)| (r.clone(), p.clone()))
        .collect();
    pairs.sort();
    pairs.dedup();
    let ext_sorted: Vec<Vector> = pairs.iter().map(|(r, _)| r.clone()).collect();
    if ext_sorted.len() == dim + 1 {
        return vec![pairs.into_iter().map(|(_, p)| p).collect()];
    }
    let (r0, o0) = pairs[0].clone();
    let mut out = Vec::new();
    for (a, b) in facets_fulldim(&ext_sorted, dim) {
        if dot(&a, &r0) == b {
            continue;
        }
        let facet_orig: Vec<Vector> = pairs
            .iter()
            .filter(|(r, _)| dot(&a, r) == b)
            .map(|(_, p)| p.clone())
            .collect();
        for mut simplex in triangulate(&facet_orig) {
            simplex.push(o0.clone());
            out.push(simplex);
        }
    }
    out
}

/// Minkowski sum, exact: hull of pairwise vertex sums.
pub fn minkowski_sum(a: &Polytope, b: &Polytope) -> Result<Polytope> {
    if a.ambient != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: a.ambient,
            got: b.ambient,
        });
    }
    let mut sums = Vec::with_capacity(a.vertices.len() * b.vertices.len());
    for va in &a.vertices {
        for vb in &b.vertices {
            sums.push(vadd(va, vb));
        }
    }
    hull(&sums)
}

/// Mixed volume of d bodies in dimension d, normalized so that
/// MV(C,…,C) = d!·vol(C); inclusion–exclusion over Minkowski subsums.
pub fn mixed_volume(bodies: &[Polytope]) -> Result<Rational> {
    let d = match bodies.first() {
        Some(p) => p.ambient,
        None => return Err(Error::EmptyInput),
    };
    if bodies.len() != d {
        return Err(Error::WrongCount {
            expected: d,
            got: bodies.len(),
        });
    }
    for p in bodies {
        if p.ambient != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.ambient,
            });
        }
    }
    let mut total = Rational::zero();
    for mask in 1u32..(1 << d) {
        let mut sum: Option<Polytope> = None;
        for (j, body) in bodies.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum = Some(match sum {
                    None => body.clone(),
                    Some(acc) => minkowski_sum(&acc, body)?,
                });
            }
        }
        let vol = sum.unwrap().volume();
        let sign = if (d as u32 - mask.count_ones()) % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        total += sign * vol;
    }
    Ok(total)
}

/// Largest λ such that some translate of λ·b fits inside c; 0 when c is
/// lower-dimensional. b must be full-dimensional.
pub fn inradius(c: &Polytope, b: &Polytope) -> Result<Rational> {
    if !b.is_fulldim() {
        return Err(Error::Semantic(
            "inradius reference body must be full-dimensional".into(),
        ));
    }
    if c.ambient != b.ambient {
        return Err(Error::DimensionMismatch {
            expected: c.ambient,
            got: b.ambient,
        });
    }
    if !c.is_fulldim() {
        return Ok(Rational::zero());
    }
    let d = c.ambient;
    // variables (x, λ): maximize λ s.t. ⟨a_i,x⟩ + λ·support(b,a_i) ≤ b_i, λ ≥ 0
    let mut cs: Vec<Constraint> = Vec::with_capacity(c.halfspaces.len() + 1);
    for (a, off) in &c.halfspaces {
        let mut row = a.clone();
        row.push(b.support(a));
        cs.push((row, off.clone()));
    }
    let mut nonneg = zeros(d + 1);
    nonneg[d] = -Rational::one();
    cs.push((nonneg, Rational::zero()));
    let mut obj = zeros(d + 1);
    obj[d] = Rational::one();
    match lp::maximize(&obj, &cs) {
        LpResult::Optimal { value, .. } => Ok(value),
        LpResult::Infeasible => Err(Error::Infeasible),
        LpResult::Unbounded { .. } => Err(Error::Unbounded),
    }
}

/// Finitely generated convex cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub generators: Vec<Vector>,
}

impl Cone {
    pub fn new(generators: Vec<Vector>) -> Self {
        Cone { generators }
    }
}

/// H-description of cone(generators) in `dim` dimensions: returns
/// (inequality normals n with ⟨n,y⟩ ≥ 0, equality normals m with ⟨m,y⟩ = 0).
pub fn conical_hull_facets(generators: &[Vector], dim: usize) -> (Vec<Vector>, Vec<Vector>) {
    let gens: Vec<Vector> = generators
        .iter()
        .filter(|g| !is_zero_vec(g))
        .cloned()
        .collect();
    if gens.is_empty() {
        // cone = {0}: equalities in every coordinate
        return (vec![], (0..dim).map(|i| unit(dim, i)).collect());
    }
    let equalities: Vec<Vector> = nullspace(&gens, dim).iter().map(|n| primitive(n)).collect();
    let mut m = gens.clone();
    let pivots = rref(&mut m);
    let s = pivots.len();
    let project = |x: &[Rational]| -> Vector { pivots.iter().map(|&j| x[j].clone()).collect() };
    let reduced: Vec<Vector> = gens.iter().map(|g| project(g)).collect();
    let mut ineqs: BTreeSet<Vector> = BTreeSet::new();
    for subset in reduced.iter().combinations(s - 1) {
        let rows: Vec<Vector> = subset.into_iter().cloned().collect();
        let ns = nullspace(&rows, s);
        if ns.len() != 1 {
            continue;
        }
        let n = primitive(&ns[0]);
        let mut pos = false;
        let mut neg = false;
        for g in &reduced {
            match dot(&n, g).cmp(&Rational::zero()) {
                std::cmp::Ordering::Greater => pos = true,
                std::cmp::Ordering::Less => neg = true,
                _ => {}
            }
        }
        match (pos, neg) {
            (true, false) => {
                ineqs.insert(n);
            }
            (false, true) => {
                ineqs.insert(vneg(&n));
            }
            _ => {}
        }
    }
    // lift reduced normals: pad zeros outside pivot coordinates
    let lifted: Vec<Vector> = ineqs
        .into_iter()
        .map(|a| {
            let mut n = zeros(dim);
            for (l, &j) in pivots.iter().enumerate() {
                n[j] = a[l].clone();
            }
            n
        })
        .collect();
    (lifted, equalities)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};

    fn v2(x: i64, y: i64) -> Vector {
        vec![rat_int(x), rat_int(y)]
    }

    pub fn unit_square() -> Polytope {
        hull(&[v2(0, 0), v2(1, 0), v2(0, 1), v2(1, 1)]).unwrap()
    }

    pub fn triangle() -> Polytope {
        hull(&[v2(0, 0), v2(1, 0), v2(0, 1)]).unwrap()
    }

    #[test]
    fn hull_removes_interior() {
        let p = hull(&[v2(0, 0), v2(1, 0), v2(0, 1), vec![rat(1, 2), rat(1, 4)]]).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.dim, 2);
    }

    #[test]
    fn hull_segment_1d() {
        let p = hull(&[vec![rat_int(0)], vec![rat_int(1)]]).unwrap();
        assert_eq!(p.vertices, vec![vec![rat_int(0)], vec![rat_int(1)]]);
        assert_eq!(p.halfspaces.len(), 2);
    }

    #[test]
    fn square_has_four_facets() {
        let p = unit_square();
        assert_eq!(p.vertices.len(), 4);
        assert_eq!(p.halfspaces.len(), 4);
        assert_eq!(p.volume(), rat_int(1));
    }

    #[test]
    fn lower_dimensional_segment() {
        let p = hull(&[v2(0, 0), v2(1, 0)]).unwrap();
        assert_eq!(p.dim, 1);
        assert_eq!(p.volume(), rat_int(0));
        assert_eq!(p.width_along(&v2(0, 1)).unwrap(), rat_int(0));
        assert_eq!(p.width_along(&v2(1, 0)).unwrap(), rat_int(1));
    }

    #[test]
    fn minkowski_pentagon() {
        let p = minkowski_sum(&triangle(), &unit_square()).unwrap();
        let mut expect = vec![v2(0, 0), v2(2, 0), v2(2, 1), v2(1, 2), v2(0, 2)];
        expect.sort();
        assert_eq!(p.vertices, expect);
        // shoelace oracle for the pentagon's area
        assert_eq!(p.volume(), rat(7, 2));
    }

    #[test]
    fn mixed_volume_examples() {
        assert_eq!(
            mixed_volume(&[unit_square(), unit_square()]).unwrap(),
            rat_int(2)
        );
        assert_eq!(
            mixed_volume(&[triangle(), unit_square()]).unwrap(),
            rat_int(2)
        );
        let pt = Polytope::point(v2(3, 5));
        assert_eq!(mixed_volume(&[unit_square(), pt]).unwrap(), rat_int(0));
    }

    #[test]
    fn inradius_examples() {
        let c = hull(&[v2(0, 0), v2(2, 0), v2(0, 2), v2(2, 2)]).unwrap();
        assert_eq!(inradius(&c, &unit_square()).unwrap(), rat_int(2));
        let rect = hull(&[v2(0, 0), v2(1, 0), v2(0, 3), v2(1, 3)]).unwrap();
        assert_eq!(inradius(&rect, &unit_square()).unwrap(), rat_int(1));
        assert_eq!(inradius(&triangle(), &triangle()).unwrap(), rat_int(1));
        let seg = hull(&[v2(0, 0), v2(1, 0)]).unwrap();
        assert_eq!(inradius(&seg, &unit_square()).unwrap(), rat_int(0));
    }

    #[test]
    fn from_halfspaces_square() {
        let cs = vec![
            (v2(1, 0), rat_int(1)),
            (v2(-1, 0), rat_int(0)),
            (v2(0, 1), rat_int(1)),
            (v2(0, -1), rat_int(0)),
        ];
        let p = from_halfspaces(2, &cs).unwrap().unwrap();
        assert_eq!(p, unit_square());
        // infeasible
        let bad = vec![(v2(1, 0), rat_int(-1)), (v2(-1, 0), rat_int(0))];
        assert!(from_halfspaces(2, &bad).unwrap().is_none());
        // unbounded
        let open = vec![(v2(1, 0), rat_int(1))];
        assert!(matches!(from_halfspaces(2, &open), Err(Error::Unbounded)));
    }

    #[test]
    fn cube_volume_3d() {
        let mut pts = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    pts.push(vec![rat_int(x), rat_int(y), rat_int(z)]);
                }
            }
        }
        let p = hull(&pts).unwrap();
        assert_eq!(p.vertices.len(), 8);
        assert_eq!(p.halfspaces.len(), 6);
        assert_eq!(p.volume(), rat_int(1));
        assert_eq!(
            mixed_volume(&[p.clone(), p.clone(), p.clone()]).unwrap(),
            rat_int(6)
        );
    }

    #[test]
    fn cone_facets_halfplane() {
        let gens = vec![v2(1, 0), v2(-1, 0), v2(0, 1)];
        let (ineqs, eqs) = conical_hull_facets(&gens, 2);
        assert_eq!(ineqs, vec![v2(0, 1)]);
        assert!(eqs.is_empty());
        let (ineqs, eqs) = conical_hull_facets(&[v2(1, 2)], 2);
        assert_eq!(eqs.len(), 1);
        assert_eq!(ineqs.len(), 1);
    }
}
