//! Piecewise-affine concave functions on polytopes and their calculus:
//! Legendre–Fenchel duality, sup-convolution, exact (mixed) integrals,
//! sup-level sets, sup-differentials, width-decay probes.
//!
//! A function is stored as a finite min of affine forms on a polytope
//! domain; this class is closed under every operation here and keeps all
//! optimization problems linear.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactgeom::lp::{self, Constraint, LpResult};
use crate::exactgeom::polytope::{self, Polytope};
use crate::exactgeom::{dot, is_zero_vec, unit, vadd, vneg, vscale, vsub, zeros, Vector};
use crate::scalar::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct AffineForm {
    pub gradient: Vector,
    pub constant: Rational,
}

impl AffineForm {
    pub fn new(gradient: Vector, constant: Rational) -> Self {
        AffineForm { gradient, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.gradient, x) + &self.constant
    }

    pub fn constant_form(dim: usize, c: Rational) -> Self {
        AffineForm::new(zeros(dim), c)
    }
}

/// Global min of affine forms on all of space (metric-side data: the
/// function u ↦ min_i(⟨a_i,u⟩ + b_i), concave and piecewise affine on ℝ^d).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineFamily {
    pub forms: Vec<AffineForm>,
    pub dim: usize,
}

impl AffineFamily {
    pub fn new(dim: usize, forms: Vec<AffineForm>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::EmptyInput);
        }
        for f in &forms {
            if f.gradient.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: f.gradient.len(),
                });
            }
        }
        let mut forms = forms;
        forms.sort();
        forms.dedup();
        let forms = prune_global_min(forms, dim);
        Ok(AffineFamily { forms, dim })
    }

    pub fn eval(&self, u: &[Rational]) -> Rational {
        self.forms.iter().map(|f| f.eval(u)).min().unwrap()
    }
}

/// Drops forms never strictly active in a global min over all of ℝ^d.
fn prune_global_min(forms: Vec<AffineForm>, dim: usize) -> Vec<AffineForm> {
    if forms.len() <= 1 {
        return forms;
    }
    let one = Rational::one();
    let kept: Vec<AffineForm> = forms
        .iter()
        .filter(|fk| {
            // ∃u with fk(u) < fj(u) for all j ≠ k (capped LP; >0 means yes)
            let mut cs: Vec<Constraint> = Vec::new();
            for fj in &forms {
                if fj == *fk {
                    continue;
                }
                let mut row = vsub(&fk.gradient, &fj.gradient);
                row.push(one.clone());
                cs.push((row, &fj.constant - &fk.constant));
            }
            let mut tcap = zeros(dim + 1);
            tcap[dim] = one.clone();
            cs.push((tcap.clone(), one.clone()));
            let mut obj = zeros(dim + 1);
            obj[dim] = one.clone();
            match lp::maximize(&obj, &cs) {
                LpResult::Optimal { value, .. } => value.is_positive(),
                LpResult::Unbounded { .. } => true,
                LpResult::Infeasible => unreachable!("capped LP is feasible"),
            }
        })
        .cloned()
        .collect();
    if kept.is_empty() {
        // all forms coincide on their common min region; keep the first
        vec![forms[0].clone()]
    } else {
        kept
    }
}

/// Concave piecewise-affine function: min of `pieces` on `domain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAConcave {
    pub domain: Polytope,
    pub pieces: Vec<AffineForm>,
}

impl PAConcave {
    /// Normalizing constructor: dedups pieces and drops any piece that is
    /// nowhere strictly active on the domain.
    pub fn new(domain: Polytope, pieces: Vec<AffineForm>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptyInput);
        }
        for p in &pieces {
            if p.gradient.len() != domain.ambient {
                return Err(Error::DimensionMismatch {
                    expected: domain.ambient,
                    got: p.gradient.len(),
                });
            }
        }
        let mut pieces = pieces;
        pieces.sort();
        pieces.dedup();
        let pieces = prune_on_domain(pieces, &domain);
        Ok(PAConcave { domain, pieces })
    }

    pub fn constant(domain: Polytope, c: Rational) -> Self {
        let d = domain.ambient;
        PAConcave {
            domain,
            pieces: vec![AffineForm::constant_form(d, c)],
        }
    }

    pub fn ambient(&self) -> usize {
        self.domain.ambient
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain);
        }
        Ok(self.pieces.iter().map(|p| p.eval(x)).min().unwrap())
    }

    fn min_vertex_value(&self) -> Rational {
        self.domain
            .vertices
            .iter()
            .map(|v| self.pieces.iter().map(|p| p.eval(v)).min().unwrap())
            .min()
            .unwrap()
    }

    /// Exact maximum via an LP lift; the argmax is the lexicographically
    /// smallest point of the max face, and the face itself is returned.
    pub fn maximize(&self) -> (Rational, Vector, Polytope) {
        let d = self.ambient();
        // variables (x, t): max t s.t. t ≤ piece_i(x), x ∈ domain
        let mut cs: Vec<Constraint> = Vec::new();
        for p in &self.pieces {
            let mut row = vneg(&p.gradient);
            row.push(Rational::one());
            cs.push((row, p.constant.clone()));
        }
        for (a, b) in &self.domain.halfspaces {
            let mut row = a.clone();
            row.push(Rational::zero());
            cs.push((row, b.clone()));
        }
        let mut obj = zeros(d + 1);
        obj[d] = Rational::one();
        let (mu, point) = lp::maximize_lex(&obj, &cs)
            .optimal()
            .expect("bounded nonempty lift");
        let argmax: Vector = point[..d].to_vec();
        let face = self.sup_level(&mu).expect("max face is nonempty");
        (mu, argmax, face)
    }

    /// {x ∈ domain : f(x) ≥ t}; error when empty (t above the maximum).
    pub fn sup_level(&self, t: &Rational) -> Result<Polytope> {
        let mut hs = self.domain.halfspaces.clone();
        for p in &self.pieces {
            hs.push((vneg(&p.gradient), &p.constant - t));
        }
        match polytope::from_halfspaces(self.ambient(), &hs)? {
            Some(p) => Ok(p),
            None => Err(Error::LevelAboveMax(format_rational(t))),
        }
    }

    /// Exact Lebesgue integral over the domain (0 if lower-dimensional):
    /// refine into piece-activity regions, triangulate, and use that an
    /// affine function integrates to volume × mean of vertex values.
    pub fn integral(&self) -> Rational {
        let d = self.ambient();
        if !self.domain.is_fulldim() {
            return Rational::zero();
        }
        let mut total = Rational::zero();
        for (k, pk) in self.pieces.iter().enumerate() {
            let mut hs = self.domain.halfspaces.clone();
            for (j, pj) in self.pieces.iter().enumerate() {
                if j != k {
                    // piece_k ≤ piece_j on the region where k is active
                    hs.push((
                        vsub(&pk.gradient, &pj.gradient),
                        &pj.constant - &pk.constant,
                    ));
                }
            }
            let region = match polytope::from_halfspaces(d, &hs) {
                Ok(Some(r)) if r.is_fulldim() => r,
                _ => continue,
            };
            let dp1 = Rational::from_integer(((d + 1) as i64).into());
            for simplex in polytope::triangulate(&region.vertices) {
                let rows: Vec<Vector> =
                    simplex[1..].iter().map(|v| vsub(v, &simplex[0])).collect();
                let vol = crate::exactgeom::linalg::det(&rows).abs()
                    / (1..=d as i64)
                        .map(|i| Rational::from_integer(i.into()))
                        .product::<Rational>();
                let mean: Rational =
                    simplex.iter().map(|v| pk.eval(v)).sum::<Rational>() / &dp1;
                total += vol * mean;
            }
        }
        total
    }

    /// Adds a constant everywhere.
    pub fn add_constant(&self, c: &Rational) -> PAConcave {
        PAConcave {
            domain: self.domain.clone(),
            pieces: self
                .pieces
                .iter()
                .map(|p| AffineForm::new(p.gradient.clone(), &p.constant + c))
                .collect(),
        }
    }

    /// Vertices of the hypograph truncated at (min − 1): the exact graph
    /// breakpoints on top plus a floor copy of the domain.
    fn truncated_hypograph_vertices(&self) -> (Vec<Vector>, Rational) {
        let d = self.ambient();
        let floor = self.min_vertex_value() - Rational::one();
        let mut hs: Vec<Constraint> = Vec::new();
        for (a, b) in &self.domain.halfspaces {
            let mut row = a.clone();
            row.push(Rational::zero());
            hs.push((row, b.clone()));
        }
        for p in &self.pieces {
            let mut row = vneg(&p.gradient);
            row.push(Rational::one());
            hs.push((row, p.constant.clone()));
        }
        let mut yfloor = zeros(d + 1);
        yfloor[d] = -Rational::one();
        hs.push((yfloor, -floor.clone()));
        let poly = polytope::from_halfspaces(d + 1, &hs)
            .expect("truncated hypograph is bounded")
            .expect("domain is nonempty");
        (poly.vertices, floor)
    }
}

/// Drops pieces never strictly active on the domain.
fn prune_on_domain(pieces: Vec<AffineForm>, domain: &Polytope) -> Vec<AffineForm> {
    if pieces.len() <= 1 {
        return pieces;
    }
    let d = domain.ambient;
    let one = Rational::one();
    let kept: Vec<AffineForm> = pieces
        .iter()
        .filter(|pk| {
            let mut cs: Vec<Constraint> = Vec::new();
            for pj in &pieces {
                if pj == *pk {
                    continue;
                }
                let mut row = vsub(&pk.gradient, &pj.gradient);
                row.push(one.clone());
                cs.push((row, &pj.constant - &pk.constant));
            }
            for (a, b) in &domain.halfspaces {
                let mut row = a.clone();
                row.push(Rational::zero());
                cs.push((row, b.clone()));
            }
            let mut tcap = zeros(d + 1);
            tcap[d] = one.clone();
            cs.push((tcap, one.clone()));
            let mut obj = zeros(d + 1);
            obj[d] = one.clone();
            match lp::maximize(&obj, &cs) {
                LpResult::Optimal { value, .. } => value.is_positive(),
                _ => true,
            }
        })
        .cloned()
        .collect();
    if kept.is_empty() {
        vec![pieces[0].clone()]
    } else {
        kept
    }
}

/// Positive-linear combination Σ cᵢ·fᵢ of functions on one shared domain.
/// Since the piece indices are independent, Σᵢ minⱼ gᵢⱼ = min over all
/// index choices of Σᵢ gᵢ,ⱼ(i).
pub fn linear_combination(terms: &[(Rational, &PAConcave)]) -> Result<PAConcave> {
    let Some(((_, first), rest)) = terms.split_first() else {
        return Err(Error::EmptyInput);
    };
    for (c, f) in terms {
        if !c.is_positive() {
            return Err(Error::Semantic(
                "combination coefficients must be positive to preserve concavity".into(),
            ));
        }
        if f.domain != first.domain {
            return Err(Error::Semantic(
                "combination requires a shared domain".into(),
            ));
        }
    }
    let _ = rest;
    let d = first.ambient();
    let mut combos: Vec<AffineForm> = vec![AffineForm::constant_form(d, Rational::zero())];
    for (c, f) in terms {
        let mut next = Vec::with_capacity(combos.len() * f.pieces.len());
        for acc in &combos {
            for p in &f.pieces {
                next.push(AffineForm::new(
                    vadd(&acc.gradient, &vscale(&p.gradient, c)),
                    &acc.constant + &p.constant * c,
                ));
            }
        }
        combos = next;
        combos.sort();
        combos.dedup();
    }
    PAConcave::new(first.domain.clone(), combos)
}

/// Extracts the concave top function of a point cloud in ℝ^{d+1}: appends a
/// floor so upper facets are the facets with positive last normal entry.
fn upper_hull_function(points: &[Vector]) -> Result<PAConcave> {
    let d = points[0].len() - 1;
    let floor = points.iter().map(|p| p[d].clone()).min().unwrap() - Rational::one();
    let mut pts = points.to_vec();
    for p in points {
        let mut q = p.clone();
        q[d] = floor.clone();
        pts.push(q);
    }
    let hull = polytope::hull(&pts)?;
    let mut pieces = Vec::new();
    for (a, b) in &hull.halfspaces {
        if a[d].is_positive() {
            // ⟨a,(x,y)⟩ ≤ b  ⇒  y ≤ (b − ⟨a_x,x⟩)/a_y
            let inv = a[d].recip();
            pieces.push(AffineForm::new(
                a[..d].iter().map(|c| -(c * &inv)).collect(),
                b * &inv,
            ));
        }
    }
    let domain_pts: Vec<Vector> = points.iter().map(|p| p[..d].to_vec()).collect();
    let domain = polytope::hull(&domain_pts)?;
    PAConcave::new(domain, pieces)
}

/// Sup-convolution (f ⊞ g)(x) = sup{f(y) + g(x−y)}: upper hull of the
/// Minkowski sum of truncated hypographs.
pub fn sup_convolution(f: &PAConcave, g: &PAConcave) -> Result<PAConcave> {
    if f.ambient() != g.ambient() {
        return Err(Error::DimensionMismatch {
            expected: f.ambient(),
            got: g.ambient(),
        });
    }
    let (vf, _) = f.truncated_hypograph_vertices();
    let (vg, _) = g.truncated_hypograph_vertices();
    let mut sums: BTreeSet<Vector> = BTreeSet::new();
    for a in &vf {
        for b in &vg {
            sums.insert(vadd(a, b));
        }
    }
    let pts: Vec<Vector> = sums.into_iter().collect();
    upper_hull_function(&pts)
}

/// k-fold sup-convolution f ⊞ ⋯ ⊞ f = k·f(x/k), exact by scaling.
pub fn nfold_sup_convolution(f: &PAConcave, k: u32) -> Result<PAConcave> {
    if k == 0 {
        return Err(Error::Semantic("need at least one summand".into()));
    }
    let kq = Rational::from_integer((k as i64).into());
    let pieces = f
        .pieces
        .iter()
        .map(|p| AffineForm::new(p.gradient.clone(), &p.constant * &kq))
        .collect();
    PAConcave::new(f.domain.scale(&kq), pieces)
}

/// Mixed integral of d+1 functions in dimension d, normalized so that
/// MI(f,…,f) = (d+1)!·∫f; inclusion–exclusion over sup-convolutions.
pub fn mixed_integral(fs: &[&PAConcave]) -> Result<Rational> {
    let d = match fs.first() {
        Some(f) => f.ambient(),
        None => return Err(Error::EmptyInput),
    };
    if fs.len() != d + 1 {
        return Err(Error::WrongCount {
            expected: d + 1,
            got: fs.len(),
        });
    }
    for f in fs {
        if f.ambient() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: f.ambient(),
            });
        }
    }
    let n = fs.len();
    let mut total = Rational::zero();
    for mask in 1u32..(1 << n) {
        // identical-summand runs collapse by the scaling identity
        let chosen: Vec<&PAConcave> = (0..n)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| fs[j])
            .collect();
        let all_same = chosen.iter().all(|f| **f == *chosen[0]);
        let conv = if all_same {
            nfold_sup_convolution(chosen[0], chosen.len() as u32)?
        } else {
            let mut acc = chosen[0].clone();
            for f in &chosen[1..] {
                acc = sup_convolution(&acc, f)?;
            }
            acc
        };
        let sign = if (n as u32 - mask.count_ones()) % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        total += sign * conv.integral();
    }
    Ok(total)
}

/// Legendre–Fenchel dual of metric-side data: ϑ(x) = inf_u(⟨u,x⟩ − ψ(u)) on
/// Δ = conv of the piece gradients; the hypograph of ϑ is the upper hull of
/// the points (a_i, −b_i).
pub fn metric_to_roof(psi: &AffineFamily) -> Result<PAConcave> {
    let pts: Vec<Vector> = psi
        .forms
        .iter()
        .map(|f| {
            let mut p = f.gradient.clone();
            p.push(-f.constant.clone());
            p
        })
        .collect();
    upper_hull_function(&pts)
}

/// Inverse direction: ψ(u) = inf_{x∈Δ}(⟨u,x⟩ − ϑ(x)) = min over graph
/// breakpoints (w,t) of ⟨u,w⟩ − t.
pub fn roof_to_metric(theta: &PAConcave) -> Result<AffineFamily> {
    let d = theta.ambient();
    let (verts, floor) = theta.truncated_hypograph_vertices();
    let forms: Vec<AffineForm> = verts
        .iter()
        .filter(|v| v[d] != floor)
        .map(|v| AffineForm::new(v[..d].to_vec(), -v[d].clone()))
        .collect();
    AffineFamily::new(d, forms)
}

/// Sup-differential ∂f(x₀) = {u : ⟨u,x−x₀⟩ ≥ f(x)−f(x₀) ∀x ∈ domain} =
/// conv{active piece gradients} + cone{−a : a active domain normal}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupDifferential {
    pub base_point: Vector,
    pub conv_generators: Vec<Vector>,
    pub cone_generators: Vec<Vector>,
    pub dim: usize,
}

pub fn sup_differential(f: &PAConcave, x0: &[Rational]) -> Result<SupDifferential> {
    let value = f.evaluate(x0)?;
    let mut conv_generators: Vec<Vector> = f
        .pieces
        .iter()
        .filter(|p| p.eval(x0) == value)
        .map(|p| p.gradient.clone())
        .collect();
    conv_generators.sort();
    conv_generators.dedup();
    let mut cone_generators: Vec<Vector> = f
        .domain
        .halfspaces
        .iter()
        .filter(|(a, b)| dot(a, x0) == *b)
        .map(|(a, _)| vneg(a))
        .collect();
    cone_generators.sort();
    cone_generators.dedup();
    Ok(SupDifferential {
        base_point: x0.to_vec(),
        conv_generators,
        cone_generators,
        dim: f.ambient(),
    })
}

impl SupDifferential {
    /// H-representation via the homogenization cone over {(g,1)} ∪ {(r,0)}.
    pub fn halfspaces(&self) -> Vec<Constraint> {
        let d = self.dim;
        let mut gens: Vec<Vector> = Vec::new();
        for g in &self.conv_generators {
            let mut v = g.clone();
            v.push(Rational::one());
            gens.push(v);
        }
        for r in &self.cone_generators {
            let mut v = r.clone();
            v.push(Rational::zero());
            gens.push(v);
        }
        let (ineqs, eqs) = polytope::conical_hull_facets(&gens, d + 1);
        let mut out: Vec<Constraint> = Vec::new();
        for n in ineqs {
            // ⟨n_u, u⟩ + n_y ≥ 0  ⇒  ⟨−n_u, u⟩ ≤ n_y
            out.push((vneg(&n[..d]), n[d].clone()));
        }
        for n in eqs {
            out.push((vneg(&n[..d]), n[d].clone()));
            out.push((n[..d].to_vec(), -n[d].clone()));
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn contains(&self, u: &[Rational]) -> bool {
        self.halfspaces().iter().all(|(a, b)| dot(a, u) <= *b)
    }
}

/// Decides whether 0 is a vertex of the sup-differential: true iff no u ≠ 0
/// has both u and −u in the set. Returns an optional witness direction.
pub fn zero_is_vertex(s: &SupDifferential) -> Result<(bool, Option<Vector>)> {
    let d = s.dim;
    if !s.contains(&zeros(d)) {
        return Err(Error::ZeroNotInSet);
    }
    // T = S ∩ (−S) is symmetric; it is {0} iff max uᵢ over T is 0 for all i
    let hs = s.halfspaces();
    let mut cs: Vec<Constraint> = hs.clone();
    for (a, b) in &hs {
        cs.push((vneg(a), b.clone()));
    }
    for i in 0..d {
        match lp::maximize(&unit(d, i), &cs) {
            LpResult::Optimal { value, point } => {
                if value.is_positive() {
                    return Ok((false, Some(point)));
                }
            }
            LpResult::Unbounded { ray } => return Ok((false, Some(ray))),
            LpResult::Infeasible => unreachable!("0 is feasible"),
        }
    }
    Ok((true, None))
}

/// Ratios (μ − t)/width(S_t(f), direction) at the given levels; by concavity
/// they are non-increasing in t.
pub fn decay_probe(
    f: &PAConcave,
    direction: &[Rational],
    levels: &[Rational],
) -> Result<Vec<Rational>> {
    if is_zero_vec(direction) {
        return Err(Error::ZeroDirection);
    }
    let (mu, _, _) = f.maximize();
    let mut out = Vec::with_capacity(levels.len());
    for t in levels {
        if *t >= mu {
            return Err(Error::LevelAboveMax(format_rational(t)));
        }
        let st = f.sup_level(t)?;
        let w = st.width_along(direction)?;
        if w.is_zero() {
            return Err(Error::Semantic(
                "sup-level set has zero width along the probe direction".into(),
            ));
        }
        out.push((&mu - t) / w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::polytope::hull;
    use crate::scalar::{rat, rat_int};

    fn seg01() -> Polytope {
        hull(&[vec![rat_int(0)], vec![rat_int(1)]]).unwrap()
    }

    fn tent() -> PAConcave {
        PAConcave::new(
            seg01(),
            vec![
                AffineForm::new(vec![rat_int(1)], rat_int(0)),
                AffineForm::new(vec![rat_int(-1)], rat_int(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn evaluate_and_prune() {
        let f = tent();
        assert_eq!(f.evaluate(&[rat(1, 2)]).unwrap(), rat(1, 2));
        assert!(f.evaluate(&[rat_int(2)]).is_err());
        // min(2x+1, 3−x) on [0,3] at 1 → 2
        let dom = hull(&[vec![rat_int(0)], vec![rat_int(3)]]).unwrap();
        let g = PAConcave::new(
            dom,
            vec![
                AffineForm::new(vec![rat_int(2)], rat_int(1)),
                AffineForm::new(vec![rat_int(-1)], rat_int(3)),
            ],
        )
        .unwrap();
        assert_eq!(g.evaluate(&[rat_int(1)]).unwrap(), rat_int(2));
        // a dominated piece disappears
        let h = PAConcave::new(
            seg01(),
            vec![
                AffineForm::new(vec![rat_int(0)], rat_int(0)),
                AffineForm::new(vec![rat_int(0)], rat_int(5)),
            ],
        )
        .unwrap();
        assert_eq!(h.pieces.len(), 1);
    }

    #[test]
    fn maximize_tent() {
        let (mu, x, face) = tent().maximize();
        assert_eq!(mu, rat(1, 2));
        assert_eq!(x, vec![rat(1, 2)]);
        assert_eq!(face.vertices, vec![vec![rat(1, 2)]]);
    }

    #[test]
    fn maximize_plateau_tiebreak() {
        // min(c, c−(x−1/2)) on [0,1]: max face [0,1/2], lex-min argmax 0
        let c = rat_int(3);
        let f = PAConcave::new(
            seg01(),
            vec![
                AffineForm::new(vec![rat_int(0)], c.clone()),
                AffineForm::new(vec![rat_int(-1)], &c + rat(1, 2)),
            ],
        )
        .unwrap();
        let (mu, x, face) = f.maximize();
        assert_eq!(mu, c);
        assert_eq!(x, vec![rat_int(0)]);
        assert_eq!(
            face.vertices,
            vec![vec![rat_int(0)], vec![rat(1, 2)]]
        );
    }

    #[test]
    fn sup_level_cuts() {
        let f = tent();
        assert_eq!(f.sup_level(&rat_int(0)).unwrap(), seg01());
        let s = f.sup_level(&rat(1, 4)).unwrap();
        assert_eq!(s.vertices, vec![vec![rat(1, 4)], vec![rat(3, 4)]]);
        assert!(f.sup_level(&rat_int(1)).is_err());
    }

    #[test]
    fn integral_examples() {
        assert_eq!(tent().integral(), rat(1, 4));
        let sq = hull(&[
            vec![rat_int(0), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(1)],
        ])
        .unwrap();
        assert_eq!(
            PAConcave::constant(sq.clone(), rat_int(1)).integral(),
            rat_int(1)
        );
        let linear = PAConcave::new(
            sq,
            vec![AffineForm::new(vec![rat_int(1), rat_int(0)], rat_int(0))],
        )
        .unwrap();
        assert_eq!(linear.integral(), rat(1, 2));
    }

    #[test]
    fn sup_convolution_examples() {
        let z = PAConcave::constant(seg01(), rat_int(0));
        let s = sup_convolution(&z, &z).unwrap();
        assert_eq!(s.domain.vertices, vec![vec![rat_int(0)], vec![rat_int(2)]]);
        assert_eq!(s.pieces.len(), 1);
        assert_eq!(s.evaluate(&[rat(3, 2)]).unwrap(), rat_int(0));
        // (x on [0,1]) ⊞ (0 on [0,1]) = min(x, 1) on [0,2]
        let xf = PAConcave::new(
            seg01(),
            vec![AffineForm::new(vec![rat_int(1)], rat_int(0))],
        )
        .unwrap();
        let c = sup_convolution(&xf, &z).unwrap();
        for (p, want) in [
            (rat(1, 2), rat(1, 2)),
            (rat_int(1), rat_int(1)),
            (rat(3, 2), rat_int(1)),
        ] {
            assert_eq!(c.evaluate(&[p]).unwrap(), want);
        }
        // scaling shortcut agrees with the generic path
        let t = tent();
        let a = sup_convolution(&t, &t).unwrap();
        let b = nfold_sup_convolution(&t, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_integral_examples() {
        let z = PAConcave::constant(seg01(), rat_int(0));
        assert_eq!(mixed_integral(&[&z, &z]).unwrap(), rat_int(0));
        let one = PAConcave::constant(seg01(), rat_int(1));
        assert_eq!(mixed_integral(&[&one, &one]).unwrap(), rat_int(2));
        // normalization: MI(f,f) = 2!·∫f for the tent
        let t = tent();
        assert_eq!(mixed_integral(&[&t, &t]).unwrap(), rat(1, 2));
        // symmetry
        assert_eq!(
            mixed_integral(&[&t, &one]).unwrap(),
            mixed_integral(&[&one, &t]).unwrap()
        );
    }

    #[test]
    fn legendre_examples() {
        // ψ = min(0, u) dualizes to 0 on [0,1]
        let psi = AffineFamily::new(
            1,
            vec![
                AffineForm::new(vec![rat_int(0)], rat_int(0)),
                AffineForm::new(vec![rat_int(1)], rat_int(0)),
            ],
        )
        .unwrap();
        let theta = metric_to_roof(&psi).unwrap();
        assert_eq!(theta.domain, seg01());
        assert_eq!(theta.pieces.len(), 1);
        assert_eq!(theta.evaluate(&[rat(1, 3)]).unwrap(), rat_int(0));
        // shifted: ψ(u) = min(0+c', u−u₀+c') with Ψ(u−u₀)−c pattern
        // take ψ(u) = min(−c, u − u0 − c): dual is ⟨u0,x⟩ + c on [0,1]
        let u0 = rat(1, 3);
        let c = rat(5, 7);
        let psi = AffineFamily::new(
            1,
            vec![
                AffineForm::new(vec![rat_int(0)], -c.clone()),
                AffineForm::new(vec![rat_int(1)], -&u0 - &c),
            ],
        )
        .unwrap();
        let theta = metric_to_roof(&psi).unwrap();
        assert_eq!(theta.domain, seg01());
        assert_eq!(
            theta.evaluate(&[rat(1, 2)]).unwrap(),
            &u0 * &rat(1, 2) + &c
        );
        // involution through the other direction
        let t = tent();
        let back = metric_to_roof(&roof_to_metric(&t).unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn sup_differential_examples() {
        let f = tent();
        let s = sup_differential(&f, &[rat(1, 2)]).unwrap();
        assert_eq!(s.conv_generators.len(), 2);
        assert!(s.contains(&[rat_int(1)]));
        assert!(s.contains(&[rat_int(-1)]));
        assert!(!s.contains(&[rat(3, 2)]));
        let (v, w) = zero_is_vertex(&s).unwrap();
        assert!(!v);
        assert!(w.is_some());
        // x on [0,1] at 1: ∂ = (−∞, 1]
        let xf = PAConcave::new(
            seg01(),
            vec![AffineForm::new(vec![rat_int(1)], rat_int(0))],
        )
        .unwrap();
        let s = sup_differential(&xf, &[rat_int(1)]).unwrap();
        assert!(s.contains(&[rat_int(-100)]));
        assert!(s.contains(&[rat_int(1)]));
        assert!(!s.contains(&[rat(11, 10)]));
        // constant at an interior point: {0}, and 0 is a vertex
        let z = PAConcave::constant(seg01(), rat_int(2));
        let s = sup_differential(&z, &[rat(1, 2)]).unwrap();
        assert!(s.contains(&[rat_int(0)]));
        assert!(!s.contains(&[rat(1, 100)]));
        assert_eq!(zero_is_vertex(&s).unwrap(), (true, None));
    }

    #[test]
    fn decay_probe_examples() {
        let f = tent();
        let r = decay_probe(&f, &[rat_int(1)], &[rat_int(0), rat(1, 4)]).unwrap();
        assert_eq!(r, vec![rat(1, 2), rat(1, 2)]);
        // plateau: (1/4)/(3/4) = 1/3 at t = c − 1/4
        let c = rat_int(2);
        let f = PAConcave::new(
            seg01(),
            vec![
                AffineForm::new(vec![rat_int(0)], c.clone()),
                AffineForm::new(vec![rat_int(-1)], &c + rat(1, 2)),
            ],
        )
        .unwrap();
        let r = decay_probe(&f, &[rat_int(1)], &[&c - rat(1, 4)]).unwrap();
        assert_eq!(r, vec![rat(1, 3)]);
    }

    #[test]
    fn linear_combination_global_roof() {
        let t = tent();
        let z = PAConcave::constant(seg01(), rat_int(0));
        let s = linear_combination(&[(rat_int(1), &t), (rat_int(1), &z)]).unwrap();
        assert_eq!(s, t);
        let half = linear_combination(&[(rat(1, 2), &t)]).unwrap();
        assert_eq!(half.evaluate(&[rat(1, 2)]).unwrap(), rat(1, 4));
    }
}
